#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace regenhd {

// Class prototypes, one row per class. effective_dim tracks the cumulative
// number of distinct random projections the model has consumed (current
// dimension plus every redrawn row), which is what capacity comparisons care
// about.
struct ClassModel {
    Eigen::MatrixXd classes;  // n_classes x dim
    double eta = 0.05;
    std::int64_t effective_dim = 0;

    Eigen::Index n_classes() const { return classes.rows(); }
    Eigen::Index dim() const { return classes.cols(); }
};

struct Prediction {
    int class_index = -1;
    Eigen::VectorXd scores;  // cosine similarity per class
};

// Cosine similarity; 0 when either vector has zero norm.
double similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

ClassModel init_model(int n_classes, int dim, double eta);

// One adaptive step. The sample is treated as mispredicted when its class is
// not the argmax of the similarities, or when its own class row is still
// all-zero (an empty prototype has learned nothing, even if tie-breaking
// happens to pick it). On a mispredict the true row is reinforced by
// eta*(1 - sim_true)*h and the winning wrong row, if it is nonzero, is
// penalized by eta*(1 - sim_winner)*h. Returns whether an update fired.
bool adaptive_update(ClassModel& model, const Eigen::VectorXd& h, int label);

// Initial bundling pass: one adaptive_update per sample, in input order.
void bundle_train(ClassModel& model, const Eigen::MatrixXd& H, const std::vector<int>& labels);

// Full pass of adaptive updates in sample order; returns the fraction of
// samples that were mispredicted (under the rule above) during the pass.
double retrain_epoch(ClassModel& model, const Eigen::MatrixXd& H, const std::vector<int>& labels);

// Copy with every nonzero row scaled to unit L2 norm.
ClassModel normalize_model(const ClassModel& model);

Prediction predict(const ClassModel& model, const Eigen::VectorXd& h);

// Cosine of every class row against every column of H (n_classes x N), via
// one matrix product. Agrees with per-sample similarity() to within fp noise.
Eigen::MatrixXd similarity_batch(const ClassModel& model, const Eigen::MatrixXd& H);

std::vector<int> predict_batch(const ClassModel& model, const Eigen::MatrixXd& H);

// Fraction of columns of H whose predict() matches the label. Deliberately
// runs the exact per-sample path so recounts match it bit for bit.
double accuracy(const ClassModel& model, const Eigen::MatrixXd& H, const std::vector<int>& labels);

void save_model(const std::string& path, const ClassModel& model);
ClassModel load_model(const std::string& path);

// Lowest index wins ties.
int argmax_lowest(const Eigen::VectorXd& v);

}  // namespace regenhd

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "regenhd/encoder.hpp"
#include "regenhd/model.hpp"

namespace regenhd {

struct RegenSchedule {
    double regen_rate = 0.10;  // fraction of dimensions redrawn per cycle, in (0,1)
    int cycles = 20;
    int epochs_per_cycle = 1;
    double eta = 0.05;
};

// Per-dimension population variance of the row-normalized class matrix. A
// dimension where all classes agree carries no discriminative signal.
Eigen::VectorXd dimension_variance(const ClassModel& model);

// Indices of the floor(rate * dim) lowest-variance dimensions, ties broken
// toward the lower index. Result is sorted ascending. The rate must lie in
// (0,1) and select at least one dimension.
std::vector<int> select_drop(const Eigen::VectorXd& variance, double regen_rate);

void zero_dims(ClassModel& model, const std::vector<int>& dims);

struct CycleOutcome {
    std::vector<int> dropped;
    std::vector<double> train_errors;  // one entry per retrain epoch
};

// One regeneration cycle: rank dimensions, redraw the weakest, clear the
// matching model columns, re-encode the training set under the new encoder,
// then run the scheduled retrain epochs. X holds raw features column-wise.
// When H is given it must hold encode_batch(X, enc) for the incoming encoder
// state; it is updated in place and reused (only redrawn rows recomputed when
// partial_reencode is set).
CycleOutcome run_cycle(ClassModel& model, EncoderState& enc, const Eigen::MatrixXd& X,
                       const std::vector<int>& labels, const RegenSchedule& schedule,
                       Eigen::MatrixXd* H = nullptr, bool partial_reencode = false);

struct CycleRecord {
    int cycle = 0;  // 1-based
    std::vector<int> dropped;
    std::vector<double> train_errors;
    double pre_test_accuracy = -1.0;  // negative = no test set tracked
    double post_test_accuracy = -1.0;
    std::int64_t effective_dim = 0;
};

struct FitReport {
    int dim = 0;
    int n_features = 0;
    int n_classes = 0;
    double sigma = 0.0;
    double eta = 0.0;
    double regen_rate = 0.0;
    int cycles_requested = 0;
    int epochs_per_cycle = 0;
    int initial_epochs = 0;
    std::vector<double> initial_train_errors;
    double initial_test_accuracy = -1.0;
    std::vector<CycleRecord> cycles;
    double final_train_error = 1.0;
    double final_test_accuracy = -1.0;
    std::int64_t effective_dim = 0;
    std::int64_t train_mac_ops = 0;
    int total_epochs = 0;
    bool stopped_early = false;
};

struct FitOptions {
    int dim = 512;
    double sigma = 1.0;
    std::uint64_t enc_seed = 1;
    RegenSchedule schedule;      // carries eta
    int initial_epochs = 0;      // extra retrain passes right after bundling
    bool plateau_stop = false;   // stop when test accuracy gain < 1e-4 over 3 cycles
    bool partial_reencode = false;
};

struct FitResult {
    ClassModel model;
    EncoderState enc;
    FitReport report;
};

// Full pipeline: fresh encoder, bundle pass, initial epochs, then the regen
// schedule. Pass X_test with zero columns to skip test tracking.
FitResult fit(const Eigen::MatrixXd& X_train, const std::vector<int>& y_train, int n_classes,
              const Eigen::MatrixXd& X_test, const std::vector<int>& y_test,
              const FitOptions& opts);

// Baseline without regeneration: bundle pass plus `epochs` retrain epochs,
// dimension fixed for the whole run.
FitResult fit_static(const Eigen::MatrixXd& X_train, const std::vector<int>& y_train,
                     int n_classes, const Eigen::MatrixXd& X_test,
                     const std::vector<int>& y_test, int dim, double sigma,
                     std::uint64_t enc_seed, double eta, int epochs);

}  // namespace regenhd

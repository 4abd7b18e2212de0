#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace regenhd {

// Random-feature encoder: hypervector element d is cos(b_d . x + phi_d) with
// b_d ~ N(0, sigma^2 I) and phi_d ~ U[0, 2pi). Every row is tied to its own
// counter-derived RNG substream so single rows can be redrawn later without
// touching the rest.
struct EncoderState {
    Eigen::MatrixXd base;    // dim x n_features, row d = b_d
    Eigen::VectorXd phase;   // dim
    double sigma = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t seed_counter = 0;  // next substream id for redraws

    Eigen::Index dim() const { return base.rows(); }
    Eigen::Index n_features() const { return base.cols(); }
};

EncoderState new_encoder(int n_features, int dim, double sigma, std::uint64_t seed);

Eigen::VectorXd encode(const Eigen::VectorXd& x, const EncoderState& enc);

// Columns of X are samples (n_features x N); result is dim x N.
Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& X, const EncoderState& enc);

// Redraws the listed rows (base + phase) from fresh substreams, consuming one
// substream id per row in ascending row order. All other rows are untouched.
void regenerate_dims(EncoderState& enc, const std::vector<int>& dims);

void save_encoder(const std::string& path, const EncoderState& enc);
EncoderState load_encoder(const std::string& path);

}  // namespace regenhd

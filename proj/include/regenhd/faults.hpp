#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "regenhd/model.hpp"
#include "regenhd/quantize.hpp"

namespace regenhd {

// Independent per-bit flips over the packed code fields of a quantized model,
// sign bits included. (seed, flip_probability) fully determines the outcome:
// row r draws from substream r, scanning code-major then bit-major.
struct FaultSpec {
    double flip_probability = 0.0;
    std::uint64_t seed = 0;
};

QuantizedModel inject(const QuantizedModel& qm, const FaultSpec& spec);

struct RobustnessPoint {
    int bitwidth = 0;
    double flip_probability = 0.0;
    int trials = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // population std over trials
};

// Accuracy under faults for every (bitwidth, flip probability) pair. The
// float model is quantized per bitwidth; queries are quantized fault-free;
// trial t of pair (i_b, i_p) seeds inject() with substream
// (i_b * |p_grid| + i_p) * trials + t of the root seed.
std::vector<RobustnessPoint> robustness_curve(const ClassModel& model,
                                              const Eigen::MatrixXd& H_test,
                                              const std::vector<int>& labels,
                                              const std::vector<int>& bitwidths,
                                              const std::vector<double>& p_grid, int trials,
                                              std::uint64_t seed);

void write_curve_csv(const std::string& path, const std::vector<RobustnessPoint>& points);

}  // namespace regenhd

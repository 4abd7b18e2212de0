#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "regenhd/model.hpp"

namespace regenhd {

// Symmetric uniform quantization to b bits, b in {1,2,4,8,16,32}.
//  b == 1: codes are the signs (sign(0) = +1), scale is mean |v|.
//  b >= 2: codes live in [-(2^(b-1)-1), 2^(b-1)-1], scale = max|v| / (2^(b-1)-1),
//          rounding half away from zero.
// An all-zero input keeps scale 1 so dequantization stays well defined.
struct QuantizedVector {
    int bitwidth = 8;
    double scale = 1.0;
    std::vector<std::int32_t> codes;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(codes.size()); }
};

bool valid_bitwidth(int b);

QuantizedVector quantize_vec(const Eigen::VectorXd& v, int bitwidth);

Eigen::VectorXd dequantize(const QuantizedVector& q);

// Cosine similarity over the integer codes (computed in double). Scales cancel
// out of the cosine, so they are ignored.
double quantized_similarity(const QuantizedVector& a, const QuantizedVector& b);

// Binary route for 1-bit codes: 1 - 2*hamming/dim over packed words. Equals
// the cosine of +-1 vectors identically.
double hamming_similarity(const QuantizedVector& a, const QuantizedVector& b);

// Two's-complement bit fields packed little-end first, 64/b codes per word
// (1-bit codes map +1 -> 1, -1 -> 0). Unpacking sign-extends each field.
std::vector<std::uint64_t> pack_codes(const std::vector<std::int32_t>& codes, int bitwidth);
std::vector<std::int32_t> unpack_codes(const std::vector<std::uint64_t>& words, int bitwidth,
                                       std::size_t count);

struct QuantizedModel {
    int bitwidth = 8;
    std::vector<QuantizedVector> rows;  // one per class, each with its own scale

    int n_classes() const { return static_cast<int>(rows.size()); }
    Eigen::Index dim() const { return rows.empty() ? 0 : rows.front().dim(); }
};

QuantizedModel quantize_model(const ClassModel& model, int bitwidth);

Prediction predict_q(const QuantizedModel& qm, const QuantizedVector& qh);

std::vector<QuantizedVector> quantize_queries(const Eigen::MatrixXd& H, int bitwidth);

double accuracy_q(const QuantizedModel& qm, const std::vector<QuantizedVector>& queries,
                  const std::vector<int>& labels);
double accuracy_q(const QuantizedModel& qm, const Eigen::MatrixXd& H,
                  const std::vector<int>& labels);

// Checkpoint stores packed code words plus per-row scales.
void save_quantized(const std::string& path, const QuantizedModel& qm);
QuantizedModel load_quantized(const std::string& path);

}  // namespace regenhd

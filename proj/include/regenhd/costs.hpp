#pragma once

#include <cstdint>

namespace regenhd {

// Compute-cost accounting. Figures are analytic (derived from loop bounds),
// not runtime counters, so they are exact and deterministic. One MAC = one
// multiply-accumulate on the wide datapath.

// Encoding: N samples, each needing dim dot products of length n_features.
inline std::int64_t encode_macs(std::int64_t n_samples, std::int64_t dim,
                                std::int64_t n_features) {
    return n_samples * dim * n_features;
}

// One adaptive epoch: per sample, a full n_classes x dim similarity sweep.
// Row updates fire only on mispredicted samples, so they are data dependent
// and excluded from the figure.
inline std::int64_t epoch_macs(std::int64_t n_samples, std::int64_t n_classes,
                               std::int64_t dim) {
    return n_samples * n_classes * dim;
}

// One query: encode it, then sweep it against every class row.
inline std::int64_t inference_macs(std::int64_t dim, std::int64_t n_features,
                                   std::int64_t n_classes) {
    return dim * (n_features + n_classes);
}

// Cost proxy for quantized inference: D*b bit operations per dot product,
// one dot product per class. At b=1 this is one XNOR per element.
inline std::int64_t inference_bitops(std::int64_t dim, std::int64_t n_classes,
                                     std::int64_t bitwidth) {
    return n_classes * dim * bitwidth;
}

}  // namespace regenhd

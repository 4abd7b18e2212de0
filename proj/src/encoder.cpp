#include "regenhd/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "regenhd/errors.hpp"
#include "regenhd/rng.hpp"
#include "regenhd/serialize.hpp"

namespace regenhd {

namespace {

constexpr std::uint64_t kEncoderMagic = 0x31434e4544484752ULL;  // "RGHDENC1"
constexpr double kTwoPi = 6.283185307179586476925286766559;

// One row's worth of randomness: n gaussians for the base vector, then one
// uniform for the phase. Redraws replay this exact pattern.
void draw_row(EncoderState& enc, Eigen::Index row, std::uint64_t stream) {
    Rng rng = Rng::substream(enc.seed, stream);
    for (Eigen::Index j = 0; j < enc.base.cols(); ++j)
        enc.base(row, j) = enc.sigma * rng.next_gaussian();
    enc.phase(row) = rng.next_uniform(0.0, kTwoPi);
}

}  // namespace

EncoderState new_encoder(int n_features, int dim, double sigma, std::uint64_t seed) {
    if (n_features < 1) throw config_error("encoder needs at least one input feature");
    if (dim < 1) throw config_error("encoder dimension must be >= 1");
    if (!(sigma > 0.0)) throw config_error("encoder sigma must be > 0");

    EncoderState enc;
    enc.base.resize(dim, n_features);
    enc.phase.resize(dim);
    enc.sigma = sigma;
    enc.seed = seed;
    for (Eigen::Index d = 0; d < dim; ++d)
        draw_row(enc, d, static_cast<std::uint64_t>(d));
    enc.seed_counter = static_cast<std::uint64_t>(dim);
    return enc;
}

Eigen::VectorXd encode(const Eigen::VectorXd& x, const EncoderState& enc) {
    if (x.size() != enc.n_features())
        throw invariant_error("encode: sample has " + std::to_string(x.size()) +
                              " features, encoder expects " + std::to_string(enc.n_features()));
    return ((enc.base * x + enc.phase).array().cos()).matrix();
}

Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& X, const EncoderState& enc) {
    if (X.rows() != enc.n_features())
        throw invariant_error("encode_batch: samples have " + std::to_string(X.rows()) +
                              " features, encoder expects " + std::to_string(enc.n_features()));
    Eigen::MatrixXd H = enc.base * X;
    H.colwise() += enc.phase;
    return H.array().cos().matrix();
}

void regenerate_dims(EncoderState& enc, const std::vector<int>& dims) {
    std::set<int> unique_dims;
    for (int d : dims) {
        if (d < 0 || d >= enc.dim())
            throw invariant_error("regenerate_dims: row " + std::to_string(d) + " out of range");
        if (!unique_dims.insert(d).second)
            throw invariant_error("regenerate_dims: duplicate row " + std::to_string(d));
    }
    // ascending order pins which substream each row consumes
    for (int d : unique_dims)
        draw_row(enc, d, enc.seed_counter++);
}

void save_encoder(const std::string& path, const EncoderState& enc) {
    BinWriter w(path);
    w.u64(kEncoderMagic);
    w.u32(1);  // format version
    w.i64(enc.dim());
    w.i64(enc.n_features());
    w.f64(enc.sigma);
    w.u64(enc.seed);
    w.u64(enc.seed_counter);
    for (Eigen::Index d = 0; d < enc.dim(); ++d)
        for (Eigen::Index j = 0; j < enc.n_features(); ++j) w.f64(enc.base(d, j));
    for (Eigen::Index d = 0; d < enc.dim(); ++d) w.f64(enc.phase(d));
    w.finish();
}

EncoderState load_encoder(const std::string& path) {
    BinReader r(path);
    if (r.u64() != kEncoderMagic) throw data_error("not an encoder file: " + path);
    if (r.u32() != 1) throw data_error("unsupported encoder format version: " + path);
    std::int64_t dim = r.i64();
    std::int64_t nfeat = r.i64();
    if (dim < 1 || nfeat < 1 || dim > (1LL << 32) || nfeat > (1LL << 32))
        throw data_error("corrupt encoder header: " + path);

    EncoderState enc;
    enc.base.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(nfeat));
    enc.phase.resize(static_cast<Eigen::Index>(dim));
    enc.sigma = r.f64();
    enc.seed = r.u64();
    enc.seed_counter = r.u64();
    for (Eigen::Index d = 0; d < enc.dim(); ++d)
        for (Eigen::Index j = 0; j < enc.n_features(); ++j) enc.base(d, j) = r.f64();
    for (Eigen::Index d = 0; d < enc.dim(); ++d) enc.phase(d) = r.f64();
    return enc;
}

}  // namespace regenhd

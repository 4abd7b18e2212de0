#include "regenhd/quantize.hpp"

#include <cmath>

#include "regenhd/errors.hpp"
#include "regenhd/serialize.hpp"

namespace regenhd {

namespace {

constexpr std::uint64_t kQuantMagic = 0x31544e5144484752ULL;  // "RGHDQNT1"

std::int64_t qmax_for(int bitwidth) {
    return (1LL << (bitwidth - 1)) - 1;
}

void check_pair(const QuantizedVector& a, const QuantizedVector& b) {
    if (a.bitwidth != b.bitwidth)
        throw invariant_error("quantized similarity: bitwidth mismatch");
    if (a.codes.size() != b.codes.size())
        throw invariant_error("quantized similarity: dimension mismatch");
}

}  // namespace

bool valid_bitwidth(int b) {
    return b == 1 || b == 2 || b == 4 || b == 8 || b == 16 || b == 32;
}

QuantizedVector quantize_vec(const Eigen::VectorXd& v, int bitwidth) {
    if (!valid_bitwidth(bitwidth))
        throw config_error("bitwidth must be one of 1,2,4,8,16,32");

    QuantizedVector q;
    q.bitwidth = bitwidth;
    q.codes.resize(static_cast<std::size_t>(v.size()));

    if (bitwidth == 1) {
        double mean_abs = v.size() > 0 ? v.cwiseAbs().mean() : 0.0;
        q.scale = mean_abs > 0.0 ? mean_abs : 1.0;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            q.codes[static_cast<std::size_t>(i)] = v(i) < 0.0 ? -1 : 1;
        return q;
    }

    const std::int64_t qmax = qmax_for(bitwidth);
    double max_abs = v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0;
    q.scale = max_abs > 0.0 ? max_abs / static_cast<double>(qmax) : 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        long long c = std::llround(v(i) / q.scale);  // rounds half away from zero
        if (c > qmax) c = qmax;
        if (c < -qmax) c = -qmax;
        q.codes[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(c);
    }
    return q;
}

Eigen::VectorXd dequantize(const QuantizedVector& q) {
    Eigen::VectorXd v(q.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = q.scale * static_cast<double>(q.codes[static_cast<std::size_t>(i)]);
    return v;
}

double quantized_similarity(const QuantizedVector& a, const QuantizedVector& b) {
    check_pair(a, b);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.codes.size(); ++i) {
        double x = static_cast<double>(a.codes[i]);
        double y = static_cast<double>(b.codes[i]);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double hamming_similarity(const QuantizedVector& a, const QuantizedVector& b) {
    check_pair(a, b);
    if (a.bitwidth != 1)
        throw invariant_error("hamming similarity requires 1-bit codes");
    if (a.codes.empty()) return 0.0;
    std::vector<std::uint64_t> wa = pack_codes(a.codes, 1);
    std::vector<std::uint64_t> wb = pack_codes(b.codes, 1);
    std::int64_t ham = 0;
    for (std::size_t i = 0; i < wa.size(); ++i)
        ham += __builtin_popcountll(wa[i] ^ wb[i]);
    const auto D = static_cast<double>(a.codes.size());
    return 1.0 - 2.0 * static_cast<double>(ham) / D;
}

std::vector<std::uint64_t> pack_codes(const std::vector<std::int32_t>& codes, int bitwidth) {
    if (!valid_bitwidth(bitwidth))
        throw config_error("bitwidth must be one of 1,2,4,8,16,32");
    const int cpw = 64 / bitwidth;
    const std::uint64_t mask = (1ULL << bitwidth) - 1ULL;
    std::vector<std::uint64_t> words((codes.size() + static_cast<std::size_t>(cpw) - 1) /
                                     static_cast<std::size_t>(cpw), 0);
    for (std::size_t j = 0; j < codes.size(); ++j) {
        std::uint64_t field;
        if (bitwidth == 1) {
            field = codes[j] > 0 ? 1ULL : 0ULL;
        } else {
            field = static_cast<std::uint64_t>(static_cast<std::uint32_t>(codes[j])) & mask;
        }
        const std::size_t w = j / static_cast<std::size_t>(cpw);
        const int slot = static_cast<int>(j % static_cast<std::size_t>(cpw));
        words[w] |= field << (slot * bitwidth);
    }
    return words;
}

std::vector<std::int32_t> unpack_codes(const std::vector<std::uint64_t>& words, int bitwidth,
                                       std::size_t count) {
    if (!valid_bitwidth(bitwidth))
        throw config_error("bitwidth must be one of 1,2,4,8,16,32");
    const int cpw = 64 / bitwidth;
    const std::uint64_t mask = (1ULL << bitwidth) - 1ULL;
    if (words.size() * static_cast<std::size_t>(cpw) < count)
        throw data_error("packed code buffer too short");

    std::vector<std::int32_t> codes(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t w = j / static_cast<std::size_t>(cpw);
        const int slot = static_cast<int>(j % static_cast<std::size_t>(cpw));
        std::uint64_t field = (words[w] >> (slot * bitwidth)) & mask;
        if (bitwidth == 1) {
            codes[j] = field ? 1 : -1;
        } else {
            if (field & (1ULL << (bitwidth - 1))) field |= ~mask;  // sign extend
            codes[j] = static_cast<std::int32_t>(static_cast<std::uint32_t>(field));
        }
    }
    return codes;
}

QuantizedModel quantize_model(const ClassModel& model, int bitwidth) {
    QuantizedModel qm;
    qm.bitwidth = bitwidth;
    qm.rows.reserve(static_cast<std::size_t>(model.n_classes()));
    for (Eigen::Index l = 0; l < model.n_classes(); ++l)
        qm.rows.push_back(quantize_vec(model.classes.row(l).transpose(), bitwidth));
    return qm;
}

Prediction predict_q(const QuantizedModel& qm, const QuantizedVector& qh) {
    if (qm.rows.empty()) throw invariant_error("predict_q: empty model");
    Prediction p;
    p.scores.resize(qm.n_classes());
    for (int l = 0; l < qm.n_classes(); ++l)
        p.scores(l) = quantized_similarity(qm.rows[static_cast<std::size_t>(l)], qh);
    p.class_index = argmax_lowest(p.scores);
    return p;
}

std::vector<QuantizedVector> quantize_queries(const Eigen::MatrixXd& H, int bitwidth) {
    std::vector<QuantizedVector> out;
    out.reserve(static_cast<std::size_t>(H.cols()));
    for (Eigen::Index j = 0; j < H.cols(); ++j)
        out.push_back(quantize_vec(H.col(j), bitwidth));
    return out;
}

double accuracy_q(const QuantizedModel& qm, const std::vector<QuantizedVector>& queries,
                  const std::vector<int>& labels) {
    if (queries.size() != labels.size())
        throw invariant_error("accuracy_q: label count mismatch");
    if (queries.empty()) throw invariant_error("accuracy_q over empty sample set");
    std::int64_t hits = 0;
    for (std::size_t j = 0; j < queries.size(); ++j) {
        Prediction p = predict_q(qm, queries[j]);
        if (p.class_index == labels[j]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(queries.size());
}

double accuracy_q(const QuantizedModel& qm, const Eigen::MatrixXd& H,
                  const std::vector<int>& labels) {
    return accuracy_q(qm, quantize_queries(H, qm.bitwidth), labels);
}

void save_quantized(const std::string& path, const QuantizedModel& qm) {
    BinWriter w(path);
    w.u64(kQuantMagic);
    w.u32(1);
    w.i64(qm.n_classes());
    w.i64(qm.dim());
    w.u32(static_cast<std::uint32_t>(qm.bitwidth));
    for (const auto& row : qm.rows) {
        if (row.dim() != qm.dim() || row.bitwidth != qm.bitwidth)
            throw invariant_error("quantized model rows disagree on shape");
        w.f64(row.scale);
        for (std::uint64_t word : pack_codes(row.codes, qm.bitwidth)) w.u64(word);
    }
    w.finish();
}

QuantizedModel load_quantized(const std::string& path) {
    BinReader r(path);
    if (r.u64() != kQuantMagic) throw data_error("not a quantized model file: " + path);
    if (r.u32() != 1) throw data_error("unsupported quantized format version: " + path);
    std::int64_t L = r.i64();
    std::int64_t D = r.i64();
    int b = static_cast<int>(r.u32());
    if (L < 1 || D < 1 || L > (1LL << 24) || D > (1LL << 32) || !valid_bitwidth(b))
        throw data_error("corrupt quantized model header: " + path);

    const int cpw = 64 / b;
    const std::size_t nwords =
        (static_cast<std::size_t>(D) + static_cast<std::size_t>(cpw) - 1) /
        static_cast<std::size_t>(cpw);
    QuantizedModel qm;
    qm.bitwidth = b;
    qm.rows.resize(static_cast<std::size_t>(L));
    for (auto& row : qm.rows) {
        row.bitwidth = b;
        row.scale = r.f64();
        std::vector<std::uint64_t> words(nwords);
        for (auto& word : words) word = r.u64();
        row.codes = unpack_codes(words, b, static_cast<std::size_t>(D));
    }
    return qm;
}

}  // namespace regenhd

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "regenhd/errors.hpp"
#include "regenhd/model.hpp"
#include "regenhd/rng.hpp"

using namespace regenhd;

namespace {

// Plain-loop reimplementation of the update rule, kept deliberately free of
// Eigen so the library path is checked against independent arithmetic.
double scalar_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct ScalarModel {
    std::vector<std::vector<double>> rows;
    double eta = 0.05;
};

bool scalar_update(ScalarModel& m, const std::vector<double>& h, int label) {
    const int L = static_cast<int>(m.rows.size());
    std::vector<double> delta(L);
    for (int l = 0; l < L; ++l) delta[l] = scalar_cosine(h, m.rows[l]);
    int winner = 0;
    for (int l = 1; l < L; ++l)
        if (delta[l] > delta[winner]) winner = l;
    double label_norm = 0;
    for (double v : m.rows[label]) label_norm += v * v;
    bool miss = (winner != label) || label_norm == 0.0;
    if (!miss) return false;
    for (std::size_t d = 0; d < h.size(); ++d)
        m.rows[label][d] += m.eta * (1.0 - delta[label]) * h[d];
    if (winner != label) {
        double winner_norm = 0;
        for (double v : m.rows[winner]) winner_norm += v * v;
        if (winner_norm > 0.0)
            for (std::size_t d = 0; d < h.size(); ++d)
                m.rows[winner][d] -= m.eta * (1.0 - delta[winner]) * h[d];
    }
    return true;
}

std::vector<double> col_to_vec(const Eigen::MatrixXd& H, Eigen::Index j) {
    return std::vector<double>(H.col(j).data(), H.col(j).data() + H.rows());
}

// Tight clusters around random unit prototypes; trivially separable.
Eigen::MatrixXd make_separable(int L, int D, int per_class, std::vector<int>& labels,
                               std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd protos(L, D);
    for (int l = 0; l < L; ++l) {
        for (int d = 0; d < D; ++d) protos(l, d) = rng.next_gaussian();
        protos.row(l).normalize();
    }
    Eigen::MatrixXd H(D, L * per_class);
    labels.assign(static_cast<std::size_t>(L) * per_class, 0);
    for (int i = 0; i < L * per_class; ++i) {
        int l = i % L;
        labels[i] = l;
        for (int d = 0; d < D; ++d) H(d, i) = protos(l, d) + 0.05 * rng.next_gaussian();
    }
    return H;
}

}  // namespace

TEST_CASE("cosine similarity basics") {
    Eigen::VectorXd a(2), b(2), c(2), z(2);
    a << 1, 0;
    b << 0, 1;
    c << 1, 1;
    z << 0, 0;
    CHECK(similarity(a, a) == doctest::Approx(1.0));
    CHECK(similarity(a, b) == doctest::Approx(0.0));
    CHECK(std::abs(similarity(c, a) - 0.70710678) < 1e-8);
    CHECK(similarity(z, a) == 0.0);
    CHECK(similarity(a, z) == 0.0);
    CHECK(similarity(z, z) == 0.0);

    Eigen::VectorXd d3(3);
    d3.setZero();
    CHECK_THROWS_AS(similarity(a, d3), invariant_error);

    // bounds on random pairs
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd u(8), v(8);
        for (int i = 0; i < 8; ++i) {
            u(i) = rng.next_gaussian();
            v(i) = rng.next_gaussian();
        }
        CHECK(std::abs(similarity(u, v)) <= 1.0 + 1e-9);
    }
}

TEST_CASE("model initialization") {
    ClassModel m = init_model(5, 512, 0.05);
    CHECK(m.n_classes() == 5);
    CHECK(m.dim() == 512);
    CHECK(m.classes.isZero(0.0));
    CHECK(m.effective_dim == 512);
    CHECK(m.eta == 0.05);

    CHECK_THROWS_AS(init_model(1, 512, 0.05), config_error);
    CHECK_THROWS_AS(init_model(5, 0, 0.05), config_error);
    CHECK_THROWS_AS(init_model(5, 512, 0.0), config_error);
    CHECK_THROWS_AS(init_model(5, 512, -0.1), config_error);
}

TEST_CASE("adaptive update leaves correct predictions alone") {
    ClassModel m = init_model(2, 2, 1.0);
    m.classes << 1, 0, 0, 1;
    Eigen::MatrixXd before = m.classes;
    Eigen::VectorXd h(2);
    h << 1, 0;
    CHECK_FALSE(adaptive_update(m, h, 0));
    CHECK(m.classes == before);
}

TEST_CASE("adaptive update hand trace with a zero true row") {
    ClassModel m = init_model(2, 2, 1.0);
    m.classes.row(1) << 1, 0;  // row 0 stays zero
    Eigen::VectorXd h(2);
    h << 1, 0;
    // delta_0 = 0 (zero norm), delta_1 = 1 -> predicted 1, true 0.
    // Row 0 gains 1*(1-0)*h; row 1 loses 1*(1-1)*h = nothing.
    CHECK(adaptive_update(m, h, 0));
    CHECK(m.classes(0, 0) == doctest::Approx(1.0));
    CHECK(m.classes(0, 1) == doctest::Approx(0.0));
    CHECK(m.classes(1, 0) == doctest::Approx(1.0));
    CHECK(m.classes(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("near-identical samples contribute almost nothing") {
    // delta for the true class = 0.999, another row wins outright
    const double delta = 0.999;
    ClassModel m = init_model(2, 4, 0.05);
    Eigen::VectorXd h(4);
    h << 2, 0, 0, 0;
    m.classes.row(0) << 3, 0, 0, 0;  // cosine 1, the winner
    m.classes.row(1) << delta, std::sqrt(1 - delta * delta), 0, 0;
    Eigen::MatrixXd before = m.classes;
    CHECK(adaptive_update(m, h, 1));
    double moved = (m.classes.row(1) - before.row(1)).norm();
    CHECK(moved <= m.eta * (1.0 - delta) * h.norm() + 1e-9);
    // winner had cosine exactly 1, so its penalty is exactly zero
    CHECK(m.classes.row(0) == before.row(0));
}

TEST_CASE("adaptive update rejects out-of-range labels") {
    ClassModel m = init_model(3, 4, 0.05);
    Eigen::VectorXd h(4);
    h.setOnes();
    CHECK_THROWS_AS(adaptive_update(m, h, 3), invariant_error);
    CHECK_THROWS_AS(adaptive_update(m, h, -1), invariant_error);
    Eigen::VectorXd bad(5);
    bad.setOnes();
    CHECK_THROWS_AS(adaptive_update(m, bad, 0), invariant_error);
}

TEST_CASE("update touches at most two rows") {
    Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        ClassModel m = init_model(5, 8, 0.05);
        for (int l = 0; l < 5; ++l)
            for (int d = 0; d < 8; ++d) m.classes(l, d) = rng.next_gaussian();
        Eigen::VectorXd h(8);
        for (int d = 0; d < 8; ++d) h(d) = rng.next_gaussian();
        Eigen::MatrixXd before = m.classes;
        adaptive_update(m, h, static_cast<int>(rng.next_u64() % 5));
        int changed = 0;
        for (int l = 0; l < 5; ++l)
            if (m.classes.row(l) != before.row(l)) ++changed;
        CHECK(changed <= 2);
    }
}

TEST_CASE("update magnitude shrinks as similarity grows") {
    const double eta = 0.05;
    Eigen::VectorXd h(4);
    h << 2, 0, 0, 0;
    double prev = 1e18;
    for (double delta : {-0.75, -0.25, 0.25, 0.75, 0.95}) {
        ClassModel m = init_model(2, 4, eta);
        m.classes.row(0) << 3, 0, 0, 0;  // cosine 1, always the winner
        m.classes.row(1) << delta, std::sqrt(1 - delta * delta), 0, 0;
        Eigen::MatrixXd before = m.classes;
        REQUIRE(adaptive_update(m, h, 1));
        double mag = (m.classes.row(1) - before.row(1)).norm();
        CHECK(mag == doctest::Approx(eta * (1.0 - delta) * h.norm()).epsilon(1e-12));
        CHECK(mag < prev);
        prev = mag;
    }
}

TEST_CASE("bundling an empty batch is a no-op") {
    ClassModel m = init_model(2, 4, 0.05);
    Eigen::MatrixXd H(4, 0);
    bundle_train(m, H, {});
    CHECK(m.classes.isZero(0.0));
}

TEST_CASE("bundling one sample seeds exactly the labeled row") {
    Eigen::VectorXd h(3);
    h << 0.5, -0.25, 1.0;

    ClassModel m = init_model(3, 3, 0.05);
    Eigen::MatrixXd H = h;
    bundle_train(m, H, {1});
    CHECK((m.classes.row(1).transpose() - 0.05 * h).norm() == doctest::Approx(0.0));
    CHECK(m.classes.row(0).isZero(0.0));
    CHECK(m.classes.row(2).isZero(0.0));

    // label 0: the tie-break winner is its own class, but a zero row has
    // learned nothing, so the update still fires
    ClassModel m0 = init_model(3, 3, 0.05);
    bundle_train(m0, H, {0});
    CHECK((m0.classes.row(0).transpose() - 0.05 * h).norm() == doctest::Approx(0.0));
    CHECK(m0.classes.row(1).isZero(0.0));
    CHECK(m0.classes.row(2).isZero(0.0));
}

TEST_CASE("bundle order changes the model but not separable accuracy") {
    std::vector<int> labels;
    Eigen::MatrixXd H = make_separable(4, 64, 25, labels, 1234);
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<int> order(labels.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_u64() % i]);
        Eigen::MatrixXd Hp(H.rows(), H.cols());
        std::vector<int> lp(labels.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            Hp.col(static_cast<Eigen::Index>(i)) = H.col(order[i]);
            lp[i] = labels[order[i]];
        }
        ClassModel m = init_model(4, 64, 0.05);
        bundle_train(m, Hp, lp);
        CHECK(accuracy(m, H, labels) >= 0.95);
    }
}

TEST_CASE("bundle reports the offending sample on a bad label") {
    ClassModel m = init_model(2, 3, 0.05);
    Eigen::MatrixXd H(3, 2);
    H.setOnes();
    try {
        bundle_train(m, H, {0, 5});
        FAIL("expected a label error");
    } catch (const invariant_error& e) {
        CHECK(std::string(e.what()).find("sample 1") != std::string::npos);
    }
}

TEST_CASE("sequential training matches a plain-loop reimplementation") {
    Rng rng(2024);
    for (int inst = 0; inst < 20; ++inst) {
        const int L = 2 + static_cast<int>(rng.next_u64() % 4);  // 2..5
        const int D = 2 + static_cast<int>(rng.next_u64() % 15);  // 2..16
        const int N = 30;
        Eigen::MatrixXd H(D, N);
        std::vector<int> labels(N);
        for (int j = 0; j < N; ++j) {
            labels[j] = static_cast<int>(rng.next_u64() % L);
            for (int d = 0; d < D; ++d) H(d, j) = rng.next_gaussian();
        }

        ClassModel m = init_model(L, D, 0.05);
        ScalarModel s;
        s.eta = 0.05;
        s.rows.assign(L, std::vector<double>(D, 0.0));

        bundle_train(m, H, labels);
        int scalar_misses = 0;
        for (int j = 0; j < N; ++j)
            if (scalar_update(s, col_to_vec(H, j), labels[j])) ++scalar_misses;

        double err = retrain_epoch(m, H, labels);
        int scalar_misses2 = 0;
        for (int j = 0; j < N; ++j)
            if (scalar_update(s, col_to_vec(H, j), labels[j])) ++scalar_misses2;
        CHECK(err == static_cast<double>(scalar_misses2) / N);

        for (int l = 0; l < L; ++l)
            for (int d = 0; d < D; ++d)
                CHECK(m.classes(l, d) == doctest::Approx(s.rows[l][d]).epsilon(1e-9));
    }
}

TEST_CASE("a perfectly classified set is a bit-identical fixed point") {
    std::vector<int> labels;
    Eigen::MatrixXd H = make_separable(3, 48, 30, labels, 55);
    ClassModel m = init_model(3, 48, 0.05);
    bundle_train(m, H, labels);
    double err = 1.0;
    for (int e = 0; e < 50 && err > 0.0; ++e) err = retrain_epoch(m, H, labels);
    REQUIRE(err == 0.0);
    Eigen::MatrixXd frozen = m.classes;
    CHECK(retrain_epoch(m, H, labels) == 0.0);
    CHECK(m.classes == frozen);
}

TEST_CASE("a zero model mispredicts everything") {
    ClassModel m = init_model(3, 8, 0.05);
    Eigen::MatrixXd H(8, 5);
    H.setOnes();
    ClassModel probe = m;
    double err = retrain_epoch(probe, H, {1, 2, 1, 0, 2});
    CHECK(err > 0.0);
}

TEST_CASE("normalization scales nonzero rows to unit length") {
    ClassModel m = init_model(3, 2, 0.05);
    m.classes.row(0) << 3, 4;
    m.classes.row(2) << 0.1, 0;
    ClassModel n = normalize_model(m);
    CHECK(n.classes(0, 0) == doctest::Approx(0.6));
    CHECK(n.classes(0, 1) == doctest::Approx(0.8));
    CHECK(n.classes.row(1).isZero(0.0));
    CHECK(n.classes(2, 0) == doctest::Approx(1.0));
    // source untouched, and the operation is idempotent
    CHECK(m.classes(0, 0) == 3.0);
    ClassModel nn = normalize_model(n);
    CHECK((nn.classes - n.classes).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(n.effective_dim == m.effective_dim);
}

TEST_CASE("prediction picks the most similar class") {
    ClassModel m = init_model(2, 2, 0.05);
    m.classes << 1, 0, 0, 1;
    Eigen::VectorXd h(2);
    h << 1, 0;
    Prediction p = predict(m, h);
    CHECK(p.class_index == 0);
    CHECK(p.scores(0) == doctest::Approx(1.0));
    CHECK(p.scores(1) == doctest::Approx(0.0));

    ClassModel zero = init_model(4, 2, 0.05);
    Prediction pz = predict(zero, h);
    CHECK(pz.class_index == 0);
    CHECK(pz.scores.isZero(0.0));

    Eigen::VectorXd bad(3);
    bad.setZero();
    CHECK_THROWS_AS(predict(m, bad), invariant_error);
}

TEST_CASE("prediction agrees with a scalar argmax oracle") {
    Rng rng(31337);
    ClassModel m = init_model(5, 16, 0.05);
    for (int l = 0; l < 5; ++l)
        for (int d = 0; d < 16; ++d) m.classes(l, d) = rng.next_gaussian();
    std::vector<double> row(16);
    for (int q = 0; q < 500; ++q) {
        Eigen::VectorXd h(16);
        std::vector<double> hv(16);
        for (int d = 0; d < 16; ++d) {
            h(d) = rng.next_gaussian();
            hv[d] = h(d);
        }
        int best = 0;
        double best_s = -2;
        for (int l = 0; l < 5; ++l) {
            for (int d = 0; d < 16; ++d) row[d] = m.classes(l, d);
            double s = scalar_cosine(hv, row);
            if (s > best_s) {
                best_s = s;
                best = l;
            }
        }
        CHECK(predict(m, h).class_index == best);
    }
}

TEST_CASE("prediction is scale invariant") {
    Rng rng(404);
    ClassModel m = init_model(4, 12, 0.05);
    for (int l = 0; l < 4; ++l)
        for (int d = 0; d < 12; ++d) m.classes(l, d) = rng.next_gaussian();
    for (int q = 0; q < 100; ++q) {
        Eigen::VectorXd h(12);
        for (int d = 0; d < 12; ++d) h(d) = rng.next_gaussian();
        int base = predict(m, h).class_index;
        for (double alpha : {0.5, 2.0, 3.7, 1e-3})
            CHECK(predict(m, alpha * h).class_index == base);
    }
}

TEST_CASE("batch similarity and prediction agree with the per-sample path") {
    Rng rng(808);
    ClassModel m = init_model(4, 32, 0.05);
    for (int l = 0; l < 4; ++l)
        for (int d = 0; d < 32; ++d) m.classes(l, d) = rng.next_gaussian();
    m.classes.row(2).setZero();  // exercise the zero-row guard
    Eigen::MatrixXd H(32, 60);
    for (int j = 0; j < 60; ++j)
        for (int d = 0; d < 32; ++d) H(d, j) = rng.next_gaussian();

    Eigen::MatrixXd S = similarity_batch(m, H);
    REQUIRE(S.rows() == 4);
    REQUIRE(S.cols() == 60);
    std::vector<int> preds = predict_batch(m, H);
    for (int j = 0; j < 60; ++j) {
        Prediction p = predict(m, H.col(j));
        for (int l = 0; l < 4; ++l) CHECK(std::abs(S(l, j) - p.scores(l)) <= 1e-6);
        CHECK(preds[static_cast<std::size_t>(j)] == p.class_index);
    }
}

TEST_CASE("accuracy is an exact recount of per-sample predictions") {
    std::vector<int> labels;
    Eigen::MatrixXd H = make_separable(3, 32, 20, labels, 909);
    ClassModel m = init_model(3, 32, 0.05);
    bundle_train(m, H, labels);

    int correct = 0;
    for (Eigen::Index j = 0; j < H.cols(); ++j)
        if (predict(m, H.col(j)).class_index == labels[static_cast<std::size_t>(j)]) ++correct;
    CHECK(accuracy(m, H, labels) == static_cast<double>(correct) / static_cast<double>(H.cols()));

    // adversarial labels on a separable set cannot all be right
    std::vector<int> wrong = labels;
    for (auto& l : wrong) l = (l + 1) % 3;
    CHECK(accuracy(m, H, wrong) < 1.0);

    Eigen::MatrixXd empty(32, 0);
    CHECK_THROWS_AS(accuracy(m, empty, {}), invariant_error);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
    Eigen::VectorXd v(4);
    v << 1.0, 3.0, 3.0, 2.0;
    CHECK(argmax_lowest(v) == 1);
    v << 5.0, 5.0, 5.0, 5.0;
    CHECK(argmax_lowest(v) == 0);
    v << -1.0, -3.0, -0.5, -0.5;
    CHECK(argmax_lowest(v) == 2);
}

TEST_CASE("model checkpoint round-trips bit-exactly") {
    Rng rng(606);
    ClassModel m = init_model(3, 24, 0.07);
    for (int l = 0; l < 3; ++l)
        for (int d = 0; d < 24; ++d) m.classes(l, d) = rng.next_gaussian();
    m.effective_dim = 96;

    auto dir = std::filesystem::current_path() / "test_tmp";
    std::filesystem::create_directories(dir);
    auto path = (dir / "model_roundtrip.bin").string();
    save_model(path, m);
    ClassModel back = load_model(path);
    CHECK(back.classes == m.classes);
    CHECK(back.eta == m.eta);
    CHECK(back.effective_dim == 96);

    auto junk = (dir / "model_junk.bin").string();
    std::ofstream(junk) << "nope";
    CHECK_THROWS_AS(load_model(junk), data_error);
}

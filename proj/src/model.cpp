#include "regenhd/model.hpp"

#include <cmath>

#include "regenhd/errors.hpp"
#include "regenhd/serialize.hpp"

namespace regenhd {

namespace {

constexpr std::uint64_t kModelMagic = 0x314c444d44484752ULL;  // "RGHDMDL1"

void check_labels(const ClassModel& model, const Eigen::MatrixXd& H,
                  const std::vector<int>& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != H.cols())
        throw invariant_error("label count does not match sample count");
    for (std::size_t j = 0; j < labels.size(); ++j)
        if (labels[j] < 0 || labels[j] >= model.n_classes())
            throw invariant_error("label " + std::to_string(labels[j]) +
                                  " out of range at sample " + std::to_string(j));
    if (H.rows() != model.dim())
        throw invariant_error("encoded dimension " + std::to_string(H.rows()) +
                              " does not match model dimension " + std::to_string(model.dim()));
}

// Core update step against cached row norms. Returns true when the sample
// counted as mispredicted; refreshes the norms of any rows it touched.
bool update_with_norms(ClassModel& model, const Eigen::VectorXd& h, double h_norm, int label,
                       Eigen::VectorXd& row_norms) {
    const Eigen::Index L = model.n_classes();
    Eigen::VectorXd scores = model.classes * h;
    Eigen::VectorXd sims(L);
    for (Eigen::Index l = 0; l < L; ++l) {
        double denom = row_norms(l) * h_norm;
        sims(l) = denom > 0.0 ? scores(l) / denom : 0.0;
    }
    const int winner = argmax_lowest(sims);
    const bool wrong = winner != label || row_norms(label) == 0.0;
    if (!wrong) return false;

    model.classes.row(label) += model.eta * (1.0 - sims(label)) * h.transpose();
    row_norms(label) = model.classes.row(label).norm();
    if (winner != label && row_norms(winner) > 0.0) {
        model.classes.row(winner) -= model.eta * (1.0 - sims(winner)) * h.transpose();
        row_norms(winner) = model.classes.row(winner).norm();
    }
    return true;
}

}  // namespace

int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = static_cast<int>(i);
    return best;
}

double similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size())
        throw invariant_error("similarity: size mismatch");
    double na = a.norm();
    double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

ClassModel init_model(int n_classes, int dim, double eta) {
    if (n_classes < 2) throw config_error("model needs at least two classes");
    if (dim < 1) throw config_error("model dimension must be >= 1");
    if (!(eta > 0.0)) throw config_error("learning rate must be > 0");
    ClassModel model;
    model.classes = Eigen::MatrixXd::Zero(n_classes, dim);
    model.eta = eta;
    model.effective_dim = dim;
    return model;
}

bool adaptive_update(ClassModel& model, const Eigen::VectorXd& h, int label) {
    if (h.size() != model.dim())
        throw invariant_error("adaptive_update: hypervector dimension mismatch");
    if (label < 0 || label >= model.n_classes())
        throw invariant_error("adaptive_update: label out of range");
    Eigen::VectorXd row_norms(model.n_classes());
    for (Eigen::Index l = 0; l < model.n_classes(); ++l)
        row_norms(l) = model.classes.row(l).norm();
    return update_with_norms(model, h, h.norm(), label, row_norms);
}

void bundle_train(ClassModel& model, const Eigen::MatrixXd& H, const std::vector<int>& labels) {
    check_labels(model, H, labels);
    Eigen::VectorXd row_norms(model.n_classes());
    for (Eigen::Index l = 0; l < model.n_classes(); ++l)
        row_norms(l) = model.classes.row(l).norm();
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
        Eigen::VectorXd h = H.col(j);
        update_with_norms(model, h, h.norm(), labels[static_cast<std::size_t>(j)], row_norms);
    }
}

double retrain_epoch(ClassModel& model, const Eigen::MatrixXd& H, const std::vector<int>& labels) {
    check_labels(model, H, labels);
    if (H.cols() == 0) return 0.0;

    Eigen::VectorXd row_norms(model.n_classes());
    for (Eigen::Index l = 0; l < model.n_classes(); ++l)
        row_norms(l) = model.classes.row(l).norm();

    std::int64_t errors = 0;
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
        Eigen::VectorXd h = H.col(j);
        if (update_with_norms(model, h, h.norm(), labels[static_cast<std::size_t>(j)], row_norms))
            ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(H.cols());
}

ClassModel normalize_model(const ClassModel& model) {
    ClassModel out = model;
    for (Eigen::Index l = 0; l < out.n_classes(); ++l) {
        double n = out.classes.row(l).norm();
        if (n > 0.0) out.classes.row(l) /= n;
    }
    return out;
}

Prediction predict(const ClassModel& model, const Eigen::VectorXd& h) {
    if (h.size() != model.dim())
        throw invariant_error("predict: hypervector dimension mismatch");
    Prediction p;
    p.scores.resize(model.n_classes());
    for (Eigen::Index l = 0; l < model.n_classes(); ++l)
        p.scores(l) = similarity(model.classes.row(l).transpose(), h);
    p.class_index = argmax_lowest(p.scores);
    return p;
}

Eigen::MatrixXd similarity_batch(const ClassModel& model, const Eigen::MatrixXd& H) {
    if (H.rows() != model.dim())
        throw invariant_error("similarity_batch: dimension mismatch");
    Eigen::VectorXd row_norms(model.n_classes());
    for (Eigen::Index l = 0; l < model.n_classes(); ++l)
        row_norms(l) = model.classes.row(l).norm();
    Eigen::VectorXd col_norms = H.colwise().norm();

    Eigen::MatrixXd sims = model.classes * H;  // L x N of raw dot products
    for (Eigen::Index l = 0; l < sims.rows(); ++l) {
        for (Eigen::Index j = 0; j < sims.cols(); ++j) {
            double denom = row_norms(l) * col_norms(j);
            sims(l, j) = denom > 0.0 ? sims(l, j) / denom : 0.0;
        }
    }
    return sims;
}

std::vector<int> predict_batch(const ClassModel& model, const Eigen::MatrixXd& H) {
    Eigen::MatrixXd sims = similarity_batch(model, H);
    std::vector<int> out(static_cast<std::size_t>(H.cols()));
    for (Eigen::Index j = 0; j < sims.cols(); ++j)
        out[static_cast<std::size_t>(j)] = argmax_lowest(sims.col(j));
    return out;
}

double accuracy(const ClassModel& model, const Eigen::MatrixXd& H, const std::vector<int>& labels) {
    check_labels(model, H, labels);
    if (H.cols() == 0) throw invariant_error("accuracy over empty sample set");
    std::int64_t hits = 0;
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
        Prediction p = predict(model, H.col(j));
        if (p.class_index == labels[static_cast<std::size_t>(j)]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(H.cols());
}

void save_model(const std::string& path, const ClassModel& model) {
    BinWriter w(path);
    w.u64(kModelMagic);
    w.u32(1);
    w.i64(model.n_classes());
    w.i64(model.dim());
    w.f64(model.eta);
    w.i64(model.effective_dim);
    for (Eigen::Index l = 0; l < model.n_classes(); ++l)
        for (Eigen::Index d = 0; d < model.dim(); ++d) w.f64(model.classes(l, d));
    w.finish();
}

ClassModel load_model(const std::string& path) {
    BinReader r(path);
    if (r.u64() != kModelMagic) throw data_error("not a model file: " + path);
    if (r.u32() != 1) throw data_error("unsupported model format version: " + path);
    std::int64_t L = r.i64();
    std::int64_t D = r.i64();
    if (L < 1 || D < 1 || L > (1LL << 24) || D > (1LL << 32))
        throw data_error("corrupt model header: " + path);
    ClassModel model;
    model.classes.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(D));
    model.eta = r.f64();
    model.effective_dim = r.i64();
    for (Eigen::Index l = 0; l < model.n_classes(); ++l)
        for (Eigen::Index d = 0; d < model.dim(); ++d) model.classes(l, d) = r.f64();
    return model;
}

}  // namespace regenhd

#include "regenhd/regen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regenhd/costs.hpp"
#include "regenhd/errors.hpp"

namespace regenhd {

Eigen::VectorXd dimension_variance(const ClassModel& model) {
    ClassModel normed = normalize_model(model);
    const Eigen::Index L = normed.n_classes();
    const Eigen::Index D = normed.dim();
    Eigen::VectorXd var(D);
    for (Eigen::Index d = 0; d < D; ++d) {
        double mean = normed.classes.col(d).mean();
        double acc = 0.0;
        for (Eigen::Index l = 0; l < L; ++l) {
            double diff = normed.classes(l, d) - mean;
            acc += diff * diff;
        }
        var(d) = acc / static_cast<double>(L);
    }
    return var;
}

std::vector<int> select_drop(const Eigen::VectorXd& variance, double regen_rate) {
    if (!(regen_rate > 0.0 && regen_rate < 1.0))
        throw config_error("regeneration rate must be in (0, 1)");
    const auto D = static_cast<std::size_t>(variance.size());
    const auto k = static_cast<std::size_t>(
        std::floor(regen_rate * static_cast<double>(D) + 1e-9));
    if (k == 0)
        throw config_error("regeneration rate selects zero dimensions at this size");

    std::vector<int> order(D);
    std::iota(order.begin(), order.end(), 0);
    // stable sort keeps equal-variance dims in index order
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return variance(a) < variance(b); });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

void zero_dims(ClassModel& model, const std::vector<int>& dims) {
    for (int d : dims) {
        if (d < 0 || d >= model.dim())
            throw invariant_error("zero_dims: column " + std::to_string(d) + " out of range");
        model.classes.col(d).setZero();
    }
}

CycleOutcome run_cycle(ClassModel& model, EncoderState& enc, const Eigen::MatrixXd& X,
                       const std::vector<int>& labels, const RegenSchedule& schedule,
                       Eigen::MatrixXd* H, bool partial_reencode) {
    if (model.dim() != enc.dim())
        throw invariant_error("run_cycle: model and encoder dimension mismatch");
    if (schedule.epochs_per_cycle < 1)
        throw config_error("epochs per cycle must be >= 1");

    CycleOutcome out;
    Eigen::VectorXd var = dimension_variance(model);
    out.dropped = select_drop(var, schedule.regen_rate);

    regenerate_dims(enc, out.dropped);
    zero_dims(model, out.dropped);
    model.effective_dim += static_cast<std::int64_t>(out.dropped.size());

    Eigen::MatrixXd local;
    Eigen::MatrixXd* Hp = H;
    if (Hp == nullptr) {
        local = encode_batch(X, enc);
        Hp = &local;
    } else if (partial_reencode) {
        for (int d : out.dropped) {
            Eigen::RowVectorXd row = enc.base.row(d) * X;
            row.array() += enc.phase(d);
            Hp->row(d) = row.array().cos();
        }
    } else {
        *Hp = encode_batch(X, enc);
    }

    out.train_errors.reserve(static_cast<std::size_t>(schedule.epochs_per_cycle));
    for (int e = 0; e < schedule.epochs_per_cycle; ++e)
        out.train_errors.push_back(retrain_epoch(model, *Hp, labels));
    return out;
}

FitResult fit(const Eigen::MatrixXd& X_train, const std::vector<int>& y_train, int n_classes,
              const Eigen::MatrixXd& X_test, const std::vector<int>& y_test,
              const FitOptions& opts) {
    if (static_cast<Eigen::Index>(y_train.size()) != X_train.cols())
        throw invariant_error("fit: train label count mismatch");
    if (static_cast<Eigen::Index>(y_test.size()) != X_test.cols())
        throw invariant_error("fit: test label count mismatch");
    if (X_train.cols() == 0) throw data_error("fit: empty training set");
    if (opts.schedule.cycles < 0) throw config_error("cycle count must be >= 0");

    const auto N = X_train.cols();
    const auto n = X_train.rows();
    const int init_epochs = opts.initial_epochs;
    if (init_epochs < 0) throw config_error("initial epoch count must be >= 0");
    const bool has_test = X_test.cols() > 0;

    FitResult res;
    res.enc = new_encoder(static_cast<int>(n), opts.dim, opts.sigma, opts.enc_seed);
    Eigen::MatrixXd H = encode_batch(X_train, res.enc);
    res.model = init_model(n_classes, opts.dim, opts.schedule.eta);
    bundle_train(res.model, H, y_train);

    FitReport& rep = res.report;
    rep.dim = opts.dim;
    rep.n_features = static_cast<int>(n);
    rep.n_classes = n_classes;
    rep.sigma = opts.sigma;
    rep.eta = opts.schedule.eta;
    rep.regen_rate = opts.schedule.regen_rate;
    rep.cycles_requested = opts.schedule.cycles;
    rep.epochs_per_cycle = opts.schedule.epochs_per_cycle;
    rep.initial_epochs = init_epochs;

    // the bundle pass is a full adaptive sweep, so it costs one epoch
    std::int64_t macs = encode_macs(N, opts.dim, n) + epoch_macs(N, n_classes, opts.dim);
    for (int e = 0; e < init_epochs; ++e) {
        rep.initial_train_errors.push_back(retrain_epoch(res.model, H, y_train));
        macs += epoch_macs(N, n_classes, opts.dim);
    }

    double last_test = -1.0;
    if (has_test) {
        last_test = accuracy(res.model, encode_batch(X_test, res.enc), y_test);
        rep.initial_test_accuracy = last_test;
    }

    for (int c = 1; c <= opts.schedule.cycles; ++c) {
        CycleRecord record;
        record.cycle = c;
        record.pre_test_accuracy = last_test;

        CycleOutcome outcome =
            run_cycle(res.model, res.enc, X_train, y_train, opts.schedule, &H,
                      opts.partial_reencode);
        macs += opts.partial_reencode
                    ? encode_macs(N, static_cast<std::int64_t>(outcome.dropped.size()), n)
                    : encode_macs(N, opts.dim, n);
        macs += static_cast<std::int64_t>(opts.schedule.epochs_per_cycle) *
                epoch_macs(N, n_classes, opts.dim);

        record.dropped = std::move(outcome.dropped);
        record.train_errors = std::move(outcome.train_errors);
        if (has_test)
            last_test = accuracy(res.model, encode_batch(X_test, res.enc), y_test);
        record.post_test_accuracy = last_test;
        record.effective_dim = res.model.effective_dim;
        rep.cycles.push_back(std::move(record));

        if (opts.plateau_stop && has_test && rep.cycles.size() >= 4) {
            double recent = rep.cycles.back().post_test_accuracy;
            double old = rep.cycles[rep.cycles.size() - 4].post_test_accuracy;
            if (recent - old < 1e-4) {
                rep.stopped_early = true;
                break;
            }
        }
    }

    rep.final_train_error = -1.0;
    if (!rep.cycles.empty() && !rep.cycles.back().train_errors.empty())
        rep.final_train_error = rep.cycles.back().train_errors.back();
    else if (!rep.initial_train_errors.empty())
        rep.final_train_error = rep.initial_train_errors.back();

    rep.final_test_accuracy = last_test;
    rep.effective_dim = res.model.effective_dim;
    rep.train_mac_ops = macs;
    rep.total_epochs =
        init_epochs + static_cast<int>(rep.cycles.size()) * opts.schedule.epochs_per_cycle;
    return res;
}

FitResult fit_static(const Eigen::MatrixXd& X_train, const std::vector<int>& y_train,
                     int n_classes, const Eigen::MatrixXd& X_test,
                     const std::vector<int>& y_test, int dim, double sigma,
                     std::uint64_t enc_seed, double eta, int epochs) {
    FitOptions opts;
    opts.dim = dim;
    opts.sigma = sigma;
    opts.enc_seed = enc_seed;
    opts.schedule = RegenSchedule{0.10, 0, 1, eta};
    opts.initial_epochs = epochs;
    return fit(X_train, y_train, n_classes, X_test, y_test, opts);
}

}  // namespace regenhd

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "regenhd/costs.hpp"
#include "regenhd/dataset.hpp"
#include "regenhd/encoder.hpp"
#include "regenhd/errors.hpp"
#include "regenhd/faults.hpp"
#include "regenhd/fmt.hpp"
#include "regenhd/model.hpp"
#include "regenhd/quantize.hpp"
#include "regenhd/regen.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace regenhd;

namespace {

struct DataFlags {
    std::string data_path;
    std::string test_path;
    std::string label_map_path;
    std::string schema_path;
    double test_fraction = 0.0;  // 0 = no held-out split
    std::uint64_t split_seed = 7;
    int label_col = -1;
    std::vector<int> ignore_cols;
    bool binary_labels = false;
    std::string normal_label = "normal";

    bool synth = false;
    int synth_features = 16;
    int synth_classes = 5;
    int synth_per_class = 500;
    int synth_clusters = 1;
    double synth_sep = 1.0;
    double synth_noise = 0.1;
    std::uint64_t synth_seed = 77;
};

struct TrainFlags {
    int dim = 512;
    double sigma = 1.0;
    std::uint64_t enc_seed = 1;
    double eta = 0.05;
    double rate = 0.10;
    int cycles = 20;
    int epochs = 1;  // retrain epochs per regeneration cycle
    int initial_epochs = 0;
    bool plateau_stop = false;
    bool partial_reencode = false;
};

struct LoadedData {
    Eigen::MatrixXd X_train, X_test;
    std::vector<int> y_train, y_test;
    std::vector<std::string> class_names;
    int n_classes = 0;
    bool has_schema = false;
    Schema schema;

    bool has_test() const { return X_test.cols() > 0; }
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool allow_schema) {
    cmd->add_option("--data", f.data_path, "CSV dataset (last column = label unless --label-col)");
    cmd->add_option("--test-data", f.test_path, "separate CSV evaluated with the training schema");
    cmd->add_option("--test-fraction", f.test_fraction,
                    "hold out this fraction of --data (0 disables the split)")
        ->capture_default_str();
    cmd->add_option("--split-seed", f.split_seed, "seed for the held-out split shuffle")
        ->capture_default_str();
    cmd->add_option("--label-col", f.label_col, "label column index, -1 = last")
        ->capture_default_str();
    cmd->add_option("--ignore-cols", f.ignore_cols, "column indices to drop")
        ->delimiter(',');
    cmd->add_option("--label-map", f.label_map_path, "CSV mapping raw labels to groups");
    cmd->add_flag("--binary-labels", f.binary_labels, "collapse labels to normal vs attack");
    cmd->add_option("--normal-label", f.normal_label, "label treated as normal in binary mode")
        ->capture_default_str();
    if (allow_schema)
        cmd->add_option("--schema", f.schema_path,
                        "schema.json from a training run (reuses its exact feature layout)");

    cmd->add_flag("--synth", f.synth, "generate gaussian-blob data instead of reading a CSV");
    cmd->add_option("--synth-features", f.synth_features, "synthetic feature count")
        ->capture_default_str();
    cmd->add_option("--synth-classes", f.synth_classes, "synthetic class count")
        ->capture_default_str();
    cmd->add_option("--synth-per-class", f.synth_per_class, "synthetic samples per class")
        ->capture_default_str();
    cmd->add_option("--synth-sep", f.synth_sep, "distance of cluster means from the cube center")
        ->capture_default_str();
    cmd->add_option("--synth-clusters", f.synth_clusters, "clusters per synthetic class")
        ->capture_default_str();
    cmd->add_option("--synth-noise", f.synth_noise, "per-coordinate noise std")
        ->capture_default_str();
    cmd->add_option("--synth-seed", f.synth_seed, "synthetic data seed")->capture_default_str();
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--dim", f.dim, "physical hypervector dimension")->capture_default_str();
    cmd->add_option("--sigma", f.sigma, "projection bandwidth")->capture_default_str();
    cmd->add_option("--enc-seed", f.enc_seed, "encoder seed")->capture_default_str();
    cmd->add_option("--eta", f.eta, "learning rate")->capture_default_str();
    cmd->add_option("--rate", f.rate, "fraction of dimensions regenerated per cycle")
        ->capture_default_str();
    cmd->add_option("--cycles", f.cycles, "regeneration cycles (0 = static baseline)")
        ->capture_default_str();
    cmd->add_option("--epochs", f.epochs, "retrain epochs per cycle")->capture_default_str();
    cmd->add_option("--initial-epochs", f.initial_epochs, "retrain epochs before cycling")
        ->capture_default_str();
    cmd->add_flag("--plateau-stop", f.plateau_stop,
                  "stop cycling once test accuracy stops improving");
    cmd->add_flag("--partial-reencode", f.partial_reencode,
                  "recompute only regenerated rows when re-encoding");
}

CLI::Option* add_out_flag(CLI::App* cmd, std::string& out_dir) {
    return cmd->add_option("--out", out_dir, "output directory")
        ->envname("REGENHD_OUT")
        ->capture_default_str();
}

void add_threads_flag(CLI::App* cmd, int& threads) {
    cmd->add_option("--threads", threads, "cap worker threads (0 = library default)")
        ->capture_default_str();
}

void apply_threads(int threads) {
    if (threads > 0) Eigen::setNbThreads(threads);
}

LoadedData load_data(const DataFlags& f) {
    LoadedData out;
    if (f.synth) {
        if (!f.data_path.empty())
            throw config_error("--data and --synth are mutually exclusive");
        if (!f.test_path.empty())
            throw config_error("--test-data applies to CSV input, not --synth");
        auto all = synth_gaussian(f.synth_features, f.synth_classes, f.synth_per_class,
                                  f.synth_sep, f.synth_seed, f.synth_clusters, f.synth_noise);
        out.n_classes = f.synth_classes;
        for (int l = 0; l < f.synth_classes; ++l) out.class_names.push_back(std::to_string(l));
        if (f.test_fraction > 0.0) {
            auto [tr, te] = split(all, f.test_fraction, f.split_seed);
            if (tr.empty() || te.empty()) throw data_error("split produced an empty half");
            std::tie(out.X_train, out.y_train) = to_matrix(tr);
            std::tie(out.X_test, out.y_test) = to_matrix(te);
        } else {
            std::tie(out.X_train, out.y_train) = to_matrix(all);
            out.X_test.resize(out.X_train.rows(), 0);
        }
        return out;
    }

    if (f.data_path.empty()) throw config_error("need --data or --synth");
    Table table = load_csv(f.data_path);
    if (!f.schema_path.empty()) {
        out.schema = load_schema(f.schema_path);
    } else {
        SchemaOptions so;
        so.label_col = f.label_col;
        so.ignore_cols = f.ignore_cols;
        if (!f.label_map_path.empty()) so.label_map = load_label_map(f.label_map_path);
        so.binary_labels = f.binary_labels;
        so.normal_label = f.normal_label;
        out.schema = fit_schema(table, so);
    }
    out.has_schema = true;
    out.n_classes = out.schema.n_classes();
    out.class_names = out.schema.labels;

    auto train_vecs = vectorize(table, out.schema);
    if (!f.test_path.empty()) {
        if (f.test_fraction > 0.0)
            throw config_error("--test-data and --test-fraction are mutually exclusive");
        Table tt = load_csv(f.test_path);
        auto test_vecs = vectorize(tt, out.schema);
        if (test_vecs.empty()) throw data_error("test file has no rows: " + f.test_path);
        std::tie(out.X_train, out.y_train) = to_matrix(train_vecs);
        std::tie(out.X_test, out.y_test) = to_matrix(test_vecs);
    } else if (f.test_fraction > 0.0) {
        auto [tr, te] = split(train_vecs, f.test_fraction, f.split_seed);
        if (tr.empty() || te.empty()) throw data_error("split produced an empty half");
        std::tie(out.X_train, out.y_train) = to_matrix(tr);
        std::tie(out.X_test, out.y_test) = to_matrix(te);
    } else {
        std::tie(out.X_train, out.y_train) = to_matrix(train_vecs);
        out.X_test.resize(out.X_train.rows(), 0);
    }
    return out;
}

fs::path ensure_out_dir(const std::string& out_dir) {
    fs::path p = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw data_error("cannot create output directory: " + p.string());
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw data_error("write failed: " + path.string());
}

void write_snapshot(CLI::App* sub, const fs::path& out) {
    // drop entries that only say "unset" (empty strings, empty lists); they
    // carry no information and the INI reader chokes on the "{}" form
    std::istringstream raw(sub->config_to_str(true, false));
    std::string line, kept;
    while (std::getline(raw, line)) {
        auto eq = line.find('=');
        if (eq != std::string::npos) {
            std::string v = line.substr(eq + 1);
            if (v == "\"\"" || v == "\"{}\"") continue;
        }
        kept += line;
        kept += '\n';
    }
    write_text(out / "config_snapshot.ini", kept);
}

// Config files fill in whatever the command line left untouched. CLI11 only
// processes config files on the root app, so the file is applied to the
// subcommand here, after the regular parse.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw data_error("cannot open config file: " + path);
    // a key this command does not know is an error, not a no-op; silently
    // ignoring it would let a typo (or a snapshot from a different
    // subcommand) run with defaults
    sub->allow_config_extras(CLI::config_extras_mode::error);
    try {
        sub->parse_from_stream(in);
    } catch (const CLI::Error& e) {
        throw config_error("bad config file " + path + ": " + e.what());
    }
}

void add_config_flag(CLI::App* cmd, std::string& path) {
    cmd->add_option("--config", path, "apply a config snapshot, flags given here win")
        ->configurable(false);
}

json regen_report_json(const FitReport& rep) {
    json arr = json::array();
    for (const auto& c : rep.cycles) {
        json jc;
        jc["cycle"] = c.cycle;
        jc["dropped"] = c.dropped;
        jc["train_error"] = c.train_errors;
        if (c.post_test_accuracy >= 0.0) jc["test_accuracy"] = c.post_test_accuracy;
        jc["effective_dim"] = c.effective_dim;
        arr.push_back(std::move(jc));
    }
    json report;
    report["schema_version"] = 1;
    report["effective_dim"] = rep.effective_dim;
    report["cycles"] = std::move(arr);
    return report;
}

struct AnyModel {
    bool quantized = false;
    ClassModel fm;
    QuantizedModel qm;

    Eigen::Index dim() const { return quantized ? qm.dim() : fm.dim(); }
    int n_classes() const {
        return quantized ? qm.n_classes() : static_cast<int>(fm.n_classes());
    }
};

AnyModel load_any_model(const std::string& path) {
    try {
        AnyModel a;
        a.fm = load_model(path);
        return a;
    } catch (const data_error&) {
    }
    try {
        AnyModel a;
        a.quantized = true;
        a.qm = load_quantized(path);
        return a;
    } catch (const data_error&) {
        throw data_error("not a model checkpoint: " + path);
    }
}

void check_compatible(const AnyModel& m, const EncoderState& enc, Eigen::Index n_features) {
    if (m.dim() != enc.dim())
        throw data_error("model dimension " + std::to_string(m.dim()) +
                         " does not match encoder dimension " + std::to_string(enc.dim()));
    if (enc.base.cols() != n_features)
        throw data_error("encoder expects " + std::to_string(enc.base.cols()) +
                         " features, data has " + std::to_string(n_features));
}

// The command evaluates on the held-out set when one exists, otherwise on the
// full --data contents.
const Eigen::MatrixXd& eval_matrix(const LoadedData& d) {
    return d.has_test() ? d.X_test : d.X_train;
}
const std::vector<int>& eval_labels(const LoadedData& d) {
    return d.has_test() ? d.y_test : d.y_train;
}

std::uint64_t fnv_mix(std::uint64_t h, const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 1099511628211ULL;
    return h;
}

std::string split_hash(const LoadedData& d) {
    std::uint64_t h = 1469598103934665603ULL;
    std::int64_t shape[4] = {d.X_train.rows(), d.X_train.cols(), d.X_test.rows(),
                             d.X_test.cols()};
    h = fnv_mix(h, shape, sizeof shape);
    h = fnv_mix(h, d.X_train.data(), sizeof(double) * static_cast<std::size_t>(d.X_train.size()));
    h = fnv_mix(h, d.X_test.data(), sizeof(double) * static_cast<std::size_t>(d.X_test.size()));
    h = fnv_mix(h, d.y_train.data(), sizeof(int) * d.y_train.size());
    h = fnv_mix(h, d.y_test.data(), sizeof(int) * d.y_test.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FitOptions to_fit_options(const TrainFlags& tf) {
    FitOptions opts;
    opts.dim = tf.dim;
    opts.sigma = tf.sigma;
    opts.enc_seed = tf.enc_seed;
    opts.schedule = RegenSchedule{tf.rate, tf.cycles, tf.epochs, tf.eta};
    opts.initial_epochs = tf.initial_epochs;
    opts.plateau_stop = tf.plateau_stop;
    opts.partial_reencode = tf.partial_reencode;
    return opts;
}

int cmd_train(const DataFlags& df, const TrainFlags& tf, const std::string& out_dir,
              CLI::App* sub) {
    fs::path out = ensure_out_dir(out_dir);
    LoadedData data = load_data(df);
    if (data.n_classes < 2) throw data_error("training needs at least 2 classes");

    auto t0 = std::chrono::steady_clock::now();
    FitResult res = fit(data.X_train, data.y_train, data.n_classes, data.X_test, data.y_test,
                        to_fit_options(tf));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double final_acc = res.report.final_test_accuracy;
    if (final_acc < 0.0)
        final_acc = accuracy(res.model, encode_batch(data.X_train, res.enc), data.y_train);

    save_encoder((out / "encoder.bin").string(), res.enc);
    save_model((out / "model.bin").string(), res.model);
    if (data.has_schema) save_schema((out / "schema.json").string(), data.schema);
    write_text(out / "regen_report.json", regen_report_json(res.report).dump(2) + "\n");

    json metrics;
    metrics["schema_version"] = 1;
    metrics["train_time_s"] = secs;
    metrics["mac_ops"] = res.report.train_mac_ops;
    metrics["final_accuracy"] = final_acc;
    metrics["effective_dim"] = res.report.effective_dim;
    write_text(out / "metrics.json", metrics.dump(2) + "\n");
    write_snapshot(sub, out);

    std::cout << "dim=" << tf.dim << " effective_dim=" << res.report.effective_dim
              << " cycles_run=" << res.report.cycles.size()
              << " final_accuracy=" << fmt_double(final_acc)
              << " mac_ops=" << res.report.train_mac_ops << "\n";
    return 0;
}

void require_checkpoints(const std::string& model_path, const std::string& enc_path) {
    if (model_path.empty()) throw config_error("need --model");
    if (enc_path.empty()) throw config_error("need --encoder");
}

int cmd_eval(const std::string& model_path, const std::string& enc_path, const DataFlags& df,
             const std::string& out_dir, CLI::App* sub) {
    require_checkpoints(model_path, enc_path);
    fs::path out = ensure_out_dir(out_dir);
    AnyModel m = load_any_model(model_path);
    EncoderState enc = load_encoder(enc_path);
    LoadedData data = load_data(df);
    check_compatible(m, enc, data.X_train.rows());

    const Eigen::MatrixXd& X = eval_matrix(data);
    const std::vector<int>& y = eval_labels(data);
    if (X.cols() == 0) throw data_error("evaluation set is empty");

    const int L = m.n_classes();
    for (std::size_t j = 0; j < y.size(); ++j)
        if (y[j] < 0 || y[j] >= L)
            throw data_error("sample " + std::to_string(j) + " has label " +
                             std::to_string(y[j]) + " outside the model's " +
                             std::to_string(L) + " classes");

    Eigen::MatrixXd H = encode_batch(X, enc);
    std::vector<std::vector<std::int64_t>> confusion(
        static_cast<std::size_t>(L), std::vector<std::int64_t>(static_cast<std::size_t>(L), 0));
    std::int64_t hits = 0;
    if (m.quantized) {
        auto queries = quantize_queries(H, m.qm.bitwidth);
        for (std::size_t j = 0; j < queries.size(); ++j) {
            int pred = predict_q(m.qm, queries[j]).class_index;
            ++confusion[static_cast<std::size_t>(y[j])][static_cast<std::size_t>(pred)];
            if (pred == y[j]) ++hits;
        }
    } else {
        for (Eigen::Index j = 0; j < H.cols(); ++j) {
            int pred = predict(m.fm, H.col(j)).class_index;
            auto t = static_cast<std::size_t>(y[static_cast<std::size_t>(j)]);
            ++confusion[t][static_cast<std::size_t>(pred)];
            if (pred == y[static_cast<std::size_t>(j)]) ++hits;
        }
    }
    double acc = static_cast<double>(hits) / static_cast<double>(X.cols());

    json report;
    report["schema_version"] = 1;
    report["accuracy"] = acc;
    report["n_samples"] = static_cast<std::int64_t>(X.cols());
    report["model_type"] = m.quantized ? "quantized" : "float";
    if (m.quantized) report["bitwidth"] = m.qm.bitwidth;
    if (static_cast<int>(data.class_names.size()) == L) report["labels"] = data.class_names;
    report["confusion"] = confusion;
    write_text(out / "eval.json", report.dump(2) + "\n");
    write_snapshot(sub, out);

    std::cout << "accuracy=" << fmt_double(acc) << " n=" << X.cols() << "\n";
    for (int t = 0; t < L; ++t) {
        std::cout << "confusion[" << t << "]";
        for (int p = 0; p < L; ++p)
            std::cout << " " << confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
        std::cout << "\n";
    }
    return 0;
}

int cmd_compare(const DataFlags& df, const TrainFlags& tf, const std::string& out_dir,
                CLI::App* sub) {
    fs::path out = ensure_out_dir(out_dir);
    LoadedData data = load_data(df);
    if (data.n_classes < 2) throw data_error("training needs at least 2 classes");
    if (!data.has_test())
        throw config_error("compare needs a test set (--test-data or --test-fraction)");

    if (tf.plateau_stop)
        throw config_error("compare meters a fixed cycle budget; --plateau-stop would "
                           "desync the baselines");

    const std::string hash_before = split_hash(data);
    const int drops = static_cast<int>(tf.rate * tf.dim + 1e-9);
    const int dstar = tf.dim + tf.cycles * drops;
    const int epoch_budget = tf.initial_epochs + tf.cycles * tf.epochs;
    const auto n = data.X_train.rows();
    const int L = data.n_classes;

    // the dynamic run re-encodes only regenerated rows; the comparison is
    // about cost, so the cheap equivalent path is the honest one to meter
    TrainFlags dyn_flags = tf;
    dyn_flags.partial_reencode = true;
    FitResult dynamic_run = fit(data.X_train, data.y_train, L, data.X_test, data.y_test,
                                to_fit_options(dyn_flags));
    FitResult static_d = fit_static(data.X_train, data.y_train, L, data.X_test, data.y_test,
                                    tf.dim, tf.sigma, tf.enc_seed, tf.eta, epoch_budget);
    FitResult static_star = fit_static(data.X_train, data.y_train, L, data.X_test, data.y_test,
                                       dstar, tf.sigma, tf.enc_seed, tf.eta, epoch_budget);
    if (split_hash(data) != hash_before)
        throw invariant_error("data split changed between comparison runs");

    struct Row {
        const char* name;
        const FitResult* r;
        int dim;
    };
    const Row rows[3] = {{"dynamic", &dynamic_run, tf.dim},
                         {"static_same_dim", &static_d, tf.dim},
                         {"static_effective_dim", &static_star, dstar}};

    json runs = json::array();
    for (const Row& row : rows) {
        json jr;
        jr["name"] = row.name;
        jr["dim"] = row.dim;
        jr["effective_dim"] = row.r->report.effective_dim;
        jr["accuracy"] = row.r->report.final_test_accuracy;
        jr["train_mac_ops"] = row.r->report.train_mac_ops;
        jr["inference_mac_ops"] = inference_macs(row.dim, n, L);
        runs.push_back(std::move(jr));
    }

    json report;
    report["schema_version"] = 1;
    report["split_hash"] = hash_before;
    report["epoch_budget"] = epoch_budget;
    report["runs"] = std::move(runs);
    json ratios;
    ratios["inference_macs_static_star_over_dynamic"] =
        static_cast<double>(inference_macs(dstar, n, L)) /
        static_cast<double>(inference_macs(tf.dim, n, L));
    ratios["train_macs_static_star_over_dynamic"] =
        static_cast<double>(static_star.report.train_mac_ops) /
        static_cast<double>(dynamic_run.report.train_mac_ops);
    report["ratios"] = std::move(ratios);
    write_text(out / "compare.json", report.dump(2) + "\n");
    write_snapshot(sub, out);

    for (const Row& row : rows)
        std::cout << row.name << ": dim=" << row.dim
                  << " effective_dim=" << row.r->report.effective_dim
                  << " accuracy=" << fmt_double(row.r->report.final_test_accuracy)
                  << " train_mac_ops=" << row.r->report.train_mac_ops
                  << " inference_mac_ops=" << inference_macs(row.dim, n, L) << "\n";
    return 0;
}

int cmd_bitwidth(const std::string& model_path, const std::string& enc_path,
                 const DataFlags& df, const std::vector<int>& bitwidths, bool save_models,
                 const std::string& out_dir, CLI::App* sub) {
    require_checkpoints(model_path, enc_path);
    fs::path out = ensure_out_dir(out_dir);
    AnyModel any = load_any_model(model_path);
    if (any.quantized)
        throw data_error("bitwidth sweep needs a float model checkpoint, got a quantized one");
    EncoderState enc = load_encoder(enc_path);
    LoadedData data = load_data(df);
    check_compatible(any, enc, data.X_train.rows());

    const Eigen::MatrixXd& X = eval_matrix(data);
    const std::vector<int>& y = eval_labels(data);
    if (X.cols() == 0) throw data_error("evaluation set is empty");
    Eigen::MatrixXd H = encode_batch(X, enc);

    const auto L = any.fm.n_classes();
    const auto D = any.fm.dim();
    double float_acc = accuracy(any.fm, H, y);

    std::string csv = "bitwidth,accuracy,inference_bitops\n";
    std::cout << "float_accuracy=" << fmt_double(float_acc) << "\n";
    for (int b : bitwidths) {
        if (!valid_bitwidth(b)) throw config_error("bitwidth must be one of 1,2,4,8,16,32");
        QuantizedModel qm = quantize_model(any.fm, b);
        double acc = accuracy_q(qm, H, y);
        csv += std::to_string(b) + "," + fmt_double(acc) + "," +
               std::to_string(inference_bitops(D, L, b)) + "\n";
        std::cout << "bitwidth=" << b << " accuracy=" << fmt_double(acc) << "\n";
        if (save_models)
            save_quantized((out / ("model_q" + std::to_string(b) + ".bin")).string(), qm);
    }
    write_text(out / "bitwidth.csv", csv);
    write_snapshot(sub, out);
    return 0;
}

int cmd_faults(const std::string& model_path, const std::string& enc_path, const DataFlags& df,
               const std::vector<int>& bitwidths, const std::vector<double>& p_grid, int trials,
               std::uint64_t fault_seed, const std::string& out_dir, CLI::App* sub) {
    require_checkpoints(model_path, enc_path);
    fs::path out = ensure_out_dir(out_dir);
    AnyModel any = load_any_model(model_path);
    if (any.quantized)
        throw data_error("the fault sweep quantizes a float model itself; pass the float "
                         "checkpoint");
    EncoderState enc = load_encoder(enc_path);
    LoadedData data = load_data(df);
    check_compatible(any, enc, data.X_train.rows());

    const Eigen::MatrixXd& X = eval_matrix(data);
    const std::vector<int>& y = eval_labels(data);
    if (X.cols() == 0) throw data_error("evaluation set is empty");
    Eigen::MatrixXd H = encode_batch(X, enc);

    auto points = robustness_curve(any.fm, H, y, bitwidths, p_grid, trials, fault_seed);
    write_curve_csv((out / "faults.csv").string(), points);
    write_snapshot(sub, out);

    for (const auto& pt : points)
        std::cout << "bitwidth=" << pt.bitwidth << " p=" << fmt_double(pt.flip_probability)
                  << " mean_acc=" << fmt_double(pt.mean_accuracy)
                  << " std_acc=" << fmt_double(pt.std_accuracy) << "\n";
    return 0;
}

int cmd_synth(const DataFlags& df, const std::string& file_name, const std::string& out_dir,
              CLI::App* sub) {
    fs::path out = ensure_out_dir(out_dir);
    auto data = synth_gaussian(df.synth_features, df.synth_classes, df.synth_per_class,
                               df.synth_sep, df.synth_seed, df.synth_clusters, df.synth_noise);
    std::vector<std::string> names;
    for (int l = 0; l < df.synth_classes; ++l) names.push_back(std::to_string(l));
    write_csv((out / file_name).string(), data, names);
    write_snapshot(sub, out);
    std::cout << "wrote " << data.size() << " rows to " << (out / file_name).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperdimensional classifier with dynamic dimension regeneration"};
    app.require_subcommand(1);

    DataFlags train_df, eval_df, compare_df, bits_df, faults_df, synth_df;
    TrainFlags train_tf, compare_tf;
    std::string train_out = ".", eval_out = ".", compare_out = ".", bits_out = ".",
                faults_out = ".", synth_out = ".";
    std::string train_cfg, eval_cfg, compare_cfg, bits_cfg, faults_cfg, synth_cfg;
    int threads = 0;

    CLI::App* train = app.add_subcommand("train", "fit a model and write checkpoints");
    add_data_flags(train, train_df, false);
    add_train_flags(train, train_tf);
    add_out_flag(train, train_out);
    add_threads_flag(train, threads);
    add_config_flag(train, train_cfg);

    std::string eval_model, eval_enc;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--model", eval_model, "model checkpoint (float or quantized)");
    eval->add_option("--encoder", eval_enc, "encoder checkpoint");
    add_data_flags(eval, eval_df, true);
    add_out_flag(eval, eval_out);
    add_threads_flag(eval, threads);
    add_config_flag(eval, eval_cfg);

    CLI::App* compare = app.add_subcommand(
        "compare", "train dynamic and static baselines on one split and compare costs");
    add_data_flags(compare, compare_df, false);
    add_train_flags(compare, compare_tf);
    add_out_flag(compare, compare_out);
    add_threads_flag(compare, threads);
    add_config_flag(compare, compare_cfg);

    std::string bits_model, bits_enc;
    std::vector<int> bits_list = {32, 16, 8, 4, 2, 1};
    bool bits_save = false;
    CLI::App* bits = app.add_subcommand("bitwidth", "sweep quantization bitwidths");
    bits->add_option("--model", bits_model, "float model checkpoint");
    bits->add_option("--encoder", bits_enc, "encoder checkpoint");
    bits->add_option("--bitwidths", bits_list, "bitwidths to sweep")
        ->delimiter(',')
        ->capture_default_str();
    bits->add_flag("--save", bits_save, "write each swept model as a quantized checkpoint");
    add_data_flags(bits, bits_df, true);
    add_out_flag(bits, bits_out);
    add_threads_flag(bits, threads);
    add_config_flag(bits, bits_cfg);

    std::string faults_model, faults_enc;
    std::vector<int> faults_bits = {1, 32};
    std::vector<double> faults_p = {0.0, 0.001, 0.005, 0.01, 0.05, 0.1};
    int faults_trials = 10;
    std::uint64_t fault_seed = 1;
    CLI::App* faults = app.add_subcommand("faults", "measure accuracy under random bit flips");
    faults->add_option("--model", faults_model, "float model checkpoint");
    faults->add_option("--encoder", faults_enc, "encoder checkpoint");
    faults->add_option("--bitwidths", faults_bits, "bitwidths to corrupt")
        ->delimiter(',')
        ->capture_default_str();
    faults->add_option("--p-grid", faults_p, "bit-flip probabilities")
        ->delimiter(',')
        ->capture_default_str();
    faults->add_option("--trials", faults_trials, "fault patterns per grid point")
        ->capture_default_str();
    faults->add_option("--fault-seed", fault_seed, "root seed for fault patterns")
        ->capture_default_str();
    add_data_flags(faults, faults_df, true);
    add_out_flag(faults, faults_out);
    add_threads_flag(faults, threads);
    add_config_flag(faults, faults_cfg);

    std::string synth_file = "synth.csv";
    CLI::App* synth = app.add_subcommand("synth", "write a synthetic gaussian-blob CSV");
    add_data_flags(synth, synth_df, false);
    synth->add_option("--file", synth_file, "output CSV file name")->capture_default_str();
    add_out_flag(synth, synth_out);
    add_config_flag(synth, synth_cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (train->parsed()) apply_config(train, train_cfg);
        if (eval->parsed()) apply_config(eval, eval_cfg);
        if (compare->parsed()) apply_config(compare, compare_cfg);
        if (bits->parsed()) apply_config(bits, bits_cfg);
        if (faults->parsed()) apply_config(faults, faults_cfg);
        if (synth->parsed()) apply_config(synth, synth_cfg);
        apply_threads(threads);
        if (train->parsed()) return cmd_train(train_df, train_tf, train_out, train);
        if (eval->parsed()) return cmd_eval(eval_model, eval_enc, eval_df, eval_out, eval);
        if (compare->parsed()) return cmd_compare(compare_df, compare_tf, compare_out, compare);
        if (bits->parsed())
            return cmd_bitwidth(bits_model, bits_enc, bits_df, bits_list, bits_save, bits_out,
                                bits);
        if (faults->parsed())
            return cmd_faults(faults_model, faults_enc, faults_df, faults_bits, faults_p,
                              faults_trials, fault_seed, faults_out, faults);
        if (synth->parsed()) return cmd_synth(synth_df, synth_file, synth_out, synth);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}

#include "regenhd/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "regenhd/errors.hpp"
#include "regenhd/fmt.hpp"
#include "regenhd/rng.hpp"

namespace regenhd {

namespace {

enum class CellKind { finite_real, nonfinite_real, text };

CellKind classify_cell(const std::string& s, double* out) {
    if (s.empty()) return CellKind::text;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') return CellKind::text;
    if (!std::isfinite(v)) return CellKind::nonfinite_real;
    if (out) *out = v;
    return CellKind::finite_real;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

bool try_parse_int(const std::string& s, long long* out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    long long v = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE) return false;
    *out = v;
    return true;
}

// Uniform integer in [0, n) without modulo bias.
std::uint64_t bounded(Rng& rng, std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t x = rng.next_u64();
        if (x >= threshold) return x % n;
    }
}

std::string transform_label(const std::string& raw, const Schema& schema) {
    std::string s = raw;
    if (!schema.label_map.empty()) {
        auto it = schema.label_map.find(s);
        if (it != schema.label_map.end()) s = it->second;
    }
    if (schema.binary_labels) s = (s == schema.normal_label) ? "normal" : "attack";
    return s;
}

}  // namespace

int Schema::n_features() const {
    int n = 0;
    for (const auto& c : columns) n += c.numeric ? 1 : static_cast<int>(c.categories.size());
    return n;
}

int Schema::label_index(const std::string& raw) const {
    std::string s = transform_label(raw, *this);
    // linear scan: labels may carry a numeric-aware order, and L is small
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == s) return static_cast<int>(i);
    return -1;
}

Table load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open csv file: " + path);

    Table table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        table.rows.push_back(split_line(line));
    }
    if (table.rows.empty()) throw data_error("csv file has no rows: " + path);

    // Header iff nothing in the first row looks like a number.
    bool any_numeric = false;
    for (const auto& cell : table.rows.front())
        if (classify_cell(cell, nullptr) != CellKind::text) any_numeric = true;
    if (!any_numeric) {
        table.header = table.rows.front();
        table.had_header = true;
        table.rows.erase(table.rows.begin());
        if (table.rows.empty()) throw data_error("csv file has only a header: " + path);
    }

    const std::size_t width = table.rows.front().size();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].size() != width) {
            throw data_error("csv row " + std::to_string(i + 1) + " has " +
                             std::to_string(table.rows[i].size()) + " cells, expected " +
                             std::to_string(width) + ": " + path);
        }
    }
    return table;
}

Schema fit_schema(const Table& table, const SchemaOptions& opts) {
    if (table.rows.empty()) throw data_error("cannot fit schema on empty table");
    const int ncols = static_cast<int>(table.rows.front().size());

    Schema schema;
    schema.n_source_cols = ncols;
    schema.label_map = opts.label_map;
    schema.binary_labels = opts.binary_labels;
    schema.normal_label = opts.normal_label;

    schema.label_col = opts.label_col < 0 ? ncols - 1 : opts.label_col;
    if (schema.label_col < 0 || schema.label_col >= ncols)
        throw config_error("label column " + std::to_string(schema.label_col) +
                           " out of range for " + std::to_string(ncols) + " columns");

    std::set<int> ignored;
    for (int c : opts.ignore_cols) {
        if (c < 0 || c >= ncols)
            throw config_error("ignored column " + std::to_string(c) + " out of range");
        if (c == schema.label_col)
            throw config_error("cannot ignore the label column");
        ignored.insert(c);
    }
    schema.ignored_cols.assign(ignored.begin(), ignored.end());

    for (int c = 0; c < ncols; ++c) {
        if (c == schema.label_col || ignored.count(c)) continue;
        ColumnSchema col;
        col.source_col = c;
        col.numeric = true;
        bool first = true;
        std::set<std::string> values;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const std::string& cell = table.rows[r][static_cast<std::size_t>(c)];
            double v = 0.0;
            CellKind kind = classify_cell(cell, &v);
            if (kind == CellKind::nonfinite_real)
                throw data_error("non-finite value at row " + std::to_string(r + 1) +
                                 ", column " + std::to_string(c));
            if (kind == CellKind::text) col.numeric = false;
            if (col.numeric) {
                if (first || v < col.min) col.min = v;
                if (first || v > col.max) col.max = v;
                first = false;
            } else {
                values.insert(cell);
            }
        }
        if (!col.numeric) {
            // Rescan so values seen before the column flipped to categorical
            // are included too.
            values.clear();
            for (const auto& row : table.rows) values.insert(row[static_cast<std::size_t>(c)]);
            col.categories.assign(values.begin(), values.end());
        }
        schema.columns.push_back(std::move(col));
    }

    std::set<std::string> label_set;
    for (const auto& row : table.rows)
        label_set.insert(transform_label(row[static_cast<std::size_t>(schema.label_col)], schema));
    schema.labels.assign(label_set.begin(), label_set.end());

    // Integer-looking labels sort by value so "10" lands after "2".
    bool all_int = true;
    std::vector<long long> as_int(schema.labels.size());
    for (std::size_t i = 0; i < schema.labels.size(); ++i)
        if (!try_parse_int(schema.labels[i], &as_int[i])) { all_int = false; break; }
    if (all_int && !schema.labels.empty()) {
        std::vector<std::size_t> order(schema.labels.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return as_int[a] < as_int[b]; });
        std::vector<std::string> sorted;
        sorted.reserve(order.size());
        for (std::size_t i : order) sorted.push_back(schema.labels[i]);
        schema.labels = std::move(sorted);
    }
    return schema;
}

std::vector<FeatureVector> vectorize(const Table& table, const Schema& schema) {
    if (!table.rows.empty() &&
        static_cast<int>(table.rows.front().size()) != schema.n_source_cols)
        throw data_error("table has " + std::to_string(table.rows.front().size()) +
                         " columns, schema expects " + std::to_string(schema.n_source_cols));

    const int nfeat = schema.n_features();
    std::vector<FeatureVector> out;
    out.reserve(table.rows.size());

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        FeatureVector fv;
        fv.features.reserve(static_cast<std::size_t>(nfeat));
        for (const auto& col : schema.columns) {
            const std::string& cell = row[static_cast<std::size_t>(col.source_col)];
            if (col.numeric) {
                double v = 0.0;
                CellKind kind = classify_cell(cell, &v);
                if (kind == CellKind::nonfinite_real)
                    throw data_error("non-finite value at row " + std::to_string(r + 1) +
                                     ", column " + std::to_string(col.source_col));
                if (kind == CellKind::text)
                    throw data_error("non-numeric value '" + cell + "' at row " +
                                     std::to_string(r + 1) + ", column " +
                                     std::to_string(col.source_col));
                double scaled = 0.0;
                if (col.max > col.min) {
                    scaled = (v - col.min) / (col.max - col.min);
                    scaled = std::min(1.0, std::max(0.0, scaled));
                }
                fv.features.push_back(scaled);
            } else {
                std::size_t base = fv.features.size();
                fv.features.resize(base + col.categories.size(), 0.0);
                auto it = std::lower_bound(col.categories.begin(), col.categories.end(), cell);
                if (it != col.categories.end() && *it == cell)
                    fv.features[base + static_cast<std::size_t>(it - col.categories.begin())] = 1.0;
                // unseen category stays all-zero
            }
        }
        const std::string& raw = row[static_cast<std::size_t>(schema.label_col)];
        fv.label = schema.label_index(raw);
        if (fv.label < 0)
            throw data_error("unknown label '" + raw + "' at row " + std::to_string(r + 1));
        out.push_back(std::move(fv));
    }
    return out;
}

std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> split(
    const std::vector<FeatureVector>& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw config_error("test fraction must be in (0, 1)");
    if (data.empty()) throw data_error("cannot split an empty dataset");

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Rng rng = Rng::substream(seed, 0);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(order[i - 1], order[j]);
    }

    const std::size_t n = data.size();
    auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n) + 1e-9));
    const std::size_t n_train = n - n_test;

    std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> result;
    result.first.reserve(n_train);
    result.second.reserve(n_test);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train)
            result.first.push_back(data[order[i]]);
        else
            result.second.push_back(data[order[i]]);
    }
    return result;
}

std::vector<FeatureVector> synth_gaussian(int n_features, int n_classes, int n_per_class,
                                          double separation, std::uint64_t seed,
                                          int clusters_per_class, double noise) {
    if (n_classes < 1) throw config_error("need at least one class");
    if (n_features < 1) throw config_error("need at least one feature");
    if (n_per_class < 1) throw config_error("need at least one sample per class");
    if (clusters_per_class < 1) throw config_error("need at least one cluster per class");
    if (separation < 0.0 || noise < 0.0) throw config_error("separation and noise must be >= 0");

    std::vector<FeatureVector> out;
    out.reserve(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_per_class));

    const int total_clusters = n_classes * clusters_per_class;
    for (int k = 0; k < total_clusters; ++k) {
        const int cls = k % n_classes;
        const int within = k / n_classes;
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(k));

        // random unit direction for the blob mean
        std::vector<double> dir(static_cast<std::size_t>(n_features));
        double norm = 0.0;
        do {
            norm = 0.0;
            for (auto& d : dir) {
                d = rng.next_gaussian();
                norm += d * d;
            }
            norm = std::sqrt(norm);
        } while (norm < 1e-12);

        std::vector<double> mean(static_cast<std::size_t>(n_features));
        for (int i = 0; i < n_features; ++i)
            mean[static_cast<std::size_t>(i)] = 0.5 + separation * dir[static_cast<std::size_t>(i)] / norm;

        const int base = n_per_class / clusters_per_class;
        const int extra = n_per_class % clusters_per_class;
        const int quota = base + (within < extra ? 1 : 0);
        for (int s = 0; s < quota; ++s) {
            FeatureVector fv;
            fv.label = cls;
            fv.features.resize(static_cast<std::size_t>(n_features));
            for (int i = 0; i < n_features; ++i) {
                double v = mean[static_cast<std::size_t>(i)] + noise * rng.next_gaussian();
                fv.features[static_cast<std::size_t>(i)] = std::min(1.0, std::max(0.0, v));
            }
            out.push_back(std::move(fv));
        }
    }
    return out;
}

std::pair<Eigen::MatrixXd, std::vector<int>> to_matrix(const std::vector<FeatureVector>& data) {
    if (data.empty()) throw data_error("empty dataset");
    const auto n = static_cast<Eigen::Index>(data.front().features.size());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(data.size()));
    std::vector<int> labels(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (static_cast<Eigen::Index>(data[j].features.size()) != n)
            throw data_error("inconsistent feature count at sample " + std::to_string(j));
        for (Eigen::Index i = 0; i < n; ++i)
            X(i, static_cast<Eigen::Index>(j)) = data[j].features[static_cast<std::size_t>(i)];
        labels[j] = data[j].label;
    }
    return {std::move(X), std::move(labels)};
}

std::map<std::string, std::string> load_label_map(const std::string& path) {
    Table table = load_csv(path);
    // every row of a label map is data; undo the generic header detection,
    // which mistakes all-text first rows for column names
    if (table.had_header) table.rows.insert(table.rows.begin(), table.header);
    std::map<std::string, std::string> map;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != 2)
            throw data_error("label map row " + std::to_string(r + 1) +
                             " needs exactly 2 columns: " + path);
        map[table.rows[r][0]] = table.rows[r][1];
    }
    return map;
}

void save_schema(const std::string& path, const Schema& schema) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["label_col"] = schema.label_col;
    j["n_source_cols"] = schema.n_source_cols;
    j["ignored_cols"] = schema.ignored_cols;
    j["labels"] = schema.labels;
    j["label_map"] = schema.label_map;
    j["binary_labels"] = schema.binary_labels;
    j["normal_label"] = schema.normal_label;
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : schema.columns) {
        nlohmann::json jc;
        jc["source_col"] = c.source_col;
        jc["numeric"] = c.numeric;
        jc["min"] = c.min;
        jc["max"] = c.max;
        jc["categories"] = c.categories;
        cols.push_back(std::move(jc));
    }
    j["columns"] = std::move(cols);

    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw data_error("write failed: " + path);
}

Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
        Schema s;
        s.label_col = j.at("label_col").get<int>();
        s.n_source_cols = j.at("n_source_cols").get<int>();
        s.ignored_cols = j.at("ignored_cols").get<std::vector<int>>();
        s.labels = j.at("labels").get<std::vector<std::string>>();
        s.label_map = j.at("label_map").get<std::map<std::string, std::string>>();
        s.binary_labels = j.at("binary_labels").get<bool>();
        s.normal_label = j.at("normal_label").get<std::string>();
        for (const auto& jc : j.at("columns")) {
            ColumnSchema c;
            c.source_col = jc.at("source_col").get<int>();
            c.numeric = jc.at("numeric").get<bool>();
            c.min = jc.at("min").get<double>();
            c.max = jc.at("max").get<double>();
            c.categories = jc.at("categories").get<std::vector<std::string>>();
            s.columns.push_back(std::move(c));
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed schema file " + path + ": " + e.what());
    }
}

void write_csv(const std::string& path, const std::vector<FeatureVector>& data,
               const std::vector<std::string>& labels) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path);
    if (data.empty()) throw data_error("refusing to write empty dataset");

    const std::size_t n = data.front().features.size();
    for (std::size_t i = 0; i < n; ++i) out << "f" << i << ",";
    out << "label\n";
    for (const auto& fv : data) {
        for (double v : fv.features) out << fmt_double(v) << ",";
        if (fv.label < 0 || static_cast<std::size_t>(fv.label) >= labels.size())
            throw data_error("label index out of range while writing csv");
        out << labels[static_cast<std::size_t>(fv.label)] << "\n";
    }
    if (!out) throw data_error("write failed: " + path);
}

}  // namespace regenhd

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace regenhd {

struct FeatureVector {
    std::vector<double> features;
    int label = 0;
};

// Raw CSV contents. Header row is detected (and stripped into `header`) when
// no cell of the first row parses as a finite real.
struct Table {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    bool had_header = false;
};

struct ColumnSchema {
    int source_col = 0;
    bool numeric = true;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string> categories;  // sorted; used when !numeric
};

// How to interpret a table. Fitted on training data, then reused verbatim for
// any other file so feature layout and scaling stay consistent.
struct Schema {
    std::vector<ColumnSchema> columns;
    std::vector<std::string> labels;  // class names, deterministic order
    int label_col = -1;               // resolved source column of the label
    int n_source_cols = 0;
    std::vector<int> ignored_cols;
    std::map<std::string, std::string> label_map;  // raw label -> group, empty = identity
    bool binary_labels = false;                    // collapse to normal-vs-attack
    std::string normal_label = "normal";

    int n_features() const;
    int n_classes() const { return static_cast<int>(labels.size()); }
    int label_index(const std::string& raw) const;  // -1 when unknown
};

struct SchemaOptions {
    int label_col = -1;  // -1 = last column
    std::vector<int> ignore_cols;
    std::map<std::string, std::string> label_map;
    bool binary_labels = false;
    std::string normal_label = "normal";
};

Table load_csv(const std::string& path);

Schema fit_schema(const Table& table, const SchemaOptions& opts);

// Applies a fitted schema: numeric columns min-max scaled (clamped to [0,1]),
// categorical columns one-hot (unseen value = all-zero block), label column
// mapped to a class index.
std::vector<FeatureVector> vectorize(const Table& table, const Schema& schema);

// Deterministic shuffle + split; test_fraction must lie in (0,1). Train gets
// ceil((1-test_fraction)*N) rows; both halves keep the shuffled order.
std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> split(
    const std::vector<FeatureVector>& data, double test_fraction, std::uint64_t seed);

// Gaussian blobs in [0,1]^n. Each class owns `clusters_per_class` blobs whose
// means sit at `separation` from the cube center in random directions; samples
// add N(0, noise^2) per coordinate and are clamped to the cube.
std::vector<FeatureVector> synth_gaussian(int n_features, int n_classes, int n_per_class,
                                          double separation, std::uint64_t seed,
                                          int clusters_per_class = 1, double noise = 0.1);

// Column-major feature matrix (n_features x N) plus labels, ready to encode.
std::pair<Eigen::MatrixXd, std::vector<int>> to_matrix(const std::vector<FeatureVector>& data);

// Two-column CSV "raw_label,group" (e.g. attack name -> attack category).
std::map<std::string, std::string> load_label_map(const std::string& path);

// JSON persistence so evaluation runs reuse the exact training-time layout.
void save_schema(const std::string& path, const Schema& schema);
Schema load_schema(const std::string& path);

void write_csv(const std::string& path, const std::vector<FeatureVector>& data,
               const std::vector<std::string>& labels);

}  // namespace regenhd

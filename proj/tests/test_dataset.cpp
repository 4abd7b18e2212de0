#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "regenhd/dataset.hpp"
#include "regenhd/errors.hpp"

using namespace regenhd;

namespace {

std::filesystem::path tmp_dir() {
    auto p = std::filesystem::current_path() / "test_tmp";
    std::filesystem::create_directories(p);
    return p;
}

std::string write_file(const std::string& name, const std::string& content) {
    auto path = tmp_dir() / name;
    std::ofstream out(path);
    out << content;
    out.close();
    return path.string();
}

// nearest-centroid classifier used as an independent separability oracle
double centroid_accuracy(const std::vector<FeatureVector>& train,
                         const std::vector<FeatureVector>& test, int n_classes) {
    const std::size_t n = train.front().features.size();
    std::vector<std::vector<double>> means(static_cast<std::size_t>(n_classes),
                                           std::vector<double>(n, 0.0));
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (const auto& fv : train) {
        for (std::size_t i = 0; i < n; ++i)
            means[static_cast<std::size_t>(fv.label)][i] += fv.features[i];
        counts[static_cast<std::size_t>(fv.label)]++;
    }
    for (int c = 0; c < n_classes; ++c)
        for (std::size_t i = 0; i < n; ++i)
            if (counts[static_cast<std::size_t>(c)] > 0)
                means[static_cast<std::size_t>(c)][i] /= counts[static_cast<std::size_t>(c)];
    int hits = 0;
    for (const auto& fv : test) {
        double best = 1e300;
        int arg = 0;
        for (int c = 0; c < n_classes; ++c) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double diff = fv.features[i] - means[static_cast<std::size_t>(c)][i];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                arg = c;
            }
        }
        if (arg == fv.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace

TEST_CASE("csv header detection") {
    auto with_header = write_file("ds_header.csv", "f0,proto,label\n1.5,tcp,a\n2.5,udp,b\n");
    Table t = load_csv(with_header);
    CHECK(t.had_header);
    CHECK(t.header.size() == 3);
    CHECK(t.rows.size() == 2);

    auto no_header = write_file("ds_nohdr.csv", "1.5,tcp,a\n2.5,udp,b\n");
    Table t2 = load_csv(no_header);
    CHECK_FALSE(t2.had_header);
    CHECK(t2.rows.size() == 2);
}

TEST_CASE("csv ragged rows and empty files are rejected") {
    auto ragged = write_file("ds_ragged.csv", "1,2,3\n4,5\n6,7,8\n");
    bool threw = false;
    try {
        load_csv(ragged);
    } catch (const data_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    CHECK(threw);

    auto empty = write_file("ds_empty.csv", "");
    CHECK_THROWS_AS(load_csv(empty), data_error);

    CHECK_THROWS_AS(load_csv((tmp_dir() / "does_not_exist.csv").string()), data_error);
}

TEST_CASE("schema inference and min-max scaling") {
    // spec'd scaling case: min 0, max 10, cell 5 -> 0.5
    auto path = write_file("ds_scale.csv", "0,tcp,a\n10,udp,b\n5,tcp,a\n");
    Table t = load_csv(path);
    Schema s = fit_schema(t, SchemaOptions{});
    REQUIRE(s.columns.size() == 2);
    CHECK(s.columns[0].numeric);
    CHECK(s.columns[0].min == 0.0);
    CHECK(s.columns[0].max == 10.0);
    CHECK_FALSE(s.columns[1].numeric);
    CHECK(s.columns[1].categories == std::vector<std::string>{"tcp", "udp"});
    CHECK(s.labels == std::vector<std::string>{"a", "b"});

    auto vecs = vectorize(t, s);
    REQUIRE(vecs.size() == 3);
    // layout: [scaled numeric, onehot(tcp), onehot(udp)]
    CHECK(vecs[0].features == std::vector<double>{0.0, 1.0, 0.0});
    CHECK(vecs[1].features == std::vector<double>{1.0, 0.0, 1.0});
    CHECK(vecs[2].features == std::vector<double>{0.5, 1.0, 0.0});
    CHECK(vecs[2].label == 0);
    CHECK(vecs[1].label == 1);
}

TEST_CASE("one-hot block has at most one 1 and unseen categories go to zero") {
    auto train = write_file("ds_train.csv", "1,tcp,a\n2,udp,a\n3,icmp,b\n");
    Schema s = fit_schema(load_csv(train), SchemaOptions{});
    CHECK(s.columns[1].categories == std::vector<std::string>{"icmp", "tcp", "udp"});

    auto test = write_file("ds_test.csv", "2,sctp,a\n1,udp,b\n");
    auto vecs = vectorize(load_csv(test), s);
    // unseen 'sctp' -> all-zero block
    CHECK(vecs[0].features == std::vector<double>{0.5, 0.0, 0.0, 0.0});
    CHECK(vecs[1].features == std::vector<double>{0.0, 0.0, 0.0, 1.0});
    for (const auto& fv : vecs) {
        int ones = 0;
        for (std::size_t i = 1; i < 4; ++i)
            if (fv.features[i] == 1.0) ++ones;
        CHECK(ones <= 1);
    }
}

TEST_CASE("constant numeric columns map to zero and test values clamp") {
    auto train = write_file("ds_const.csv", "3,0,a\n3,10,b\n");
    Schema s = fit_schema(load_csv(train), SchemaOptions{});
    auto test = write_file("ds_const_test.csv", "3,20,a\n3,-5,b\n");
    auto vecs = vectorize(load_csv(test), s);
    CHECK(vecs[0].features == std::vector<double>{0.0, 1.0});   // 20 clamps to 1
    CHECK(vecs[1].features == std::vector<double>{0.0, 0.0});   // -5 clamps to 0
}

TEST_CASE("non-finite numeric cells are rejected") {
    for (const char* bad : {"inf", "nan", "1e999"}) {
        auto path = write_file("ds_bad.csv", std::string("1,a\n") + bad + ",b\n");
        Table t = load_csv(path);
        CHECK_THROWS_AS(fit_schema(t, SchemaOptions{}), data_error);
    }
}

TEST_CASE("vectorize is idempotent") {
    auto path = write_file("ds_idem.csv", "1,tcp,a\n2,udp,b\n3,tcp,a\n");
    Table t = load_csv(path);
    Schema s = fit_schema(t, SchemaOptions{});
    auto v1 = vectorize(t, s);
    auto v2 = vectorize(t, s);
    REQUIRE(v1.size() == v2.size());
    for (std::size_t i = 0; i < v1.size(); ++i) {
        CHECK(v1[i].features == v2[i].features);
        CHECK(v1[i].label == v2[i].label);
    }
}

TEST_CASE("label handling: mapping file, binary mode, numeric ordering") {
    auto map_path = write_file("ds_map.csv",
                               "neptune,dos\nsmurf,dos\nsatan,probe\nnormal,normal\n");
    auto map = load_label_map(map_path);
    CHECK(map.at("neptune") == "dos");
    CHECK(map.size() == 4);

    auto data = write_file("ds_labels.csv", "1,neptune\n2,normal\n3,satan\n4,smurf\n");
    SchemaOptions opts;
    opts.label_map = map;
    Schema s = fit_schema(load_csv(data), opts);
    CHECK(s.labels == std::vector<std::string>{"dos", "normal", "probe"});

    SchemaOptions bin;
    bin.label_map = map;
    bin.binary_labels = true;
    Schema sb = fit_schema(load_csv(data), bin);
    CHECK(sb.labels == std::vector<std::string>{"attack", "normal"});
    auto vb = vectorize(load_csv(data), sb);
    CHECK(vb[0].label == 0);  // neptune -> dos -> attack
    CHECK(vb[1].label == 1);  // normal

    // integer-looking labels sort numerically
    auto nums = write_file("ds_numlab.csv", "1,10\n2,2\n3,1\n");
    Schema sn = fit_schema(load_csv(nums), SchemaOptions{});
    CHECK(sn.labels == std::vector<std::string>{"1", "2", "10"});
}

TEST_CASE("unknown label at vectorize time is an error") {
    auto train = write_file("ds_l1.csv", "1,a\n2,b\n");
    Schema s = fit_schema(load_csv(train), SchemaOptions{});
    auto test = write_file("ds_l2.csv", "1,c\n");
    CHECK_THROWS_AS(vectorize(load_csv(test), s), data_error);
}

TEST_CASE("schema options validate column indices") {
    auto path = write_file("ds_cols.csv", "1,2,a\n3,4,b\n");
    Table t = load_csv(path);
    SchemaOptions bad1;
    bad1.label_col = 7;
    CHECK_THROWS_AS(fit_schema(t, bad1), config_error);
    SchemaOptions bad2;
    bad2.ignore_cols = {2};  // label column (last)
    CHECK_THROWS_AS(fit_schema(t, bad2), config_error);
    SchemaOptions ok;
    ok.ignore_cols = {0};
    Schema s = fit_schema(t, ok);
    CHECK(s.n_features() == 1);
}

TEST_CASE("split sizes, determinism, and partition identity") {
    std::vector<FeatureVector> data;
    for (int i = 0; i < 10; ++i)
        data.push_back(FeatureVector{{static_cast<double>(i)}, i % 2});

    auto [train, test] = split(data, 0.3, 7);
    CHECK(train.size() == 7);
    CHECK(test.size() == 3);

    auto [train2, test2] = split(data, 0.3, 7);
    for (std::size_t i = 0; i < train.size(); ++i)
        CHECK(train[i].features == train2[i].features);
    for (std::size_t i = 0; i < test.size(); ++i)
        CHECK(test[i].features == test2[i].features);

    // union is the input multiset
    std::multiset<double> seen, expected;
    for (const auto& fv : data) expected.insert(fv.features[0]);
    for (const auto& fv : train) seen.insert(fv.features[0]);
    for (const auto& fv : test) seen.insert(fv.features[0]);
    CHECK(seen == expected);

    CHECK_THROWS_AS(split(data, 0.0, 1), config_error);
    CHECK_THROWS_AS(split(data, 1.0, 1), config_error);
    CHECK_THROWS_AS(split(data, -0.1, 1), config_error);
}

TEST_CASE("split order varies with the seed") {
    std::vector<FeatureVector> data;
    for (int i = 0; i < 20; ++i)
        data.push_back(FeatureVector{{static_cast<double>(i)}, 0});
    int distinct = 0;
    auto base = split(data, 0.5, 0).first;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto other = split(data, 0.5, seed).first;
        bool same = true;
        for (std::size_t i = 0; i < base.size(); ++i)
            if (base[i].features != other[i].features) same = false;
        if (!same) ++distinct;
    }
    CHECK(distinct > 0);
}

TEST_CASE("synth generator: determinism, counts, bounds") {
    auto a = synth_gaussian(6, 3, 50, 0.3, 99, 2);
    auto b = synth_gaussian(6, 3, 50, 0.3, 99, 2);
    REQUIRE(a.size() == 150);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].features == b[i].features);
        CHECK(a[i].label == b[i].label);
    }
    std::vector<int> counts(3, 0);
    for (const auto& fv : a) {
        REQUIRE(fv.label >= 0);
        REQUIRE(fv.label < 3);
        counts[static_cast<std::size_t>(fv.label)]++;
        for (double v : fv.features) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(counts == std::vector<int>{50, 50, 50});
}

TEST_CASE("synth separation drives separability") {
    // zero separation: classes indistinguishable, centroid oracle near chance
    auto blob = synth_gaussian(8, 2, 1000, 0.0, 4);
    auto [tr0, te0] = split(blob, 0.5, 11);
    double acc0 = centroid_accuracy(tr0, te0, 2);
    CHECK(acc0 > 0.45);
    CHECK(acc0 < 0.55);

    // wide separation: linearly separable
    auto far = synth_gaussian(8, 2, 500, 10.0, 4);
    auto [tr1, te1] = split(far, 0.5, 11);
    CHECK(centroid_accuracy(tr1, te1, 2) >= 0.99);
}

TEST_CASE("to_matrix layout") {
    std::vector<FeatureVector> data{{{0.1, 0.2}, 1}, {{0.3, 0.4}, 0}};
    auto [X, y] = to_matrix(data);
    CHECK(X.rows() == 2);
    CHECK(X.cols() == 2);
    CHECK(X(0, 0) == 0.1);
    CHECK(X(1, 0) == 0.2);
    CHECK(X(0, 1) == 0.3);
    CHECK(y == std::vector<int>{1, 0});
}

TEST_CASE("csv writer round-trips values and labels") {
    auto data = synth_gaussian(4, 3, 20, 0.25, 5);
    auto path = (tmp_dir() / "ds_roundtrip.csv").string();
    write_csv(path, data, {"0", "1", "2"});

    Table t = load_csv(path);
    CHECK(t.had_header);
    REQUIRE(t.rows.size() == data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < 4; ++c)
            CHECK(std::stod(t.rows[r][c]) == data[r].features[c]);
        CHECK(t.rows[r][4] == std::to_string(data[r].label));
    }
}

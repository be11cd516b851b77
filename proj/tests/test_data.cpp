#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pppl/data/dataset.hpp"
#include "pppl/data/synthetic.hpp"
#include "pppl/error.hpp"
#include "pppl/proportions.hpp"

using namespace pppl;
using namespace pppl::data;

namespace {

std::string temp_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / ("pppl_test_" + name);
    std::ofstream(path) << contents;
    return path.string();
}

std::string load_error(const std::string& contents, const std::optional<std::string>& label = "label") {
    const auto path = temp_file("bad.csv", contents);
    try {
        load_feature_csv(path, label);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("window preprocessing of a short series") {
    Eigen::VectorXd series(4);
    series << 1, 2, 4, 7;
    const auto ds = window_preprocess(series, {false, false, true, false}, 1);
    REQUIRE(ds.size() == 3);
    CHECK(ds.features(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(std::abs(ds.features(1, 0)) < 1e-6);
    CHECK(ds.features(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
    // Sample s is labelled with the flag of the point whose difference ends the window.
    CHECK(ds.labels(0) == 0);
    CHECK(ds.labels(1) == 1);
    CHECK(ds.labels(2) == 0);
}

TEST_CASE("windows hold consecutive normalized differences oldest first") {
    Eigen::VectorXd series(8);
    series << 0, 1, 3, 6, 10, 15, 21, 28;
    const Eigen::VectorXd z = normalized_differences(series);
    const auto ds = window_preprocess(series, std::vector<bool>(8, false), 3);
    REQUIRE(ds.size() == 5);
    for (Eigen::Index s = 0; s < ds.size(); ++s) {
        for (int k = 0; k < 3; ++k) {
            CHECK(ds.features(s, k) == doctest::Approx(z(s + k)));
        }
    }
}

TEST_CASE("normalized differences have zero mean and unit variance") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> len(3, 500);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd s(len(rng));
        for (auto& v : s) v = normal(rng) * 5.0 + trial;
        const Eigen::VectorXd z = normalized_differences(s);
        const double mean = z.mean();
        const double sd = std::sqrt((z.array() - mean).square().mean());
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(sd - 1.0) < 1e-9);
    }
}

TEST_CASE("degenerate and short series are rejected") {
    Eigen::VectorXd line(5);
    line << 1, 2, 3, 4, 5;
    CHECK_THROWS_AS(normalized_differences(line), DataError);
    Eigen::VectorXd shortie(3);
    shortie << 1, 3, 2;
    CHECK_THROWS_AS(window_preprocess(shortie, {false, false, false}, 2), DataError);
    CHECK_THROWS_AS(window_preprocess(shortie, {false, false}, 1), ShapeError);
}

TEST_CASE("anomaly series has the requested anomalies") {
    SeriesSpec spec;
    spec.length = 2000;
    spec.anomaly_count = 20;
    spec.seed = 4;
    const auto a = gen_anomaly_series(spec);
    CHECK(a.values.size() == 2000);
    CHECK(std::count(a.flags.begin(), a.flags.end(), true) == 20);
    CHECK_FALSE(a.flags[0]);
    const auto b = gen_anomaly_series(spec);
    CHECK(a.values == b.values);
    spec.anomaly_count = 300;
    CHECK_THROWS_AS(gen_anomaly_series(spec), ConfigError);
}

TEST_CASE("rotated gaussians construction") {
    const auto pair = gen_rotated_gaussians(500, 3, 2.0, 0.8, 35.0, 1);
    CHECK(pair.source.size() == 1500);
    CHECK(pair.target.size() == 1500);
    REQUIRE(pair.target.hidden_labels.has_value());
    const auto cp = class_proportions(*pair.target.hidden_labels, 3);
    for (int c = 0; c < 3; ++c) CHECK(cp[c] == doctest::Approx(1.0 / 3));

    // Rotating the target class means back by theta recovers the source class means.
    const double t = -35.0 * std::acos(-1.0) / 180.0;
    for (int c = 0; c < 3; ++c) {
        Eigen::Vector2d src = Eigen::Vector2d::Zero();
        Eigen::Vector2d tgt = Eigen::Vector2d::Zero();
        for (Eigen::Index i = 0; i < 1500; ++i) {
            if (pair.source.labels(i) == c) src += pair.source.features.row(i).transpose().cast<double>();
            if ((*pair.target.hidden_labels)(i) == c) tgt += pair.target.features.row(i).transpose().cast<double>();
        }
        src /= 500;
        tgt /= 500;
        const Eigen::Vector2d back(std::cos(t) * tgt.x() - std::sin(t) * tgt.y(),
                                   std::sin(t) * tgt.x() + std::cos(t) * tgt.y());
        CHECK((back - src).norm() < 0.15);
    }
}

TEST_CASE("generators are deterministic per seed") {
    const auto a = gen_rotated_gaussians(50, 3, 2.0, 1.0, 35.0, 7);
    const auto b = gen_rotated_gaussians(50, 3, 2.0, 1.0, 35.0, 7);
    const auto c = gen_rotated_gaussians(50, 3, 2.0, 1.0, 35.0, 8);
    CHECK(a.source.features == b.source.features);
    CHECK(a.target.features == b.target.features);
    CHECK(a.source.features != c.source.features);
    const auto m1 = gen_two_moons_shift(300, 0.1, 30.0, 2);
    const auto m2 = gen_two_moons_shift(300, 0.1, 30.0, 2);
    CHECK(m1.target.features == m2.target.features);
    CHECK(m1.source.size() == 600);
    CHECK_THROWS_AS(gen_rotated_gaussians(10, 1, 2.0, 1.0, 0.0, 0), ConfigError);
}

TEST_CASE("zero rotation gives identically distributed domains") {
    const auto pair = gen_two_moons_shift(2000, 0.1, 0.0, 3);
    const Eigen::RowVectorXf ms = pair.source.features.colwise().mean();
    const Eigen::RowVectorXf mt = pair.target.features.colwise().mean();
    CHECK((ms - mt).norm() < 0.05);
}

TEST_CASE("split keeps rows intact") {
    const auto pair = gen_rotated_gaussians(20, 2, 2.0, 1.0, 0.0, 1);
    const auto [a, b] = split(pair.source, 0.25, 3);
    CHECK(a.size() == 10);
    CHECK(b.size() == 30);
    CHECK_THROWS_AS(split(pair.source, 1.0, 3), ConfigError);
}

TEST_CASE("hidden labels round trip") {
    const auto pair = gen_rotated_gaussians(5, 2, 2.0, 1.0, 0.0, 1);
    const auto hidden = hide_labels(pair.source);
    CHECK(reveal_labels(hidden).labels == pair.source.labels);
    UnlabeledDataset bare;
    bare.features = hidden.features;
    CHECK_THROWS_AS(reveal_labels(bare), ConfigError);
}

TEST_CASE("class proportions of labels") {
    Eigen::VectorXi labels(5);
    labels << 0, 1, 1, 2, 1;
    const auto cp = class_proportions(labels, 4);
    CHECK(cp[1] == doctest::Approx(0.6));
    CHECK(cp[3] == 0.0);
}

TEST_CASE("csv round trip") {
    Eigen::MatrixXf x(3, 2);
    x << 1.5f, -2, 0, 3.25f, 7, 8;
    Eigen::VectorXi y(3);
    y << 0, 2, 1;
    const auto path = (std::filesystem::temp_directory_path() / "pppl_test_roundtrip.csv").string();
    write_feature_csv(path, x, y);
    const auto labeled = std::get<LabeledDataset>(load_feature_csv(path, "label"));
    CHECK(labeled.features == x);
    CHECK(labeled.labels == y);
    CHECK(labeled.num_classes == 3);
    const auto unlabeled = std::get<UnlabeledDataset>(load_feature_csv(temp_file("nolabel.csv", "x0,x1\n1,2\n"), std::nullopt));
    CHECK(unlabeled.features.rows() == 1);
}

TEST_CASE("csv errors name the row and column") {
    CHECK(load_error("x0,label\n1,0\nabc,1\n").find("column 'x0': non-numeric value 'abc'") != std::string::npos);
    CHECK(load_error("x0,label\n1,0\nabc,1\n").find("row 2") != std::string::npos);
    CHECK(load_error("x0,label\n1,-1\n").find("label") != std::string::npos);
    CHECK(load_error("x0,x1\n1,0\n").find("no column named 'label'") != std::string::npos);
    CHECK(load_error("x0,label\n1\n").find("expected 2 cells") != std::string::npos);
    CHECK(load_error("x0,label\n").find("no data rows") != std::string::npos);
    CHECK_THROWS_AS(load_feature_csv("/nonexistent/file.csv", std::nullopt), DataError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "pppl/adapt.hpp"
#include "pppl/error.hpp"
#include "pppl/proportions.hpp"
#include "pppl/pseudo_label.hpp"
#include "oracles.hpp"

using namespace pppl;

namespace {

struct Instance {
    Eigen::VectorXd certainty;
    Eigen::VectorXi labels;
};

// Certainties drawn from a coarse grid so ties are common.
Instance random_instance(std::mt19937_64& rng, int n, int classes) {
    std::uniform_int_distribution<int> label(0, classes - 1);
    std::uniform_int_distribution<int> grid(0, 6);
    Instance inst{Eigen::VectorXd(n), Eigen::VectorXi(n)};
    for (int i = 0; i < n; ++i) {
        inst.certainty(i) = grid(rng) / 6.0;
        inst.labels(i) = label(rng);
    }
    return inst;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

}  // namespace

TEST_CASE("pseudo-labels use argmax with ties to the lowest index") {
    ScoreMatrix s(3, 2);
    s << 0.9f, 0.1f, 0.2f, 0.8f, 0.5f, 0.5f;
    const Eigen::VectorXi pl = assign_pseudo_labels(s);
    CHECK(pl(0) == 0);
    CHECK(pl(1) == 1);
    CHECK(pl(2) == 0);
    ScoreMatrix three(1, 3);
    three << 0.1f, 0.7f, 0.2f;
    CHECK(assign_pseudo_labels(three)(0) == 1);
    three(0, 0) = std::nanf("");
    CHECK_THROWS_AS(assign_pseudo_labels(three), NumericalError);
}

TEST_CASE("certainty is the top-two gap of raw scores") {
    ScoreMatrix s(3, 3);
    s << 0.9f, 0.1f, 0.0f, 0.5f, 0.5f, 0.0f, 0.2f, 0.7f, 0.6f;
    const Eigen::VectorXd c = certainty_scores(s);
    CHECK(c(0) == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(c(1) == 0.0);
    CHECK(c(2) == doctest::Approx(0.1).epsilon(1e-5));
}

TEST_CASE("inclusion schedule") {
    CHECK(inclusion_percent(1) == 12.0);
    CHECK(inclusion_percent(20) == 50.0);
    CHECK(inclusion_percent(45) == 100.0);
    CHECK(inclusion_percent(60) == 100.0);
    CHECK_THROWS_AS(inclusion_percent(0), ConfigError);
}

TEST_CASE("weights for a group of five at full inclusion") {
    const Eigen::VectorXd cert = vec({0.9, 0.7, 0.5, 0.3, 0.1});
    const Eigen::VectorXd w = calculate_weights(cert, Eigen::VectorXi::Zero(5), 100.0);
    const double expected[] = {1.0, 0.5556, 0.3846, 0.2941, 0.2381};
    for (int j = 0; j < 5; ++j) {
        CHECK(std::abs(w(j) - expected[j]) < 1e-4);
    }
}

TEST_CASE("half of a group of 1000 is admitted at 50 percent") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u;
    Eigen::VectorXd cert(1000);
    for (auto& c : cert) c = u(rng);
    const Eigen::VectorXd w = calculate_weights(cert, Eigen::VectorXi::Zero(1000), 50.0);
    CHECK((w.array() > 0.0).count() == 500);
}

TEST_CASE("single-sample group always gets weight one") {
    for (double n : {1.0, 12.0, 100.0}) {
        CHECK(calculate_weights(vec({0.3}), Eigen::VectorXi::Zero(1), n)(0) == 1.0);
    }
}

TEST_CASE("12 percent of 1000 admits exactly 120") {
    CHECK(admitted_count(1000, 12.0) == 120);
    CHECK(admitted_count(3, 12.0) == 1);
    CHECK(admitted_count(0, 50.0) == 0);
}

TEST_CASE("exclusion examples") {
    // Class 0 holds 7 of 10 samples with certainty 0.7 down to 0.1.
    Eigen::VectorXi labels(10);
    labels << 0, 0, 0, 0, 0, 0, 0, 1, 1, 1;
    const Eigen::VectorXd cert = vec({0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.9, 0.8, 0.7});
    const InclusionMask all = InclusionMask::Constant(10, true);

    const auto half = exclude_by_proportion(labels, cert, all, make_proportions(vec({0.5, 0.5}), ProportionKind::true_target), 10);
    CHECK(half.count() == 8);
    CHECK_FALSE(half(5));
    CHECK_FALSE(half(6));

    const auto skew = exclude_by_proportion(labels, cert, all, make_proportions(vec({0.9, 0.1}), ProportionKind::guessed), 10);
    CHECK(skew.head(7).all());
    CHECK(skew(7));
    CHECK_FALSE(skew(8));
    CHECK_FALSE(skew(9));

    const auto exact = exclude_by_proportion(labels, cert, all, make_proportions(vec({0.7, 0.3}), ProportionKind::guessed), 10);
    CHECK(exact.all());
}

TEST_CASE("weights match the brute-force oracle on small inputs") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(1, 20);
    std::uniform_int_distribution<int> classes(2, 4);
    std::uniform_int_distribution<int> percent(1, 100);
    for (int trial = 0; trial < 100; ++trial) {
        const auto inst = random_instance(rng, size(rng), classes(rng));
        const int n = percent(rng);
        for (bool aware : {true, false}) {
            const Eigen::VectorXd fast = calculate_weights(inst.certainty, inst.labels, n, aware);
            const Eigen::VectorXd slow = oracle::weights(inst.certainty, inst.labels, n, aware);
            CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("exclusion matches the brute-force oracle on small inputs") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> size(1, 20);
    std::uniform_int_distribution<int> coin(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const int classes = 3;
        const auto inst = random_instance(rng, size(rng), classes);
        const int n = static_cast<int>(inst.labels.size());
        InclusionMask in(n);
        for (int i = 0; i < n; ++i) in(i) = coin(rng) != 0;
        // Integer shares over 20 keep the cap exact.
        std::uniform_int_distribution<int> first(0, 20);
        std::vector<int> shares(classes);
        shares[0] = first(rng);
        std::uniform_int_distribution<int> second(0, 20 - shares[0]);
        shares[1] = second(rng);
        shares[2] = 20 - shares[0] - shares[1];
        Eigen::VectorXd cpv(classes);
        for (int c = 0; c < classes; ++c) cpv(c) = shares[c] / 20.0;
        const auto cp = make_proportions(cpv, ProportionKind::guessed);
        const Eigen::Index total = n + coin(rng);
        const auto fast = exclude_by_proportion(inst.labels, inst.certainty, in, cp, total);
        const auto slow = oracle::exclusion(inst.labels, inst.certainty, in, shares, 20, total);
        CHECK((fast == slow).all());
    }
}

TEST_CASE("weight invariants over random instances") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> size(1, 300);
    std::uniform_real_distribution<double> u;
    std::uniform_real_distribution<double> pct(1.0, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng);
        Eigen::VectorXd cert(n);
        Eigen::VectorXi labels(n);
        for (int i = 0; i < n; ++i) {
            cert(i) = u(rng);
            labels(i) = static_cast<int>(u(rng) * 3);
        }
        const double lo = pct(rng);
        const double hi = std::min(100.0, lo + pct(rng) / 2);
        const Eigen::VectorXd w = calculate_weights(cert, labels, lo);
        const Eigen::VectorXd wide = calculate_weights(cert, labels, hi);

        for (int i = 0; i < n; ++i) {
            if (w(i) > 0.0) {
                CHECK(w(i) > 0.2);
                CHECK(w(i) <= 1.0);
                // Curriculum superset.
                CHECK(wide(i) > 0.0);
            }
            for (int k = 0; k < n; ++k) {
                if (labels(k) == labels(i) && cert(k) > cert(i)) {
                    CHECK(w(k) >= w(i));
                }
            }
        }
        // Each nonempty group's most certain sample has weight exactly one.
        for (int c = 0; c < 3; ++c) {
            double best = 0.0;
            for (int i = 0; i < n; ++i) {
                if (labels(i) == c) best = std::max(best, w(i));
            }
            if ((labels.array() == c).any()) {
                CHECK(best == 1.0);
            }
        }
    }
}

TEST_CASE("exclusion invariants over random instances") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> size(10, 400);
    std::uniform_real_distribution<double> u;
    std::uniform_int_distribution<int> classes_dist(2, 5);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng);
        const int classes = classes_dist(rng);
        Eigen::VectorXd cert(n);
        Eigen::VectorXi labels(n);
        InclusionMask in(n);
        for (int i = 0; i < n; ++i) {
            cert(i) = u(rng);
            labels(i) = static_cast<int>(u(rng) * classes);
            in(i) = u(rng) < 0.8;
        }
        Eigen::VectorXd raw(classes);
        for (auto& v : raw) v = u(rng) + 0.05;
        const auto cp = make_proportions(raw / raw.sum(), ProportionKind::guessed);
        const auto out = exclude_by_proportion(labels, cert, in, cp, n);

        for (int c = 0; c < classes; ++c) {
            const Eigen::Index cap = static_cast<Eigen::Index>(std::floor(cp[c] * n + 1e-9));
            Eigen::Index before = 0;
            Eigen::Index after = 0;
            double min_kept = 2.0;
            double max_removed = -1.0;
            for (int i = 0; i < n; ++i) {
                if (labels(i) != c) continue;
                before += in(i) ? 1 : 0;
                after += out(i) ? 1 : 0;
                if (out(i)) min_kept = std::min(min_kept, cert(i));
                if (in(i) && !out(i)) max_removed = std::max(max_removed, cert(i));
            }
            CHECK(after <= cap);
            CHECK(after == std::min(before, cap));
            CHECK(max_removed <= min_kept);
        }
        // Never adds samples.
        CHECK((out && !in).count() == 0);
    }
}

TEST_CASE("balanced predictions with exact proportions lose at most one sample per class") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u;
    const int per_class = 333;
    Eigen::VectorXi labels(3 * per_class);
    Eigen::VectorXd cert(3 * per_class);
    for (int i = 0; i < labels.size(); ++i) {
        labels(i) = i % 3;
        cert(i) = u(rng);
    }
    const auto cp = class_proportions(labels, 3);
    const auto out = exclude_by_proportion(labels, cert, InclusionMask::Constant(labels.size(), true), cp, labels.size());
    CHECK(labels.size() - out.count() <= 3);
}

TEST_CASE("proportion distance") {
    const auto a = make_proportions(vec({0.6, 0.4}), ProportionKind::guessed);
    const auto b = make_proportions(vec({0.5, 0.5}), ProportionKind::guessed);
    CHECK(proportion_distance(a, a) == 0.0);
    CHECK(proportion_distance(a, b) == doctest::Approx(0.2));
    CHECK(proportion_distance(make_proportions(vec({1, 0}), ProportionKind::guessed),
                              make_proportions(vec({0, 1}), ProportionKind::guessed)) == 2.0);
}

TEST_CASE("proportions must lie on the simplex") {
    CHECK_THROWS_AS(make_proportions(vec({0.6, 0.6}), ProportionKind::guessed), ConfigError);
    CHECK_THROWS_AS(make_proportions(vec({1.2, -0.2}), ProportionKind::guessed), ConfigError);
}

TEST_CASE("anomaly perturbation") {
    const auto cp = make_proportions(vec({0.98, 0.02}), ProportionKind::true_target);
    const auto up = perturb_anomaly(cp, 0.3, 1, +1);
    CHECK(up[1] == doctest::Approx(0.026));
    CHECK(up[0] == doctest::Approx(0.974));
    const auto down = perturb_anomaly(cp, 0.3, 1, -1);
    CHECK(down[1] == doctest::Approx(0.014));
    std::mt19937_64 rng(0);
    const auto same = perturb_proportions(cp, 0.0, PerturbMode::anomaly, 1, rng);
    CHECK(proportion_distance(same, cp) == 0.0);
    CHECK_THROWS_AS(perturb_proportions(cp, 1.5, PerturbMode::anomaly, 1, rng), ConfigError);
}

TEST_CASE("perturbation contracts over random instances") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u;
    std::uniform_int_distribution<int> classes_dist(2, 6);
    for (int trial = 0; trial < 100; ++trial) {
        const int classes = classes_dist(rng);
        Eigen::VectorXd raw(classes);
        for (auto& v : raw) v = u(rng) + 0.05;
        const auto cp = make_proportions(raw / raw.sum(), ProportionKind::true_target);
        const double room = 2.0 * (1.0 - cp.values.minCoeff());
        const double e = u(rng) * std::min(room, 0.5);
        const auto p = perturb_proportions(cp, e, PerturbMode::multiclass, 0, rng);
        CHECK(std::abs(p.values.sum() - 1.0) < 1e-9);
        CHECK((p.values.array() >= 0.0).all());
        CHECK(std::abs(proportion_distance(p, cp) - e) < 1e-9);

        const double ea = u(rng) * 0.9;
        const auto two = make_proportions(vec({1.0 - cp[0] / 2, cp[0] / 2}), ProportionKind::true_target);
        const auto a = perturb_proportions(two, ea, PerturbMode::anomaly, 1, rng);
        CHECK(std::abs(std::abs(a[1] - two[1]) - ea * two[1]) < 1e-9);
        CHECK(std::abs(a.values.sum() - 1.0) < 1e-9);
    }
}

TEST_CASE("multiclass perturbation example and limits") {
    std::mt19937_64 rng(3);
    const auto cp = make_proportions(vec({0.5, 0.5}), ProportionKind::true_target);
    const auto p = perturb_proportions(cp, 0.2, PerturbMode::multiclass, 0, rng);
    CHECK(proportion_distance(p, cp) == doctest::Approx(0.2));
    CHECK(std::abs(p[0] - 0.5) == doctest::Approx(0.1));
    CHECK_THROWS_AS(perturb_proportions(cp, 1.5, PerturbMode::multiclass, 0, rng), ConfigError);
}

TEST_CASE("source selection") {
    data::LabeledDataset src;
    src.num_classes = 2;
    src.features = Eigen::MatrixXf(6, 1);
    src.features << 0, 1, 2, 3, 4, 5;
    src.labels = Eigen::VectorXi(6);
    src.labels << 0, 1, 0, 1, 0, 1;

    std::mt19937_64 rng(1);
    CHECK(select_source(src, 0, rng).features.rows() == 0);

    std::mt19937_64 a(4), b(4);
    const auto full = select_source(src, 6, a);
    std::set<float> seen(full.features.data(), full.features.data() + 6);
    CHECK(seen.size() == 6);
    CHECK(full.weights.isOnes());
    for (int i = 0; i < 6; ++i) {
        CHECK(full.targets(i, src.labels(static_cast<int>(full.features(i, 0)))) == 1.0f);
    }
    CHECK(full.features == select_source(src, 6, b).features);

    data::LabeledDataset empty;
    empty.num_classes = 2;
    empty.features = Eigen::MatrixXf(0, 1);
    empty.labels = Eigen::VectorXi(0);
    CHECK_THROWS_AS(select_source(empty, 1, rng), ConfigError);
}

TEST_CASE("adapt with zero iterations leaves the model unchanged") {
    data::LabeledDataset src;
    src.num_classes = 2;
    src.features = Eigen::MatrixXf::Random(10, 2);
    src.labels = Eigen::VectorXi::Zero(10);
    src.labels.tail(5).setOnes();
    auto model = nn::init_model({2, 4, 2}, 3);
    const auto before = model;
    AdaptConfig config;
    config.iterations = 0;
    const auto report = adapt(model, src, src.features, class_proportions(src.labels, 2), config);
    CHECK(report.iterations.empty());
    CHECK(nn::identical(model, before));
}

TEST_CASE("adapt records one iteration per round and follows the schedule") {
    std::mt19937_64 rng(10);
    std::normal_distribution<float> normal;
    data::LabeledDataset src;
    src.num_classes = 2;
    src.features.resize(200, 2);
    src.labels.resize(200);
    for (int i = 0; i < 200; ++i) {
        src.labels(i) = i % 2;
        src.features(i, 0) = normal(rng) * 0.3f + (i % 2 ? 1.5f : -1.5f);
        src.features(i, 1) = normal(rng) * 0.3f;
    }
    auto model = nn::init_model({2, 8, 2}, 1);
    pretrain_source(model, src, TrainSettings{}, 2);
    AdaptConfig config;
    config.seed = 3;
    const auto report = adapt(model, src, src.features, class_proportions(src.labels, 2), config);
    REQUIRE(report.iterations.size() == 45);
    CHECK(report.iterations.front().percent == 12.0);
    CHECK(report.iterations.back().percent == 100.0);
    for (const auto& it : report.iterations) {
        Eigen::Index included = 0;
        for (auto c : it.included_per_class) included += c;
        CHECK(included <= 200);
        CHECK(it.source_selected == std::min<Eigen::Index>(included, 200));
    }
}

TEST_CASE("adapt config validation") {
    AdaptConfig config;
    config.iterations = 10;
    CHECK_THROWS_AS(validate(config), ConfigError);
    config.iterations = 45;
    config.source_ratio = -1.0;
    CHECK_THROWS_AS(validate(config), ConfigError);
    CHECK(parse_ablation("A3") == Ablation::class_agnostic);
    CHECK_THROWS_AS(parse_ablation("A9"), ConfigError);
}

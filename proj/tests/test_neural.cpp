#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pppl/error.hpp"
#include "pppl/nn/checkpoint.hpp"
#include "pppl/nn/loss.hpp"
#include "pppl/nn/train.hpp"

using namespace pppl;
using namespace pppl::nn;

namespace {

Batch<float> random_batch(int rows, int in, int classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal;
    std::uniform_int_distribution<int> label(0, classes - 1);
    std::uniform_real_distribution<float> weight(0.1f, 1.0f);
    Batch<float> b;
    b.features.resize(rows, in);
    for (Eigen::Index i = 0; i < b.features.size(); ++i) b.features.data()[i] = normal(rng);
    Eigen::VectorXi labels(rows);
    for (int i = 0; i < rows; ++i) labels(i) = label(rng);
    b.targets = one_hot<float>(labels, classes);
    b.weights.resize(rows);
    for (int i = 0; i < rows; ++i) b.weights(i) = weight(rng);
    return b;
}

}  // namespace

TEST_CASE("forward of a hand-set network") {
    Model<double> m({2, 2, 1});
    m.layer(0).weight << 1, -1, 2, 0.5;
    m.layer(0).bias << 0, -1;
    m.layer(1).weight << 1, 3;
    m.layer(1).bias << 0.5;
    Eigen::MatrixXd x(2, 2);
    x << 1, 2, -1, 0;
    // Row 0: hidden = relu([-1, 2]) = [0, 2]; out = 6.5. Row 1: hidden = relu([-1, -3]) = 0; out = 0.5.
    const Eigen::MatrixXd y = forward(m, x);
    CHECK(y(0, 0) == doctest::Approx(6.5));
    CHECK(y(1, 0) == doctest::Approx(0.5));

    Eigen::MatrixXd bad(1, 3);
    bad.setZero();
    CHECK_THROWS_AS(forward(m, bad), ShapeError);
}

TEST_CASE("model shape validation") {
    CHECK_THROWS_AS(Model<float>({3}), ConfigError);
    CHECK_THROWS_AS(Model<float>({3, 0, 2}), ConfigError);
    const auto m = init_model({4, 3, 2}, 1);
    CHECK(m.parameter_count() == 4 * 3 + 3 + 3 * 2 + 2);
    CHECK(m.layer(0).bias.isZero());
    const float bound = std::sqrt(6.0f / 7.0f);
    CHECK(m.layer(0).weight.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("init is deterministic per seed") {
    CHECK(identical(init_model({4, 8, 3}, 11), init_model({4, 8, 3}, 11)));
    CHECK_FALSE(identical(init_model({4, 8, 3}, 11), init_model({4, 8, 3}, 12)));
}

TEST_CASE("weighted mse examples") {
    Eigen::MatrixXf target(1, 2);
    target << 1, 0;
    Eigen::VectorXf w = Eigen::VectorXf::Ones(1);
    Eigen::MatrixXf s(1, 2);
    s << 1, 0;
    CHECK(weighted_mse_loss(s, target, w) == doctest::Approx(0.0));
    s << 0, 0;
    CHECK(weighted_mse_loss(s, target, w) == doctest::Approx(1.0));
    w(0) = 0.5f;
    CHECK(weighted_mse_loss(s, target, w) == doctest::Approx(0.5));
}

TEST_CASE("cross entropy of equal logits is ln 2") {
    Eigen::MatrixXf s = Eigen::MatrixXf::Zero(1, 2);
    Eigen::MatrixXf target(1, 2);
    target << 0, 1;
    CHECK(softmax_ce_loss(s, target, Eigen::VectorXf::Ones(1)) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("softmax sums to one and survives large logits") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd z(5);
        for (int k = 0; k < 5; ++k) z(k) = u(rng);
        const Eigen::VectorXd p = softmax(z);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((p.array() >= 0.0).all());
        // Shift invariance.
        const Eigen::VectorXd q = softmax((z.array() + 1000.0).matrix());
        CHECK((p - q).cwiseAbs().maxCoeff() < 1e-12);
    }
    Eigen::VectorXd big(2);
    big << 1000, 1000;
    CHECK(softmax(big)(0) == doctest::Approx(0.5));
}

TEST_CASE("one_hot rejects out-of-range labels") {
    Eigen::VectorXi labels(2);
    labels << 0, 3;
    CHECK_THROWS_AS(one_hot<float>(labels, 3), DataError);
}

TEST_CASE("gradient check passes on seeded 4-3-2 networks") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto model = init_model({4, 3, 2}, seed);
        const auto batch = random_batch(6, 4, 2, 100 + seed);
        CHECK(gradient_check(model, batch, LossKind::mse) < 1e-4);
        CHECK(gradient_check(model, batch, LossKind::ce) < 1e-4);
    }
}

TEST_CASE("analytic gradient of a single weight matches a direct difference") {
    // Independent of gradient_check: perturb one weight of a double model by hand.
    auto model = init_model<double>({3, 4, 2}, 5);
    const auto fb = random_batch(5, 3, 2, 9);
    Batch<double> b{fb.features.cast<double>(), fb.targets.cast<double>(), fb.weights.cast<double>()};
    const auto grads = loss_and_gradient(model, b, LossKind::mse).second;
    const double h = 1e-6;
    double& w = model.layer(0).weight(1, 2);
    const double saved = w;
    w = saved + h;
    const double up = weighted_mse_loss(forward(model, b.features), b.targets, b.weights);
    w = saved - h;
    const double down = weighted_mse_loss(forward(model, b.features), b.targets, b.weights);
    w = saved;
    CHECK(grads[0].weight(1, 2) == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("zero learning rate leaves parameters bitwise unchanged") {
    auto model = init_model({4, 6, 3}, 2);
    const auto before = model;
    auto opt = make_optimizer(model, 0.0, 0.9);
    const auto batch = random_batch(10, 4, 3, 7);
    for (int i = 0; i < 5; ++i) train_step(model, batch, LossKind::mse, opt);
    CHECK(identical(model, before));
}

TEST_CASE("zero weights give zero gradients") {
    const auto model = init_model({4, 6, 3}, 2);
    auto batch = random_batch(10, 4, 3, 7);
    batch.weights.setZero();
    const auto [loss, grads] = loss_and_gradient(model, batch, LossKind::mse);
    CHECK(loss == 0.0);
    for (const auto& g : grads) {
        CHECK(g.weight.isZero());
        CHECK(g.bias.isZero());
    }
}

TEST_CASE("full-batch training reduces the loss") {
    auto model = init_model({4, 16, 3}, 4);
    const auto batch = random_batch(64, 4, 3, 8);
    auto opt = make_optimizer(model, 0.05, 0.9);
    const double first = train_step(model, batch, LossKind::mse, opt);
    double last = first;
    for (int i = 0; i < 100; ++i) last = train_step(model, batch, LossKind::mse, opt);
    CHECK(last < first);
    CHECK(model.all_finite());
}

TEST_CASE("training is reproducible") {
    auto run = [] {
        auto model = init_model({4, 8, 3}, 1);
        auto opt = make_optimizer(model, 0.05, 0.9);
        std::mt19937_64 rng(42);
        const auto data = random_batch(50, 4, 3, 3);
        for (int e = 0; e < 3; ++e) train_epoch(model, opt, data, LossKind::mse, 8, rng);
        return model;
    };
    CHECK(identical(run(), run()));
}

TEST_CASE("optimizer and batch validation") {
    const auto model = init_model({2, 2}, 0);
    CHECK_THROWS_AS(make_optimizer(model, -0.1, 0.9), ConfigError);
    CHECK_THROWS_AS(make_optimizer(model, 0.1, 1.0), ConfigError);
    auto batch = random_batch(3, 2, 2, 0);
    batch.weights(0) = -1.0f;
    CHECK_THROWS_AS(validate(batch, 2), DataError);
    batch = random_batch(3, 2, 2, 0);
    batch.targets(0, 0) = 0.5f;
    CHECK_THROWS_AS(validate(batch, 2), DataError);
}

TEST_CASE("non-finite loss aborts before the update") {
    auto model = init_model({2, 2}, 0);
    auto batch = random_batch(3, 2, 2, 0);
    batch.features(0, 0) = std::numeric_limits<float>::infinity();
    const auto before = model;
    auto opt = make_optimizer(model, 0.1, 0.0);
    CHECK_THROWS_AS(train_step(model, batch, LossKind::mse, opt), NumericalError);
    CHECK(identical(model, before));
}

TEST_CASE("checkpoint round trip") {
    const auto model = init_model({3, 5, 2}, 9);
    std::stringstream buf;
    write_checkpoint(buf, model, LossKind::ce);
    const Checkpoint back = read_checkpoint(buf);
    CHECK(identical(back.model, model));
    CHECK(back.model.seed() == 9);
    CHECK(back.loss == LossKind::ce);
}

TEST_CASE("corrupt checkpoints are rejected") {
    const auto model = init_model({3, 5, 2}, 9);
    std::stringstream buf;
    write_checkpoint(buf, model, LossKind::mse);
    const std::string good = buf.str();

    SUBCASE("bad magic") {
        std::stringstream in("not-a-checkpoint\n");
        CHECK_THROWS_AS(read_checkpoint(in), DataError);
    }
    SUBCASE("truncated weights") {
        std::stringstream in(good.substr(0, good.size() - 4));
        CHECK_THROWS_AS(read_checkpoint(in), DataError);
    }
    SUBCASE("trailing bytes") {
        std::stringstream in(good + "x");
        CHECK_THROWS_AS(read_checkpoint(in), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.ckpt"), DataError);
    }
}

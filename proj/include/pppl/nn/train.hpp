#ifndef PPPL_NN_TRAIN_HPP
#define PPPL_NN_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pppl/error.hpp"
#include "pppl/nn/loss.hpp"
#include "pppl/nn/model.hpp"

namespace pppl::nn {

/// Samples with one-hot targets and per-sample weights.
template <typename Scalar>
struct Batch {
    Matrix<Scalar> features;
    Matrix<Scalar> targets;
    Vector<Scalar> weights;

    Eigen::Index size() const { return features.rows(); }
};

/// Throws unless rows agree, every target row is one-hot, and weights are nonnegative.
template <typename Scalar>
void validate(const Batch<Scalar>& batch, int output_dim) {
    if (batch.targets.rows() != batch.features.rows() || batch.weights.size() != batch.features.rows()) {
        throw ShapeError("batch rows disagree");
    }
    if (batch.targets.cols() != output_dim) {
        throw ShapeError("batch target width " + std::to_string(batch.targets.cols()) + " does not match model output " +
                         std::to_string(output_dim));
    }
    for (Eigen::Index i = 0; i < batch.targets.rows(); ++i) {
        const auto row = batch.targets.row(i);
        if ((row.array() == Scalar(1)).count() != 1 || (row.array() == Scalar(0)).count() != row.size() - 1) {
            throw DataError("batch target row " + std::to_string(i) + " is not one-hot");
        }
    }
    if ((batch.weights.array() < Scalar(0)).any() || !batch.weights.allFinite()) {
        throw DataError("batch weights must be finite and nonnegative");
    }
}

/// Per-layer parameter gradients, shaped like the model layers.
template <typename Scalar>
using Gradients = std::vector<Layer<Scalar>>;

/// Loss (double) and its analytic gradient by backpropagation.
template <typename Scalar>
std::pair<double, Gradients<Scalar>> loss_and_gradient(const Model<Scalar>& model, const Batch<Scalar>& batch,
                                                       LossKind kind) {
    ForwardCache<Scalar> cache;
    const Matrix<Scalar> scores = forward(model, batch.features, &cache);
    const double loss = loss_value(kind, scores, batch.targets, batch.weights);

    Gradients<Scalar> grads(model.num_layers());
    Matrix<Scalar> upstream = loss_gradient<Scalar>(kind, scores, batch.targets, batch.weights);
    for (int l = model.num_layers() - 1; l >= 0; --l) {
        const Matrix<Scalar>& input = cache.activations[l];
        grads[l].weight = upstream.transpose() * input;
        grads[l].bias = upstream.colwise().sum().transpose();
        if (l > 0) {
            Matrix<Scalar> back = upstream * model.layer(l).weight;
            upstream = (cache.pre_activations[l - 1].array() > Scalar(0)).select(back, Scalar(0));
        }
    }
    return {loss, std::move(grads)};
}

template <typename Scalar>
bool all_finite(const Gradients<Scalar>& grads) {
    return std::all_of(grads.begin(), grads.end(),
                       [](const Layer<Scalar>& g) { return g.weight.allFinite() && g.bias.allFinite(); });
}

/// SGD with momentum: v <- mu v + g; theta <- theta - lr v.
template <typename Scalar>
struct OptimizerState {
    double learning_rate = 0.01;
    double momentum = 0.9;
    Gradients<Scalar> velocity;
};

template <typename Scalar>
OptimizerState<Scalar> make_optimizer(const Model<Scalar>& model, double learning_rate, double momentum) {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning rate must be finite and nonnegative");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw ConfigError("momentum must lie in [0, 1)");
    }
    OptimizerState<Scalar> opt;
    opt.learning_rate = learning_rate;
    opt.momentum = momentum;
    for (const auto& layer : model.layers()) {
        opt.velocity.push_back({Matrix<Scalar>::Zero(layer.weight.rows(), layer.weight.cols()),
                                Vector<Scalar>::Zero(layer.bias.size())});
    }
    return opt;
}

/// One momentum-SGD step. Returns the loss before the update; aborts on non-finite values.
template <typename Scalar>
double train_step(Model<Scalar>& model, const Batch<Scalar>& batch, LossKind kind, OptimizerState<Scalar>& opt) {
    if (static_cast<int>(opt.velocity.size()) != model.num_layers()) {
        throw ShapeError("optimizer state does not match model");
    }
    auto [loss, grads] = loss_and_gradient(model, batch, kind);
    if (!std::isfinite(loss) || !all_finite(grads)) {
        throw NumericalError("non-finite loss or gradient; step aborted");
    }
    const Scalar mu = static_cast<Scalar>(opt.momentum);
    const Scalar lr = static_cast<Scalar>(opt.learning_rate);
    for (int l = 0; l < model.num_layers(); ++l) {
        auto& v = opt.velocity[l];
        v.weight = mu * v.weight + grads[l].weight;
        v.bias = mu * v.bias + grads[l].bias;
        model.layer(l).weight -= lr * v.weight;
        model.layer(l).bias -= lr * v.bias;
    }
    if (!model.all_finite()) {
        throw NumericalError("parameters became non-finite");
    }
    return loss;
}

/// Worst relative disagreement between the analytic gradient and central finite differences.
/// Runs in double regardless of the model's scalar type; denominator max(|a|, |b|, 1e-8).
template <typename Scalar>
double gradient_check(const Model<Scalar>& model, const Batch<Scalar>& batch, LossKind kind, double step = 1e-4) {
    Model<double> probe = model.template cast<double>();
    Batch<double> b{batch.features.template cast<double>(), batch.targets.template cast<double>(),
                    batch.weights.template cast<double>()};
    const Gradients<double> analytic = loss_and_gradient(probe, b, kind).second;

    auto loss_at = [&]() { return loss_value(kind, forward(probe, b.features), b.targets, b.weights); };
    double worst = 0.0;
    auto compare = [&](double* param, double a) {
        const double saved = *param;
        *param = saved + step;
        const double plus = loss_at();
        *param = saved - step;
        const double minus = loss_at();
        *param = saved;
        const double numeric = (plus - minus) / (2.0 * step);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    };
    for (int l = 0; l < probe.num_layers(); ++l) {
        auto& layer = probe.layer(l);
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
            compare(layer.weight.data() + i, analytic[l].weight.data()[i]);
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
            compare(layer.bias.data() + i, analytic[l].bias.data()[i]);
        }
    }
    return worst;
}

/// Rows of a matrix selected by index.
template <typename Derived>
Matrix<typename Derived::Scalar> gather_rows(const Eigen::MatrixBase<Derived>& m, const std::vector<Eigen::Index>& idx) {
    return m(idx, Eigen::all);
}

/// One shuffled pass of mini-batch steps over a weighted training set; returns the mean batch loss.
template <typename Scalar, typename Rng>
double train_epoch(Model<Scalar>& model, OptimizerState<Scalar>& opt, const Batch<Scalar>& data, LossKind kind,
                   int batch_size, Rng& rng) {
    if (batch_size < 1) {
        throw ConfigError("batch size must be positive");
    }
    const Eigen::Index n = data.size();
    if (n == 0) {
        return 0.0;
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += batch_size) {
        const Eigen::Index stop = std::min<Eigen::Index>(n, start + batch_size);
        std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + stop);
        Batch<Scalar> mini{data.features(idx, Eigen::all), data.targets(idx, Eigen::all),
                           data.weights(idx)};
        loss_sum += train_step(model, mini, kind, opt);
        ++batches;
    }
    return loss_sum / batches;
}

}  // namespace pppl::nn

#endif  // PPPL_NN_TRAIN_HPP

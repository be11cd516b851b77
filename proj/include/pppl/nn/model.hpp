#ifndef PPPL_NN_MODEL_HPP
#define PPPL_NN_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pppl/error.hpp"

namespace pppl::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One affine transition. `weight` is out x in, so a row-major batch maps as X W^T + b.
template <typename Scalar>
struct Layer {
    Matrix<Scalar> weight;
    Vector<Scalar> bias;
};

/// Fully connected network: rectifier on hidden layers, identity on the output layer.
template <typename Scalar>
class Model {
public:
    using scalar_type = Scalar;

    Model() = default;

    /// Zero-initialized parameters with the given shape chain.
    explicit Model(std::vector<int> dims, std::uint64_t seed = 0) : dims_(std::move(dims)), seed_(seed) {
        if (dims_.size() < 2) {
            throw ConfigError("model needs at least one layer transition");
        }
        for (int d : dims_) {
            if (d < 1) {
                throw ConfigError("model layer dimensions must be positive");
            }
        }
        layers_.resize(dims_.size() - 1);
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            layers_[l].weight = Matrix<Scalar>::Zero(dims_[l + 1], dims_[l]);
            layers_[l].bias = Vector<Scalar>::Zero(dims_[l + 1]);
        }
    }

    const std::vector<int>& layer_dims() const { return dims_; }
    int input_dim() const { return dims_.front(); }
    int output_dim() const { return dims_.back(); }
    int num_layers() const { return static_cast<int>(layers_.size()); }
    std::uint64_t seed() const { return seed_; }

    std::vector<Layer<Scalar>>& layers() { return layers_; }
    const std::vector<Layer<Scalar>>& layers() const { return layers_; }
    Layer<Scalar>& layer(int l) { return layers_[l]; }
    const Layer<Scalar>& layer(int l) const { return layers_[l]; }

    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (const auto& layer : layers_) {
            n += layer.weight.size() + layer.bias.size();
        }
        return n;
    }

    bool all_finite() const {
        for (const auto& layer : layers_) {
            if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
                return false;
            }
        }
        return true;
    }

    template <typename Other>
    Model<Other> cast() const {
        Model<Other> out(dims_, seed_);
        for (int l = 0; l < num_layers(); ++l) {
            out.layer(l).weight = layers_[l].weight.template cast<Other>();
            out.layer(l).bias = layers_[l].bias.template cast<Other>();
        }
        return out;
    }

private:
    std::vector<int> dims_;
    std::uint64_t seed_ = 0;
    std::vector<Layer<Scalar>> layers_;
};

/// True when both models have the same shape and bitwise-equal parameters.
template <typename Scalar>
bool identical(const Model<Scalar>& a, const Model<Scalar>& b) {
    if (a.layer_dims() != b.layer_dims()) {
        return false;
    }
    for (int l = 0; l < a.num_layers(); ++l) {
        const auto& la = a.layer(l);
        const auto& lb = b.layer(l);
        if (std::memcmp(la.weight.data(), lb.weight.data(), sizeof(Scalar) * la.weight.size()) != 0 ||
            std::memcmp(la.bias.data(), lb.bias.data(), sizeof(Scalar) * la.bias.size()) != 0) {
            return false;
        }
    }
    return true;
}

/// Glorot-style uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
template <typename Scalar = float>
Model<Scalar> init_model(const std::vector<int>& dims, std::uint64_t seed) {
    if (dims.empty()) {
        throw ConfigError("empty layer dimension list");
    }
    Model<Scalar> model(dims, seed);
    std::mt19937_64 rng(seed);
    for (auto& layer : model.layers()) {
        const double fan_in = static_cast<double>(layer.weight.cols());
        const double fan_out = static_cast<double>(layer.weight.rows());
        std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / (fan_in + fan_out)),
                                                    std::sqrt(6.0 / (fan_in + fan_out)));
        // Column-major fill; the layout is part of the determinism contract.
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
            layer.weight.data()[i] = static_cast<Scalar>(dist(rng));
        }
    }
    return model;
}

/// Intermediate values kept for backpropagation. `activations[0]` is the input.
template <typename Scalar>
struct ForwardCache {
    std::vector<Matrix<Scalar>> activations;
    std::vector<Matrix<Scalar>> pre_activations;
};

template <typename Scalar, typename Derived>
Matrix<Scalar> forward(const Model<Scalar>& model, const Eigen::MatrixBase<Derived>& features,
                       ForwardCache<Scalar>* cache) {
    if (features.cols() != model.input_dim()) {
        throw ShapeError("feature width " + std::to_string(features.cols()) + " does not match model input " +
                         std::to_string(model.input_dim()));
    }
    Matrix<Scalar> current = features.template cast<Scalar>();
    if (cache) {
        cache->activations.clear();
        cache->pre_activations.clear();
        cache->activations.push_back(current);
    }
    const int last = model.num_layers() - 1;
    for (int l = 0; l <= last; ++l) {
        const auto& layer = model.layer(l);
        Matrix<Scalar> z = current * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        if (l == last) {
            current = std::move(z);
        } else {
            current = z.cwiseMax(Scalar(0));
            if (cache) {
                cache->pre_activations.push_back(std::move(z));
                cache->activations.push_back(current);
            }
        }
    }
    return current;
}

/// Raw output scores, one row per sample, one column per class.
template <typename Scalar, typename Derived>
Matrix<Scalar> forward(const Model<Scalar>& model, const Eigen::MatrixBase<Derived>& features) {
    return forward<Scalar>(model, features, static_cast<ForwardCache<Scalar>*>(nullptr));
}

}  // namespace pppl::nn

#endif  // PPPL_NN_MODEL_HPP

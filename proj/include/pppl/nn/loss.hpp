#ifndef PPPL_NN_LOSS_HPP
#define PPPL_NN_LOSS_HPP

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "pppl/error.hpp"
#include "pppl/nn/model.hpp"

namespace pppl::nn {

enum class LossKind { mse, ce };

inline std::string_view to_string(LossKind kind) { return kind == LossKind::mse ? "mse" : "ce"; }

inline LossKind parse_loss_kind(std::string_view text) {
    if (text == "mse") {
        return LossKind::mse;
    }
    if (text == "ce") {
        return LossKind::ce;
    }
    throw ConfigError("unknown loss kind '" + std::string(text) + "' (expected mse or ce)");
}

/// N x M one-hot matrix for integer labels in [0, num_classes).
template <typename Scalar = float, typename Derived>
Matrix<Scalar> one_hot(const Eigen::MatrixBase<Derived>& labels, int num_classes) {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(labels.size(), num_classes);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const int c = static_cast<int>(labels(i));
        if (c < 0 || c >= num_classes) {
            throw DataError("label " + std::to_string(c) + " outside [0, " + std::to_string(num_classes) + ")");
        }
        out(i, c) = Scalar(1);
    }
    return out;
}

/// Index of the single 1 in a one-hot row.
template <typename Derived>
Eigen::Index hot_index(const Eigen::MatrixBase<Derived>& row) {
    Eigen::Index idx = 0;
    row.maxCoeff(&idx);
    return idx;
}

/// Stable softmax of a score vector (row or column), returned as a column.
template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& scores) {
    using Scalar = typename Derived::Scalar;
    const Eigen::VectorXd z = scores.template cast<double>().reshaped();
    const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp().matrix();
    return (e / e.sum()).template cast<Scalar>();
}

/// log(sum(exp(z))) with max subtraction.
template <typename Derived>
double log_sum_exp(const Eigen::MatrixBase<Derived>& z) {
    const Eigen::VectorXd v = z.template cast<double>().reshaped();
    const double m = v.maxCoeff();
    return m + std::log((v.array() - m).exp().sum());
}

template <typename DS, typename DT, typename DW>
void check_loss_shapes(const Eigen::MatrixBase<DS>& scores, const Eigen::MatrixBase<DT>& targets,
                       const Eigen::MatrixBase<DW>& weights) {
    if (scores.rows() != targets.rows() || scores.cols() != targets.cols() || weights.size() != scores.rows()) {
        throw ShapeError("loss inputs disagree: scores " + std::to_string(scores.rows()) + "x" +
                         std::to_string(scores.cols()) + ", targets " + std::to_string(targets.rows()) + "x" +
                         std::to_string(targets.cols()) + ", weights " + std::to_string(weights.size()));
    }
}

/// (1/N) sum_i w_i ||s_i - y_i||^2, accumulated in double.
template <typename DS, typename DT, typename DW>
double weighted_mse_loss(const Eigen::MatrixBase<DS>& scores, const Eigen::MatrixBase<DT>& targets,
                         const Eigen::MatrixBase<DW>& weights) {
    check_loss_shapes(scores, targets, weights);
    const Eigen::Index n = scores.rows();
    if (n == 0) {
        return 0.0;
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sq = (scores.row(i).template cast<double>() - targets.row(i).template cast<double>()).squaredNorm();
        total += static_cast<double>(weights(i)) * sq;
    }
    return total / static_cast<double>(n);
}

/// (1/N) sum_i w_i * -log softmax(s_i)[y_i].
template <typename DS, typename DT, typename DW>
double softmax_ce_loss(const Eigen::MatrixBase<DS>& scores, const Eigen::MatrixBase<DT>& targets,
                       const Eigen::MatrixBase<DW>& weights) {
    check_loss_shapes(scores, targets, weights);
    const Eigen::Index n = scores.rows();
    if (n == 0) {
        return 0.0;
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = static_cast<double>(weights(i));
        if (w == 0.0) {
            continue;
        }
        const Eigen::Index label = hot_index(targets.row(i));
        total += w * (log_sum_exp(scores.row(i)) - static_cast<double>(scores(i, label)));
    }
    return total / static_cast<double>(n);
}

template <typename DS, typename DT, typename DW>
double loss_value(LossKind kind, const Eigen::MatrixBase<DS>& scores, const Eigen::MatrixBase<DT>& targets,
                  const Eigen::MatrixBase<DW>& weights) {
    return kind == LossKind::mse ? weighted_mse_loss(scores, targets, weights)
                                 : softmax_ce_loss(scores, targets, weights);
}

/// d(loss)/d(scores), same shape as the scores.
template <typename Scalar, typename DT, typename DW>
Matrix<Scalar> loss_gradient(LossKind kind, const Matrix<Scalar>& scores, const Eigen::MatrixBase<DT>& targets,
                             const Eigen::MatrixBase<DW>& weights) {
    check_loss_shapes(scores, targets, weights);
    const Eigen::Index n = scores.rows();
    Matrix<Scalar> grad(scores.rows(), scores.cols());
    if (n == 0) {
        return grad;
    }
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar w = static_cast<Scalar>(weights(i));
        if (kind == LossKind::mse) {
            grad.row(i) = (Scalar(2) * w * inv_n) * (scores.row(i) - targets.row(i).template cast<Scalar>());
        } else {
            grad.row(i) = (w * inv_n) * (softmax(scores.row(i)).transpose() - targets.row(i).template cast<Scalar>());
        }
    }
    return grad;
}

}  // namespace pppl::nn

#endif  // PPPL_NN_LOSS_HPP

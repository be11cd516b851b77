#include "pppl/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pppl/error.hpp"

namespace pppl::harness {

Metrics compute_metrics(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth, int num_classes,
                        int positive_class) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("prediction and truth vectors differ in length");
    }
    if (positive_class < 0 || positive_class >= num_classes) {
        throw ConfigError("positive class " + std::to_string(positive_class) + " outside [0, " +
                          std::to_string(num_classes) + ")");
    }
    Metrics m;
    m.positive_class = positive_class;
    m.confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (truth(i) < 0 || truth(i) >= num_classes || predicted(i) < 0 || predicted(i) >= num_classes) {
            throw DataError("class index outside [0, " + std::to_string(num_classes) + ") at sample " +
                            std::to_string(i));
        }
        ++m.confusion(truth(i), predicted(i));
    }
    const double total = static_cast<double>(truth.size());
    m.accuracy = total > 0 ? m.confusion.trace() / total : 0.0;
    m.precision = Eigen::VectorXd::Zero(num_classes);
    m.recall = Eigen::VectorXd::Zero(num_classes);
    m.f1 = Eigen::VectorXd::Zero(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        const double tp = m.confusion(c, c);
        const double predicted_c = m.confusion.col(c).sum();
        const double actual_c = m.confusion.row(c).sum();
        m.precision(c) = predicted_c > 0 ? tp / predicted_c : 0.0;
        m.recall(c) = actual_c > 0 ? tp / actual_c : 0.0;
        const double pr = m.precision(c) + m.recall(c);
        m.f1(c) = pr > 0 ? 2.0 * m.precision(c) * m.recall(c) / pr : 0.0;
    }
    return m;
}

Eigen::VectorXi predict(const Model& model, const Eigen::MatrixXf& features) {
    return assign_pseudo_labels(nn::forward(model, features));
}

Metrics evaluate(const Model& model, const data::LabeledDataset& eval, int positive_class) {
    if (eval.num_classes != model.output_dim()) {
        throw ShapeError("evaluation set has " + std::to_string(eval.num_classes) + " classes, model outputs " +
                         std::to_string(model.output_dim()));
    }
    return compute_metrics(predict(model, eval.features), eval.labels, eval.num_classes, positive_class);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw ShapeError("spearman inputs differ in length");
    }
    if (x.size() < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mx = mean(rx);
    const double my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sxy / std::sqrt(sxx * syy);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace pppl::harness

#include "pppl/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pppl/error.hpp"

namespace pppl {

namespace {

// Indices sorted by certainty, most certain first; equal certainty keeps index order.
std::vector<Eigen::Index> rank_by_certainty(std::vector<Eigen::Index> members, const Eigen::VectorXd& certainty) {
    std::stable_sort(members.begin(), members.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return certainty(a) > certainty(b); });
    return members;
}

}  // namespace

Eigen::VectorXi assign_pseudo_labels(const ScoreMatrix& scores) {
    if (scores.cols() < 2) {
        throw ConfigError("pseudo-labelling needs at least 2 classes");
    }
    if (!scores.allFinite()) {
        throw NumericalError("non-finite scores while assigning pseudo-labels");
    }
    Eigen::VectorXi labels(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < scores.cols(); ++c) {
            if (scores(i, c) > scores(i, best)) {
                best = c;
            }
        }
        labels(i) = static_cast<int>(best);
    }
    return labels;
}

Eigen::VectorXd certainty_scores(const ScoreMatrix& scores) {
    if (scores.cols() < 2) {
        throw ConfigError("certainty needs at least 2 classes");
    }
    Eigen::VectorXd out(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        double first = -std::numeric_limits<double>::infinity();
        double second = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < scores.cols(); ++c) {
            const double v = scores(i, c);
            if (v > first) {
                second = first;
                first = v;
            } else if (v > second) {
                second = v;
            }
        }
        out(i) = first - second;
    }
    return out;
}

double inclusion_percent(int iteration, double base, double step) {
    if (iteration < 1) {
        throw ConfigError("iteration index starts at 1");
    }
    return std::min(base + step * iteration, 100.0);
}

Eigen::Index admitted_count(Eigen::Index group_size, double percent) {
    if (group_size == 0) {
        return 0;
    }
    // Scale before dividing so whole-number products such as 12 * 1000 / 100 stay exact.
    const double raw = percent * static_cast<double>(group_size) / 100.0;
    const auto count = static_cast<Eigen::Index>(std::ceil(raw - 1e-9));
    return std::clamp<Eigen::Index>(count, 1, group_size);
}

Eigen::VectorXd calculate_weights(const Eigen::VectorXd& certainty, const Eigen::VectorXi& pseudo_labels,
                                  double percent, bool class_aware) {
    if (certainty.size() != pseudo_labels.size()) {
        throw ShapeError("certainty and pseudo-label vectors differ in length");
    }
    if (!(percent > 0.0 && percent <= 100.0)) {
        throw ConfigError("inclusion percent must lie in (0, 100]");
    }
    const Eigen::Index n = certainty.size();
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(n);
    if (n == 0) {
        return weights;
    }

    std::vector<std::vector<Eigen::Index>> groups;
    if (class_aware) {
        const int classes = pseudo_labels.maxCoeff() + 1;
        groups.resize(static_cast<std::size_t>(std::max(classes, 1)));
        for (Eigen::Index i = 0; i < n; ++i) {
            if (pseudo_labels(i) < 0) {
                throw DataError("negative pseudo-label");
            }
            groups[static_cast<std::size_t>(pseudo_labels(i))].push_back(i);
        }
    } else {
        groups.emplace_back(static_cast<std::size_t>(n));
        std::iota(groups.front().begin(), groups.front().end(), Eigen::Index{0});
    }

    for (auto& group : groups) {
        if (group.empty()) {
            continue;
        }
        const auto ranked = rank_by_certainty(std::move(group), certainty);
        const Eigen::Index admitted = admitted_count(static_cast<Eigen::Index>(ranked.size()), percent);
        const double step = 4.0 / static_cast<double>(admitted);
        for (Eigen::Index j = 0; j < admitted; ++j) {
            weights(ranked[static_cast<std::size_t>(j)]) = 1.0 / (1.0 + step * static_cast<double>(j));
        }
    }
    return weights;
}

Eigen::Index proportion_cap(double share, Eigen::Index total) {
    return static_cast<Eigen::Index>(std::floor(share * static_cast<double>(total) + 1e-9));
}

InclusionMask exclude_by_proportion(const Eigen::VectorXi& pseudo_labels, const Eigen::VectorXd& certainty,
                                    const InclusionMask& included, const ClassProportions& cp, Eigen::Index total) {
    if (pseudo_labels.size() != certainty.size() || pseudo_labels.size() != included.size()) {
        throw ShapeError("exclusion inputs differ in length");
    }
    if (total < pseudo_labels.size()) {
        throw ConfigError("target total smaller than the number of scored samples");
    }
    InclusionMask out = included;
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(cp.num_classes()));
    for (Eigen::Index i = 0; i < pseudo_labels.size(); ++i) {
        if (!included(i)) {
            continue;
        }
        const int c = pseudo_labels(i);
        if (c < 0 || c >= cp.num_classes()) {
            throw DataError("pseudo-label " + std::to_string(c) + " has no class proportion");
        }
        members[static_cast<std::size_t>(c)].push_back(i);
    }
    for (int c = 0; c < cp.num_classes(); ++c) {
        auto& group = members[static_cast<std::size_t>(c)];
        const Eigen::Index cap = proportion_cap(cp[c], total);
        if (static_cast<Eigen::Index>(group.size()) <= cap) {
            continue;
        }
        const auto ranked = rank_by_certainty(std::move(group), certainty);
        for (std::size_t k = static_cast<std::size_t>(cap); k < ranked.size(); ++k) {
            out(ranked[k]) = false;
        }
    }
    return out;
}

}  // namespace pppl

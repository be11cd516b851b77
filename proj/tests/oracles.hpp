#ifndef PPPL_TESTS_ORACLES_HPP
#define PPPL_TESTS_ORACLES_HPP

// Sort-free O(n^2) reference versions of the weighting and exclusion rules.

#include <algorithm>
#include <vector>

#include "pppl/pseudo_label.hpp"

namespace oracle {

// Certainty rank of sample i inside its group: how many group members come before it
// (higher certainty, or equal certainty and lower index).
inline Eigen::Index rank(Eigen::Index i, const Eigen::VectorXd& cert, const std::vector<bool>& member) {
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < cert.size(); ++k) {
        if (k != i && member[k] && (cert(k) > cert(i) || (cert(k) == cert(i) && k < i))) {
            ++rank;
        }
    }
    return rank;
}

// Weights with an integer percent, so the admitted count is exact integer arithmetic.
inline Eigen::VectorXd weights(const Eigen::VectorXd& cert, const Eigen::VectorXi& labels, int percent,
                              bool class_aware) {
    const Eigen::Index n = cert.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<bool> member(n);
        Eigen::Index size = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            member[k] = !class_aware || labels(k) == labels(i);
            size += member[k] ? 1 : 0;
        }
        const Eigen::Index admitted = std::max<Eigen::Index>(1, (percent * size + 99) / 100);
        const Eigen::Index j = rank(i, cert, member);
        if (j < admitted) {
            w(i) = 1.0 / (1.0 + 4.0 * static_cast<double>(j) / static_cast<double>(admitted));
        }
    }
    return w;
}

// Exclusion with class shares given as integer fractions shares[c] / denom.
inline pppl::InclusionMask exclusion(const Eigen::VectorXi& labels, const Eigen::VectorXd& cert, const pppl::InclusionMask& in,
                              const std::vector<int>& shares, int denom, Eigen::Index total) {
    const Eigen::Index n = labels.size();
    pppl::InclusionMask out = in;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!in(i)) continue;
        std::vector<bool> member(n);
        Eigen::Index count = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            member[k] = in(k) && labels(k) == labels(i);
            count += member[k] ? 1 : 0;
        }
        const Eigen::Index cap = shares[labels(i)] * total / denom;
        if (count > cap && rank(i, cert, member) >= cap) {
            out(i) = false;
        }
    }
    return out;
}

}  // namespace oracle

#endif  // PPPL_TESTS_ORACLES_HPP

#ifndef PPPL_PSEUDO_LABEL_HPP
#define PPPL_PSEUDO_LABEL_HPP

#include <Eigen/Dense>

#include "pppl/proportions.hpp"

namespace pppl {

using ScoreMatrix = Eigen::MatrixXf;
using InclusionMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Per-sample state of one adaptation round.
struct PseudoState {
    Eigen::VectorXi pseudo_labels;
    Eigen::VectorXd certainty;
    Eigen::VectorXd weights;
    InclusionMask included;

    Eigen::Index size() const { return pseudo_labels.size(); }
};

/// Row-wise argmax; ties go to the lowest class index. Throws NumericalError on non-finite scores.
Eigen::VectorXi assign_pseudo_labels(const ScoreMatrix& scores);

/// Row-wise gap between the largest and second-largest raw score.
Eigen::VectorXd certainty_scores(const ScoreMatrix& scores);

/// min(base + step * iteration, 100).
double inclusion_percent(int iteration, double base = 10.0, double step = 2.0);

/// Number of samples admitted from a group of `group_size` at `percent`: ceil(percent/100 * size),
/// at least 1 for a nonempty group.
Eigen::Index admitted_count(Eigen::Index group_size, double percent);

/// Proportional-progressive weights. Within each pseudo-class group (or one global group when
/// `class_aware` is false) the top `percent`% by certainty get w_j = 1 / (1 + 4 j / L), rank j = 0
/// being the most certain; everything else gets 0. Certainty ties rank by sample index.
Eigen::VectorXd calculate_weights(const Eigen::VectorXd& certainty, const Eigen::VectorXi& pseudo_labels,
                                  double percent, bool class_aware = true);

/// Largest admissible count for a class: floor(share * total), tolerant of rounding noise.
Eigen::Index proportion_cap(double share, Eigen::Index total);

/// Drops the least-certain included samples of every class whose included count exceeds
/// floor(cp_c * total). Classes at or under their cap are untouched.
InclusionMask exclude_by_proportion(const Eigen::VectorXi& pseudo_labels, const Eigen::VectorXd& certainty,
                                    const InclusionMask& included, const ClassProportions& cp, Eigen::Index total);

}  // namespace pppl

#endif  // PPPL_PSEUDO_LABEL_HPP

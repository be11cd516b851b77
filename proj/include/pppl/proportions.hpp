#ifndef PPPL_PROPORTIONS_HPP
#define PPPL_PROPORTIONS_HPP

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace pppl {

enum class ProportionKind { true_target, guessed, source, perturbed };

std::string_view to_string(ProportionKind kind);

/// A point on the class simplex: one nonnegative share per class, summing to 1.
struct ClassProportions {
    Eigen::VectorXd values;
    ProportionKind kind = ProportionKind::guessed;

    int num_classes() const { return static_cast<int>(values.size()); }
    double operator[](int c) const { return values(c); }
};

/// Throws ConfigError unless nonnegative, finite, and summing to 1 within 1e-9.
void validate(const ClassProportions& cp);

ClassProportions make_proportions(Eigen::VectorXd values, ProportionKind kind);

/// count_c / N for labels in [0, num_classes).
ClassProportions class_proportions(const Eigen::VectorXi& labels, int num_classes,
                                   ProportionKind kind = ProportionKind::true_target);

/// L1 distance between two proportion vectors.
double proportion_distance(const ClassProportions& a, const ClassProportions& b);

enum class PerturbMode { anomaly, multiclass };

/// Anomalous-class share scaled by (1 + sign * error); the remaining classes absorb the
/// difference in proportion to their shares. `sign` must be +1 or -1.
ClassProportions perturb_anomaly(const ClassProportions& cp, double error, int anomaly_class, int sign);

/// Random simplex point at L1 distance exactly `error` from `cp`.
ClassProportions perturb_multiclass(const ClassProportions& cp, double error, std::mt19937_64& rng);

/// Dispatches on mode; anomaly mode draws the sign from `rng`.
ClassProportions perturb_proportions(const ClassProportions& cp, double error, PerturbMode mode, int anomaly_class,
                                     std::mt19937_64& rng);

}  // namespace pppl

#endif  // PPPL_PROPORTIONS_HPP

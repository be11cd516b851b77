#include "pppl/proportions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "pppl/error.hpp"

namespace pppl {

std::string_view to_string(ProportionKind kind) {
    switch (kind) {
        case ProportionKind::true_target: return "true";
        case ProportionKind::guessed: return "guessed";
        case ProportionKind::source: return "source";
        case ProportionKind::perturbed: return "perturbed";
    }
    return "unknown";
}

void validate(const ClassProportions& cp) {
    if (cp.values.size() < 1) {
        throw ConfigError("class proportions are empty");
    }
    if (!cp.values.allFinite() || (cp.values.array() < 0.0).any()) {
        throw ConfigError("class proportions must be finite and nonnegative");
    }
    if (std::abs(cp.values.sum() - 1.0) > 1e-9) {
        throw ConfigError("class proportions sum to " + std::to_string(cp.values.sum()) + ", not 1");
    }
}

ClassProportions make_proportions(Eigen::VectorXd values, ProportionKind kind) {
    ClassProportions cp{std::move(values), kind};
    validate(cp);
    return cp;
}

ClassProportions class_proportions(const Eigen::VectorXi& labels, int num_classes, ProportionKind kind) {
    if (labels.size() == 0) {
        throw DataError("cannot compute class proportions of an empty label set");
    }
    if (num_classes < 1) {
        throw ConfigError("number of classes must be positive");
    }
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(num_classes);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) < 0 || labels(i) >= num_classes) {
            throw DataError("label " + std::to_string(labels(i)) + " outside [0, " + std::to_string(num_classes) + ")");
        }
        counts(labels(i)) += 1.0;
    }
    return ClassProportions{counts / static_cast<double>(labels.size()), kind};
}

double proportion_distance(const ClassProportions& a, const ClassProportions& b) {
    if (a.values.size() != b.values.size()) {
        throw ShapeError("proportion vectors differ in length");
    }
    return (a.values - b.values).cwiseAbs().sum();
}

ClassProportions perturb_anomaly(const ClassProportions& cp, double error, int anomaly_class, int sign) {
    validate(cp);
    if (error < 0.0 || !std::isfinite(error)) {
        throw ConfigError("proportion error must be finite and nonnegative");
    }
    if (sign != 1 && sign != -1) {
        throw ConfigError("perturbation sign must be +1 or -1");
    }
    if (anomaly_class < 0 || anomaly_class >= cp.num_classes()) {
        throw ConfigError("anomaly class outside the proportion vector");
    }
    const double old_share = cp[anomaly_class];
    const double new_share = old_share * (1.0 + sign * error);
    if (new_share < 0.0 || new_share > 1.0) {
        throw ConfigError("proportion error " + std::to_string(error) + " leaves the simplex");
    }
    Eigen::VectorXd out = cp.values;
    const double old_rest = 1.0 - old_share;
    const double new_rest = 1.0 - new_share;
    const int others = cp.num_classes() - 1;
    for (int c = 0; c < cp.num_classes(); ++c) {
        if (c == anomaly_class) {
            out(c) = new_share;
        } else if (old_rest > 0.0) {
            out(c) = cp[c] * new_rest / old_rest;
        } else {
            out(c) = others > 0 ? new_rest / others : 0.0;
        }
    }
    return ClassProportions{out, ProportionKind::perturbed};
}

ClassProportions perturb_multiclass(const ClassProportions& cp, double error, std::mt19937_64& rng) {
    validate(cp);
    if (error < 0.0 || !std::isfinite(error)) {
        throw ConfigError("proportion error must be finite and nonnegative");
    }
    const int m = cp.num_classes();
    if (error == 0.0) {
        return ClassProportions{cp.values, ProportionKind::perturbed};
    }
    // Mass moved is error/2: taken from a "decrease" set, given to a disjoint "increase" set.
    const double half = error / 2.0;
    Eigen::Index smallest = 0;
    const double min_share = cp.values.minCoeff(&smallest);
    if (m < 2 || half > (1.0 - min_share) + 1e-12) {
        throw ConfigError("proportion error " + std::to_string(error) + " cannot be realised on the simplex");
    }

    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const int split = std::uniform_int_distribution<int>(1, m - 1)(rng);
    std::vector<int> increase(perm.begin(), perm.begin() + split);
    std::vector<int> decrease(perm.begin() + split, perm.end());
    double capacity = 0.0;
    for (int c : decrease) {
        capacity += cp[c];
    }
    if (capacity < half) {
        increase = {static_cast<int>(smallest)};
        decrease.clear();
        for (int c = 0; c < m; ++c) {
            if (c != smallest) {
                decrease.push_back(c);
            }
        }
    }

    std::uniform_real_distribution<double> weight(0.05, 1.0);
    Eigen::VectorXd out = cp.values;

    // Water-fill the decrease: amount_i = min(cp_i, t * r_i) with sum equal to half.
    std::vector<double> r(decrease.size());
    for (double& x : r) {
        x = weight(rng);
    }
    std::vector<std::size_t> order(decrease.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cp[decrease[a]] / r[a] < cp[decrease[b]] / r[b]; });
    double remaining = half;
    double weight_left = std::accumulate(r.begin(), r.end(), 0.0);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        const int c = decrease[i];
        const double t = remaining / weight_left;
        if (t * r[i] >= cp[c]) {
            remaining -= cp[c];
            weight_left -= r[i];
            out(c) = 0.0;
        } else {
            for (std::size_t q = k; q < order.size(); ++q) {
                const std::size_t j = order[q];
                out(decrease[j]) = cp[decrease[j]] - t * r[j];
            }
            remaining = 0.0;
            break;
        }
    }

    std::vector<double> s(increase.size());
    for (double& x : s) {
        x = weight(rng);
    }
    const double s_total = std::accumulate(s.begin(), s.end(), 0.0);
    for (std::size_t i = 0; i < increase.size(); ++i) {
        out(increase[i]) = cp[increase[i]] + half * s[i] / s_total;
    }
    return ClassProportions{out, ProportionKind::perturbed};
}

ClassProportions perturb_proportions(const ClassProportions& cp, double error, PerturbMode mode, int anomaly_class,
                                     std::mt19937_64& rng) {
    if (mode == PerturbMode::multiclass) {
        return perturb_multiclass(cp, error, rng);
    }
    validate(cp);
    if (anomaly_class < 0 || anomaly_class >= cp.num_classes()) {
        throw ConfigError("anomaly class outside the proportion vector");
    }
    // Both signs must be feasible so that whether a call fails never depends on the draw.
    if (error > 1.0 || cp[anomaly_class] * (1.0 + error) > 1.0) {
        throw ConfigError("proportion error " + std::to_string(error) + " leaves the simplex");
    }
    const int sign = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
    return perturb_anomaly(cp, error, anomaly_class, sign);
}

}  // namespace pppl

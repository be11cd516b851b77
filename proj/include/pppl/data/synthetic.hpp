#ifndef PPPL_DATA_SYNTHETIC_HPP
#define PPPL_DATA_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pppl/data/dataset.hpp"

namespace pppl::data {

/// M isotropic Gaussian clusters centred on a circle. The target domain is an independent
/// draw from the same process, rotated by `theta_deg` about the origin.
DomainPair gen_rotated_gaussians(int per_class, int num_classes, double radius, double spread, double theta_deg,
                                 std::uint64_t seed);

/// Two interleaved half circles, centred on the origin; target rotated by `theta_deg`.
DomainPair gen_two_moons_shift(int per_class, double noise, double theta_deg, std::uint64_t seed);

/// Sinusoid + trend + Gaussian noise with injected point spikes.
struct SeriesSpec {
    int length = 6000;
    double period = 50.0;
    double amplitude = 1.0;
    double noise_scale = 0.1;
    double trend = 0.0;  // added slope per step
    int anomaly_count = 60;
    double magnitude_min = 0.6;
    double magnitude_max = 1.2;
    std::uint64_t seed = 0;
};

/// Throws ConfigError unless scales are positive, magnitudes ordered, and anomaly_count < length / 10.
void validate(const SeriesSpec& spec);

struct AnomalySeries {
    Eigen::VectorXd values;
    std::vector<bool> flags;
};

AnomalySeries gen_anomaly_series(const SeriesSpec& spec);

/// First difference, z-normalise (population std), then window of the current point and its
/// W-1 predecessors (oldest first). Label is the flag of the window's current point.
LabeledDataset window_preprocess(const Eigen::VectorXd& series, const std::vector<bool>& flags, int window);

/// The differenced, z-normalised series on its own.
Eigen::VectorXd normalized_differences(const Eigen::VectorXd& series);

}  // namespace pppl::data

#endif  // PPPL_DATA_SYNTHETIC_HPP

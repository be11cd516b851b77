#include "pppl/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "pppl/error.hpp"

namespace pppl::data {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

Eigen::Matrix2d rotation(double theta_deg) {
    const double t = theta_deg * std::numbers::pi / 180.0;
    Eigen::Matrix2d r;
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
}

LabeledDataset gaussian_draw(int per_class, int num_classes, double radius, double spread, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, spread);
    LabeledDataset ds;
    ds.num_classes = num_classes;
    ds.features.resize(static_cast<Eigen::Index>(per_class) * num_classes, 2);
    ds.labels.resize(ds.features.rows());
    Eigen::Index row = 0;
    for (int c = 0; c < num_classes; ++c) {
        const double angle = 2.0 * std::numbers::pi * c / num_classes;
        for (int i = 0; i < per_class; ++i, ++row) {
            const double x = radius * std::cos(angle) + noise(rng);
            const double y = radius * std::sin(angle) + noise(rng);
            ds.features(row, 0) = static_cast<float>(x);
            ds.features(row, 1) = static_cast<float>(y);
            ds.labels(row) = c;
        }
    }
    return ds;
}

LabeledDataset moons_draw(int per_class, double noise_sd, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> arc(0.0, std::numbers::pi);
    std::normal_distribution<double> noise(0.0, noise_sd);
    LabeledDataset ds;
    ds.num_classes = 2;
    ds.features.resize(2 * static_cast<Eigen::Index>(per_class), 2);
    ds.labels.resize(ds.features.rows());
    // Centre of the standard pair is (0.5, 0.25).
    for (Eigen::Index i = 0; i < per_class; ++i) {
        const double t = arc(rng);
        ds.features(i, 0) = static_cast<float>(std::cos(t) - 0.5 + noise(rng));
        ds.features(i, 1) = static_cast<float>(std::sin(t) - 0.25 + noise(rng));
        ds.labels(i) = 0;
    }
    for (Eigen::Index i = per_class; i < 2 * per_class; ++i) {
        const double t = arc(rng);
        ds.features(i, 0) = static_cast<float>(1.0 - std::cos(t) - 0.5 + noise(rng));
        ds.features(i, 1) = static_cast<float>(0.5 - std::sin(t) - 0.25 + noise(rng));
        ds.labels(i) = 1;
    }
    return ds;
}

void rotate_in_place(Eigen::MatrixXf& points, double theta_deg) {
    const Eigen::Matrix2f r = rotation(theta_deg).cast<float>();
    points = points * r.transpose();
}

}  // namespace

DomainPair gen_rotated_gaussians(int per_class, int num_classes, double radius, double spread, double theta_deg,
                                 std::uint64_t seed) {
    if (num_classes < 2 || per_class < 1) {
        throw ConfigError("rotated gaussians need at least 2 classes and 1 sample per class");
    }
    if (!(radius > 0.0) || !(spread > 0.0)) {
        throw ConfigError("rotated gaussians need positive radius and spread");
    }
    auto src_rng = stream(seed, 1);
    auto tgt_rng = stream(seed, 2);
    LabeledDataset source = gaussian_draw(per_class, num_classes, radius, spread, src_rng);
    source.provenance = "gaussians/source";
    LabeledDataset target = gaussian_draw(per_class, num_classes, radius, spread, tgt_rng);
    rotate_in_place(target.features, theta_deg);
    target.provenance = "gaussians/target";
    return {std::move(source), hide_labels(target)};
}

DomainPair gen_two_moons_shift(int per_class, double noise, double theta_deg, std::uint64_t seed) {
    if (per_class < 1 || !(noise >= 0.0)) {
        throw ConfigError("two moons need per_class >= 1 and nonnegative noise");
    }
    auto src_rng = stream(seed, 1);
    auto tgt_rng = stream(seed, 2);
    LabeledDataset source = moons_draw(per_class, noise, src_rng);
    source.provenance = "moons/source";
    LabeledDataset target = moons_draw(per_class, noise, tgt_rng);
    rotate_in_place(target.features, theta_deg);
    target.provenance = "moons/target";
    return {std::move(source), hide_labels(target)};
}

void validate(const SeriesSpec& spec) {
    if (spec.length < 2) {
        throw ConfigError("series length must be at least 2");
    }
    if (!(spec.period > 0.0) || !(spec.amplitude > 0.0) || !(spec.noise_scale > 0.0)) {
        throw ConfigError("series period, amplitude, and noise scale must be positive");
    }
    if (spec.anomaly_count < 0 || spec.anomaly_count * 10 >= spec.length) {
        throw ConfigError("anomaly count must be nonnegative and below length/10");
    }
    if (!(spec.magnitude_min > 0.0) || spec.magnitude_max < spec.magnitude_min) {
        throw ConfigError("anomaly magnitudes must satisfy 0 < min <= max");
    }
}

AnomalySeries gen_anomaly_series(const SeriesSpec& spec) {
    validate(spec);
    auto rng = stream(spec.seed, 3);
    std::normal_distribution<double> noise(0.0, spec.noise_scale);
    AnomalySeries out;
    out.values.resize(spec.length);
    out.flags.assign(static_cast<std::size_t>(spec.length), false);
    for (int t = 0; t < spec.length; ++t) {
        out.values(t) = spec.amplitude * std::sin(2.0 * std::numbers::pi * t / spec.period) + spec.trend * t + noise(rng);
    }
    // Position 0 has no predecessor and would vanish under differencing.
    std::vector<int> positions(static_cast<std::size_t>(spec.length - 1));
    std::iota(positions.begin(), positions.end(), 1);
    std::shuffle(positions.begin(), positions.end(), rng);
    std::uniform_real_distribution<double> magnitude(spec.magnitude_min, spec.magnitude_max);
    std::bernoulli_distribution up(0.5);
    for (int k = 0; k < spec.anomaly_count; ++k) {
        const int t = positions[static_cast<std::size_t>(k)];
        out.values(t) += (up(rng) ? 1.0 : -1.0) * magnitude(rng);
        out.flags[static_cast<std::size_t>(t)] = true;
    }
    return out;
}

Eigen::VectorXd normalized_differences(const Eigen::VectorXd& series) {
    if (series.size() < 2) {
        throw DataError("series too short to difference");
    }
    const Eigen::Index n = series.size() - 1;
    Eigen::VectorXd diff = series.tail(n) - series.head(n);
    const double mean = diff.mean();
    const double sd = std::sqrt((diff.array() - mean).square().mean());
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw DataError("degenerate series: differenced values have zero standard deviation");
    }
    return (diff.array() - mean) / sd;
}

LabeledDataset window_preprocess(const Eigen::VectorXd& series, const std::vector<bool>& flags, int window) {
    if (window < 1) {
        throw ConfigError("window length must be at least 1");
    }
    if (static_cast<Eigen::Index>(flags.size()) != series.size()) {
        throw ShapeError("series and flag lengths differ");
    }
    if (series.size() <= window + 1) {
        throw DataError("series of length " + std::to_string(series.size()) + " too short for window " +
                        std::to_string(window));
    }
    const Eigen::VectorXd z = normalized_differences(series);
    const Eigen::Index samples = z.size() - (window - 1);
    LabeledDataset ds;
    ds.num_classes = 2;
    ds.provenance = "series/window" + std::to_string(window);
    ds.features.resize(samples, window);
    ds.labels.resize(samples);
    for (Eigen::Index s = 0; s < samples; ++s) {
        // Differenced index k = s + window - 1 pairs with original point k + 1.
        const Eigen::Index k = s + window - 1;
        ds.features.row(s) = z.segment(s, window).cast<float>().transpose();
        ds.labels(s) = flags[static_cast<std::size_t>(k + 1)] ? 1 : 0;
    }
    return ds;
}

}  // namespace pppl::data

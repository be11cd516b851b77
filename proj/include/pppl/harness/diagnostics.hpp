#ifndef PPPL_HARNESS_DIAGNOSTICS_HPP
#define PPPL_HARNESS_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "pppl/harness/experiment.hpp"

namespace pppl::harness {

/// Self-training on pseudo-labels where every wrong pseudo-label is dropped using the hidden
/// truth. Entry 0 is the pretrained accuracy, entry e the accuracy after epoch e.
std::vector<double> oracle_filter_curve(const ExperimentConfig& config, const PreparedSeed& prepared);

struct OracleFilterResult {
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<double>> curves;
};

OracleFilterResult diag_oracle_filter(const ExperimentConfig& config);

/// Wrong-prediction ratio by certainty bucket. Bucket b covers certainty in [b/B, (b+1)/B);
/// certainty >= 1 lands in the top bucket.
struct BucketResult {
    int buckets = 10;
    std::vector<std::optional<double>> mean_wrong_ratio;          // averaged over classes occupying the bucket
    std::vector<std::vector<std::optional<double>>> class_ratio;  // [class][bucket]
    std::vector<std::vector<Eigen::Index>> class_counts;          // [class][bucket]
};

BucketResult certainty_buckets(const ScoreMatrix& scores, const Eigen::VectorXi& truth, int buckets = 10);

BucketResult diag_certainty_buckets(const Model& model, const data::LabeledDataset& target, int buckets = 10);

/// Spearman correlation between bucket index and mean wrong ratio over occupied buckets.
double bucket_trend(const BucketResult& result);

struct TimingResult {
    std::vector<int> injection_epochs;
    std::vector<double> final_accuracy;  // per injection epoch
    std::vector<double> delta;           // final_accuracy - final accuracy of the latest injection
};

/// Oracle-filtered training with a fixed wrong-labelled set of poison_fraction * N_t samples
/// included from each injection epoch onward.
TimingResult timing_injection(const ExperimentConfig& config, const PreparedSeed& prepared,
                              const std::vector<int>& injection_epochs, double poison_fraction);

struct TimingSweep {
    std::vector<std::uint64_t> seeds;
    std::vector<TimingResult> runs;
};

TimingSweep diag_timing_injection(const ExperimentConfig& config, const std::vector<int>& injection_epochs,
                                  double poison_fraction);

}  // namespace pppl::harness

#endif  // PPPL_HARNESS_DIAGNOSTICS_HPP

#ifndef PPPL_HARNESS_EXPERIMENT_HPP
#define PPPL_HARNESS_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pppl/adapt.hpp"
#include "pppl/harness/config.hpp"
#include "pppl/harness/metrics.hpp"

namespace pppl::harness {

/// Source/target domains of one seed plus the class proportions of each.
struct TaskData {
    data::LabeledDataset source;
    data::UnlabeledDataset target;
    ClassProportions source_cp;
    ClassProportions target_cp;
};

TaskData make_task(const ExperimentConfig& config, std::uint64_t seed);

std::vector<int> layer_dims(const ExperimentConfig& config, const TaskData& task);

double headline(const Metrics& m, Headline h);

/// Data, pretrained model, and source-only target metrics for one seed.
struct PreparedSeed {
    std::uint64_t seed = 0;
    TaskData task;
    Model pretrained;
    Metrics source_only;
};

PreparedSeed prepare_seed(const ExperimentConfig& config, std::uint64_t seed, nn::LossKind pretrain_loss);

/// Which class proportions the exclusion step enforces for a run.
struct ProportionChoice {
    enum class Source { configured, true_target, source_domain, perturbed } source = Source::configured;
    double error = 0.0;  // for perturbed
};

struct RunVariant {
    std::optional<Ablation> ablation;  // defaults to the config's
    ProportionChoice proportions;
};

struct SeedRecord {
    std::uint64_t seed = 0;
    std::string error;  // nonempty when the seed failed
    Metrics source_only;
    Metrics adapted;
    double source_only_headline = 0.0;
    double adapted_headline = 0.0;
    ClassProportions enforced;
    AdaptReport report;
};

/// Resolves the proportions a variant enforces.
ClassProportions choose_proportions(const ExperimentConfig& config, const PreparedSeed& prepared,
                                    const ProportionChoice& choice);

/// Adapts a copy of the prepared model and evaluates it on the hidden target labels.
SeedRecord adapt_seed(const ExperimentConfig& config, const PreparedSeed& prepared, const RunVariant& variant);

struct Summary {
    double source_only_mean = 0.0;
    double source_only_std = 0.0;
    double adapted_mean = 0.0;
    double adapted_std = 0.0;
    int completed = 0;
    int failed = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SeedRecord> seeds;
    Summary summary;
};

Summary summarize(const std::vector<SeedRecord>& records);

/// Pretrain, record the source-only baseline, adapt, record again; per seed. A failing seed is
/// recorded with its diagnostic and the remaining seeds still run.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunVariant& variant = {});

/// Columns of headline values, one row per seed.
struct ComparisonTable {
    std::vector<std::string> columns;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<double>> values;  // [seed][column]
    std::vector<double> source_only;          // per seed
    std::vector<double> means;
    std::vector<double> stds;
    std::optional<double> cp_difference;  // mean L1 distance between source and target proportions
};

/// Full method plus each requested variant, sharing data and pretrained models per seed.
ComparisonTable run_ablation(const ExperimentConfig& config, const std::vector<Ablation>& variants);

/// One column per proportion error, then source proportions (when requested) and true proportions.
ComparisonTable run_cp_sweep(const ExperimentConfig& config, const std::vector<double>& errors,
                             bool include_source_cp);

std::string error_column_name(double error);

}  // namespace pppl::harness

#endif  // PPPL_HARNESS_EXPERIMENT_HPP

#ifndef PPPL_HARNESS_CONFIG_HPP
#define PPPL_HARNESS_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pppl/adapt.hpp"
#include "pppl/data/synthetic.hpp"
#include "pppl/proportions.hpp"

namespace pppl::harness {

inline constexpr int kConfigFormat = 1;

enum class TaskKind { gaussians, moons, anomaly, csv };

struct TaskSpec {
    TaskKind kind = TaskKind::gaussians;
    // gaussians / moons
    int per_class = 500;
    int classes = 3;
    double radius = 2.0;
    double spread = 1.0;
    double noise = 0.1;
    double theta = 35.0;
    // anomaly
    int window = 64;
    data::SeriesSpec source_series;
    data::SeriesSpec target_series;
    // csv
    std::string source_csv;
    std::string target_csv;
    std::string label_column = "label";
};

enum class Headline { accuracy, f1 };

struct DiagnosticSettings {
    int epochs = 10;
    int passes_per_epoch = 1;
    int batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int buckets = 10;
    std::vector<int> injection_epochs{1, 4, 7, 10};
    double poison_fraction = 0.1;
};

struct SweepSettings {
    std::vector<double> errors{0.1, 0.2, 0.3};
    bool include_source_cp = true;
    PerturbMode mode = PerturbMode::multiclass;
};

struct ExperimentConfig {
    TaskSpec task;
    std::vector<int> hidden{32, 32};
    TrainSettings pretrain;
    AdaptConfig adapt;
    ProportionKind enforce = ProportionKind::true_target;  // true_target or source
    int positive_class = 1;
    Headline headline = Headline::accuracy;
    DiagnosticSettings diagnostics;
    SweepSettings sweep;
    std::vector<Ablation> ablation_variants{Ablation::cross_entropy, Ablation::no_curriculum, Ablation::class_agnostic,
                                            Ablation::no_proportions};
    std::vector<std::uint64_t> seeds{0};
    std::string output_dir;
};

/// Parses and validates a config document; unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved config, including every default, as embedded in reports.
nlohmann::json to_json(const ExperimentConfig& config);

/// Task-appropriate defaults: anomaly tasks get window/series defaults and an F1 headline.
ExperimentConfig default_config(TaskKind kind);

std::string_view to_string(TaskKind kind);

/// Independent sub-seeds per purpose, so that e.g. the data draw does not depend on the ablation.
enum class SeedStream : std::uint32_t { data = 1, init, pretrain, adapt, perturb, diagnostic };
std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream);

}  // namespace pppl::harness

#endif  // PPPL_HARNESS_CONFIG_HPP

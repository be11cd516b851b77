#ifndef PPPL_ADAPT_HPP
#define PPPL_ADAPT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pppl/data/dataset.hpp"
#include "pppl/nn/loss.hpp"
#include "pppl/nn/model.hpp"
#include "pppl/nn/train.hpp"
#include "pppl/proportions.hpp"
#include "pppl/pseudo_label.hpp"

namespace pppl {

using Model = nn::Model<float>;

/// Optimiser and pass settings for one supervised training phase.
struct TrainSettings {
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    nn::LossKind loss = nn::LossKind::mse;
};

/// Variants that each remove one ingredient of the full method.
enum class Ablation {
    none,
    cross_entropy,     // A1: CE instead of MSE
    no_curriculum,     // A2: every target sample admitted from the first round
    class_agnostic,    // A3: one global certainty ranking instead of per pseudo-class
    no_proportions,    // A4: skip the class-proportion exclusion
};

std::string_view to_string(Ablation a);
Ablation parse_ablation(std::string_view text);

/// How many labeled source samples accompany the target samples each round.
enum class SourceMix {
    match,  // source_ratio times the positively-weighted target count, capped at the source size
    none,
    all,
};

std::string_view to_string(SourceMix m);
SourceMix parse_source_mix(std::string_view text);

struct AdaptConfig {
    int iterations = 45;
    double schedule_base = 10.0;
    double schedule_step = 2.0;
    SourceMix source_mix = SourceMix::match;
    double source_ratio = 1.0;
    int epochs_per_iteration = 1;
    int batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    Ablation ablation = Ablation::none;
    std::uint64_t seed = 0;
};

/// Throws ConfigError on non-positive sizes or a schedule that never reaches 100%.
void validate(const AdaptConfig& config);

struct IterationRecord {
    int iteration = 0;
    double percent = 0.0;
    std::vector<Eigen::Index> included_per_class;
    std::vector<Eigen::Index> excluded_per_class;
    double mean_weight = 0.0;  // over positively-weighted target samples
    Eigen::Index source_selected = 0;
    double train_loss = 0.0;
    // Filled by an observer that can see hidden labels; absent otherwise.
    std::optional<double> target_accuracy;
    std::optional<double> target_f1;
    std::optional<double> pseudo_label_error;
};

struct AdaptReport {
    std::vector<IterationRecord> iterations;
};

/// Called after each round's training with the round's pseudo state (pre-training
/// predictions) and the updated model.
using AdaptObserver = std::function<void(IterationRecord&, const PseudoState&, const Model&)>;

/// Source samples chosen for one round, all with weight 1.
struct SourceSelection {
    Eigen::MatrixXf features;
    Eigen::MatrixXf targets;
    Eigen::VectorXf weights;
};

/// k samples uniformly without replacement (with replacement when k exceeds the source size).
SourceSelection select_source(const data::LabeledDataset& source, Eigen::Index k, std::mt19937_64& rng);

/// Supervised training on the labeled source with unit weights. Returns the per-epoch mean loss.
std::vector<double> pretrain_source(Model& model, const data::LabeledDataset& source, const TrainSettings& settings,
                                    std::uint64_t seed);

/// Scores, pseudo-labels, certainty, weights, and inclusion for one round.
PseudoState score_round(const Model& model, const Eigen::MatrixXf& target_features, double percent,
                        const ClassProportions& cp, Ablation ablation,
                        std::vector<Eigen::Index>* excluded_per_class = nullptr);

/// Iterative self-training with a certainty curriculum and class-proportion enforcement.
/// `model` is trained in place. Target labels never enter this function.
AdaptReport adapt(Model& model, const data::LabeledDataset& source, const Eigen::MatrixXf& target_features,
                  const ClassProportions& cp, const AdaptConfig& config, const AdaptObserver& observer = {});

}  // namespace pppl

#endif  // PPPL_ADAPT_HPP

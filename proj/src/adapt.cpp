#include "pppl/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pppl/error.hpp"

namespace pppl {

std::string_view to_string(Ablation a) {
    switch (a) {
        case Ablation::none: return "none";
        case Ablation::cross_entropy: return "A1";
        case Ablation::no_curriculum: return "A2";
        case Ablation::class_agnostic: return "A3";
        case Ablation::no_proportions: return "A4";
    }
    return "unknown";
}

Ablation parse_ablation(std::string_view text) {
    if (text == "none" || text == "PPPL") return Ablation::none;
    if (text == "A1") return Ablation::cross_entropy;
    if (text == "A2") return Ablation::no_curriculum;
    if (text == "A3") return Ablation::class_agnostic;
    if (text == "A4") return Ablation::no_proportions;
    throw ConfigError("unknown ablation '" + std::string(text) + "' (expected none, A1, A2, A3, or A4)");
}

std::string_view to_string(SourceMix m) {
    switch (m) {
        case SourceMix::match: return "match";
        case SourceMix::none: return "none";
        case SourceMix::all: return "all";
    }
    return "unknown";
}

SourceMix parse_source_mix(std::string_view text) {
    if (text == "match") return SourceMix::match;
    if (text == "none") return SourceMix::none;
    if (text == "all") return SourceMix::all;
    throw ConfigError("unknown source mix '" + std::string(text) + "' (expected match, none, or all)");
}

void validate(const AdaptConfig& config) {
    if (config.iterations < 0) {
        throw ConfigError("iterations must be nonnegative");
    }
    if (config.iterations > 0 && config.schedule_base + config.schedule_step * config.iterations < 100.0) {
        throw ConfigError("schedule never admits every sample: base + step * iterations < 100");
    }
    if (config.schedule_base < 0.0 || config.schedule_step < 0.0) {
        throw ConfigError("schedule base and step must be nonnegative");
    }
    if (!(config.source_ratio >= 0.0)) {
        throw ConfigError("source ratio must be nonnegative");
    }
    if (config.epochs_per_iteration < 1 || config.batch_size < 1) {
        throw ConfigError("epochs per iteration and batch size must be positive");
    }
}

SourceSelection select_source(const data::LabeledDataset& source, Eigen::Index k, std::mt19937_64& rng) {
    if (k < 0) {
        throw ConfigError("source selection size must be nonnegative");
    }
    const Eigen::Index n = source.size();
    if (k > 0 && n == 0) {
        throw ConfigError("cannot select from an empty source set");
    }
    std::vector<Eigen::Index> idx;
    if (k <= n) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        idx.assign(order.begin(), order.begin() + k);
    } else {
        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        idx.resize(static_cast<std::size_t>(k));
        for (auto& i : idx) {
            i = pick(rng);
        }
    }
    SourceSelection sel;
    sel.features = source.features(idx, Eigen::all);
    sel.targets = nn::one_hot<float>(source.labels(idx), source.num_classes);
    sel.weights = Eigen::VectorXf::Ones(k);
    return sel;
}

std::vector<double> pretrain_source(Model& model, const data::LabeledDataset& source, const TrainSettings& settings,
                                    std::uint64_t seed) {
    if (source.dim() != model.input_dim() || source.num_classes != model.output_dim()) {
        throw ShapeError("source data (" + std::to_string(source.dim()) + " features, " +
                         std::to_string(source.num_classes) + " classes) does not match model dims");
    }
    if (settings.epochs < 0) {
        throw ConfigError("pretrain epochs must be nonnegative");
    }
    std::vector<double> losses;
    if (settings.epochs == 0) {
        return losses;
    }
    nn::Batch<float> all{source.features, nn::one_hot<float>(source.labels, source.num_classes),
                         Eigen::VectorXf::Ones(source.size())};
    auto opt = nn::make_optimizer(model, settings.learning_rate, settings.momentum);
    std::mt19937_64 rng(seed);
    for (int e = 0; e < settings.epochs; ++e) {
        losses.push_back(nn::train_epoch(model, opt, all, settings.loss, settings.batch_size, rng));
    }
    return losses;
}

PseudoState score_round(const Model& model, const Eigen::MatrixXf& target_features, double percent,
                        const ClassProportions& cp, Ablation ablation, std::vector<Eigen::Index>* excluded_per_class) {
    PseudoState state;
    const ScoreMatrix scores = nn::forward(model, target_features);
    state.pseudo_labels = assign_pseudo_labels(scores);
    state.certainty = certainty_scores(scores);
    const double effective = ablation == Ablation::no_curriculum ? 100.0 : percent;
    state.weights = calculate_weights(state.certainty, state.pseudo_labels, effective,
                                      ablation != Ablation::class_agnostic);
    const InclusionMask weighted = state.weights.array() > 0.0;
    state.included = weighted;
    if (ablation != Ablation::no_proportions) {
        state.included = exclude_by_proportion(state.pseudo_labels, state.certainty, weighted, cp,
                                               target_features.rows());
        state.weights = state.included.select(state.weights, 0.0);
    }
    if (excluded_per_class) {
        excluded_per_class->assign(static_cast<std::size_t>(model.output_dim()), 0);
        for (Eigen::Index i = 0; i < state.size(); ++i) {
            if (weighted(i) && !state.included(i)) {
                ++(*excluded_per_class)[static_cast<std::size_t>(state.pseudo_labels(i))];
            }
        }
    }
    return state;
}

AdaptReport adapt(Model& model, const data::LabeledDataset& source, const Eigen::MatrixXf& target_features,
                  const ClassProportions& cp, const AdaptConfig& config, const AdaptObserver& observer) {
    validate(config);
    validate(cp);
    const int classes = model.output_dim();
    if (cp.num_classes() != classes) {
        throw ConfigError("class proportions have " + std::to_string(cp.num_classes()) + " entries for a " +
                          std::to_string(classes) + "-class model");
    }
    if (target_features.cols() != model.input_dim() || source.dim() != model.input_dim()) {
        throw ShapeError("source/target feature widths do not match the model input");
    }
    if (source.num_classes != classes) {
        throw ShapeError("source class count does not match the model output");
    }

    AdaptReport report;
    if (config.iterations == 0) {
        return report;
    }
    const nn::LossKind loss = config.ablation == Ablation::cross_entropy ? nn::LossKind::ce : nn::LossKind::mse;
    auto opt = nn::make_optimizer(model, config.learning_rate, config.momentum);
    std::mt19937_64 rng(config.seed);

    for (int round = 1; round <= config.iterations; ++round) {
        IterationRecord rec;
        rec.iteration = round;
        rec.percent = config.ablation == Ablation::no_curriculum
                          ? 100.0
                          : inclusion_percent(round, config.schedule_base, config.schedule_step);
        const PseudoState state =
            score_round(model, target_features, rec.percent, cp, config.ablation, &rec.excluded_per_class);

        std::vector<Eigen::Index> chosen;
        rec.included_per_class.assign(static_cast<std::size_t>(classes), 0);
        for (Eigen::Index i = 0; i < state.size(); ++i) {
            if (state.weights(i) > 0.0) {
                chosen.push_back(i);
                ++rec.included_per_class[static_cast<std::size_t>(state.pseudo_labels(i))];
            }
        }
        if (chosen.empty()) {
            throw DegenerateStateError(round, "no target sample survived weighting and exclusion");
        }
        const auto n_target = static_cast<Eigen::Index>(chosen.size());
        rec.mean_weight = state.weights(chosen).mean();

        Eigen::Index k = 0;
        switch (config.source_mix) {
            case SourceMix::match:
                k = std::min(static_cast<Eigen::Index>(std::llround(config.source_ratio * static_cast<double>(n_target))),
                             source.size());
                break;
            case SourceMix::none: k = 0; break;
            case SourceMix::all: k = source.size(); break;
        }
        const SourceSelection src = select_source(source, k, rng);
        rec.source_selected = k;

        nn::Batch<float> train;
        train.features.resize(n_target + k, model.input_dim());
        train.features.topRows(n_target) = target_features(chosen, Eigen::all);
        train.features.bottomRows(k) = src.features;
        train.targets.resize(n_target + k, classes);
        train.targets.topRows(n_target) = nn::one_hot<float>(state.pseudo_labels(chosen), classes);
        train.targets.bottomRows(k) = src.targets;
        train.weights.resize(n_target + k);
        train.weights.head(n_target) = state.weights(chosen).cast<float>();
        train.weights.tail(k) = src.weights;

        double loss_sum = 0.0;
        for (int e = 0; e < config.epochs_per_iteration; ++e) {
            loss_sum += nn::train_epoch(model, opt, train, loss, config.batch_size, rng);
        }
        rec.train_loss = loss_sum / config.epochs_per_iteration;
        if (observer) {
            observer(rec, state, model);
        }
        report.iterations.push_back(std::move(rec));
    }
    return report;
}

}  // namespace pppl

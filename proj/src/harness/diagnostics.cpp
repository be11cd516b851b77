#include "pppl/harness/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "pppl/error.hpp"

namespace pppl::harness {

namespace {

struct PoisonSet {
    std::vector<Eigen::Index> indices;
    Eigen::VectorXi labels;
};

// Pseudo-label training that keeps only correct pseudo-labels each epoch, optionally adding a
// fixed wrong-labelled set from `inject_at` onward (0 disables injection).
std::vector<double> oracle_training(const ExperimentConfig& config, const PreparedSeed& prepared,
                                    const PoisonSet& poison, int inject_at) {
    const DiagnosticSettings& d = config.diagnostics;
    const data::LabeledDataset truth = data::reveal_labels(prepared.task.target);
    const int classes = truth.num_classes;
    Model model = prepared.pretrained;
    auto opt = nn::make_optimizer(model, d.learning_rate, d.momentum);
    std::mt19937_64 rng(derive_seed(prepared.seed, SeedStream::diagnostic));

    std::vector<bool> poisoned(static_cast<std::size_t>(truth.size()), false);
    for (auto i : poison.indices) {
        poisoned[static_cast<std::size_t>(i)] = true;
    }

    std::vector<double> curve{evaluate(model, truth, config.positive_class).accuracy};
    for (int epoch = 1; epoch <= d.epochs; ++epoch) {
        const Eigen::VectorXi pred = predict(model, truth.features);
        std::vector<Eigen::Index> rows;
        std::vector<int> labels;
        for (Eigen::Index i = 0; i < truth.size(); ++i) {
            if (!poisoned[static_cast<std::size_t>(i)] && pred(i) == truth.labels(i)) {
                rows.push_back(i);
                labels.push_back(pred(i));
            }
        }
        if (inject_at > 0 && epoch >= inject_at) {
            for (std::size_t k = 0; k < poison.indices.size(); ++k) {
                rows.push_back(poison.indices[k]);
                labels.push_back(poison.labels(static_cast<Eigen::Index>(k)));
            }
        }
        if (!rows.empty()) {
            const Eigen::VectorXi label_vec = Eigen::Map<const Eigen::VectorXi>(labels.data(), static_cast<Eigen::Index>(labels.size()));
            nn::Batch<float> batch{truth.features(rows, Eigen::all), nn::one_hot<float>(label_vec, classes),
                                   Eigen::VectorXf::Ones(static_cast<Eigen::Index>(rows.size()))};
            for (int pass = 0; pass < d.passes_per_epoch; ++pass) {
                nn::train_epoch(model, opt, batch, config.pretrain.loss, d.batch_size, rng);
            }
        }
        curve.push_back(evaluate(model, truth, config.positive_class).accuracy);
    }
    return curve;
}

// Samples the pretrained model already gets wrong, keeping their wrong pseudo-labels; topped up
// with randomly relabelled samples when there are too few.
PoisonSet choose_poison(const PreparedSeed& prepared, double fraction) {
    const data::LabeledDataset truth = data::reveal_labels(prepared.task.target);
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(truth.size())));
    const Eigen::VectorXi pred = predict(prepared.pretrained, truth.features);
    std::vector<Eigen::Index> wrong;
    std::vector<Eigen::Index> right;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        (pred(i) != truth.labels(i) ? wrong : right).push_back(i);
    }
    std::mt19937_64 rng(derive_seed(prepared.seed, SeedStream::perturb));
    std::shuffle(wrong.begin(), wrong.end(), rng);
    std::shuffle(right.begin(), right.end(), rng);

    PoisonSet poison;
    std::vector<int> labels;
    for (std::size_t k = 0; k < count && k < wrong.size(); ++k) {
        poison.indices.push_back(wrong[k]);
        labels.push_back(pred(wrong[k]));
    }
    for (std::size_t k = 0; poison.indices.size() < count && k < right.size(); ++k) {
        poison.indices.push_back(right[k]);
        labels.push_back((truth.labels(right[k]) + 1) % truth.num_classes);
    }
    poison.labels = Eigen::Map<const Eigen::VectorXi>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    return poison;
}

void require_hidden_labels(const PreparedSeed& prepared) {
    if (!prepared.task.target.hidden_labels) {
        throw ConfigError("diagnostics need target hidden labels");
    }
}

}  // namespace

std::vector<double> oracle_filter_curve(const ExperimentConfig& config, const PreparedSeed& prepared) {
    require_hidden_labels(prepared);
    return oracle_training(config, prepared, PoisonSet{}, 0);
}

OracleFilterResult diag_oracle_filter(const ExperimentConfig& config) {
    OracleFilterResult out;
    for (std::uint64_t seed : config.seeds) {
        const PreparedSeed prepared = prepare_seed(config, seed, config.pretrain.loss);
        out.seeds.push_back(seed);
        out.curves.push_back(oracle_filter_curve(config, prepared));
    }
    return out;
}

BucketResult certainty_buckets(const ScoreMatrix& scores, const Eigen::VectorXi& truth, int buckets) {
    if (buckets < 1) {
        throw ConfigError("bucket count must be positive");
    }
    if (scores.rows() != truth.size()) {
        throw ShapeError("scores and labels differ in length");
    }
    const int classes = static_cast<int>(scores.cols());
    const Eigen::VectorXi pred = assign_pseudo_labels(scores);
    const Eigen::VectorXd cert = certainty_scores(scores);

    BucketResult r;
    r.buckets = buckets;
    std::vector<std::vector<Eigen::Index>> wrong(classes, std::vector<Eigen::Index>(buckets, 0));
    r.class_counts.assign(classes, std::vector<Eigen::Index>(buckets, 0));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const int b = std::min(buckets - 1, static_cast<int>(std::floor(cert(i) * buckets)));
        ++r.class_counts[pred(i)][b];
        wrong[pred(i)][b] += pred(i) != truth(i) ? 1 : 0;
    }
    r.class_ratio.assign(classes, std::vector<std::optional<double>>(buckets));
    r.mean_wrong_ratio.assign(buckets, std::nullopt);
    for (int b = 0; b < buckets; ++b) {
        double sum = 0.0;
        int occupied = 0;
        for (int c = 0; c < classes; ++c) {
            if (r.class_counts[c][b] > 0) {
                const double ratio = static_cast<double>(wrong[c][b]) / static_cast<double>(r.class_counts[c][b]);
                r.class_ratio[c][b] = ratio;
                sum += ratio;
                ++occupied;
            }
        }
        if (occupied > 0) {
            r.mean_wrong_ratio[b] = sum / occupied;
        }
    }
    return r;
}

BucketResult diag_certainty_buckets(const Model& model, const data::LabeledDataset& target, int buckets) {
    return certainty_buckets(nn::forward(model, target.features), target.labels, buckets);
}

double bucket_trend(const BucketResult& result) {
    std::vector<double> index;
    std::vector<double> ratio;
    for (int b = 0; b < result.buckets; ++b) {
        if (result.mean_wrong_ratio[b]) {
            index.push_back(b);
            ratio.push_back(*result.mean_wrong_ratio[b]);
        }
    }
    return spearman(index, ratio);
}

TimingResult timing_injection(const ExperimentConfig& config, const PreparedSeed& prepared,
                              const std::vector<int>& injection_epochs, double poison_fraction) {
    require_hidden_labels(prepared);
    if (injection_epochs.empty()) {
        throw ConfigError("timing diagnostic needs at least one injection epoch");
    }
    if (!(poison_fraction >= 0.0 && poison_fraction <= 1.0)) {
        throw ConfigError("poison fraction must lie in [0, 1]");
    }
    for (int e : injection_epochs) {
        if (e < 1 || e > config.diagnostics.epochs) {
            throw ConfigError("injection epoch " + std::to_string(e) + " outside the training horizon");
        }
    }
    const PoisonSet poison = choose_poison(prepared, poison_fraction);
    TimingResult r;
    r.injection_epochs = injection_epochs;
    for (int e : injection_epochs) {
        r.final_accuracy.push_back(oracle_training(config, prepared, poison, e).back());
    }
    const auto latest = std::max_element(injection_epochs.begin(), injection_epochs.end()) - injection_epochs.begin();
    for (double acc : r.final_accuracy) {
        r.delta.push_back(acc - r.final_accuracy[static_cast<std::size_t>(latest)]);
    }
    return r;
}

TimingSweep diag_timing_injection(const ExperimentConfig& config, const std::vector<int>& injection_epochs,
                                  double poison_fraction) {
    TimingSweep out;
    for (std::uint64_t seed : config.seeds) {
        const PreparedSeed prepared = prepare_seed(config, seed, config.pretrain.loss);
        out.seeds.push_back(seed);
        out.runs.push_back(timing_injection(config, prepared, injection_epochs, poison_fraction));
    }
    return out;
}

}  // namespace pppl::harness

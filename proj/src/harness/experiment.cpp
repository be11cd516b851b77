#include "pppl/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "pppl/data/synthetic.hpp"
#include "pppl/error.hpp"

namespace pppl::harness {

namespace {

bool csv_has_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    std::string header;
    if (!in || !std::getline(in, header)) {
        throw DataError("cannot read header of '" + path + "'");
    }
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
        if (cell == column) {
            return true;
        }
    }
    return false;
}

TaskData csv_task(const TaskSpec& spec) {
    auto source = std::get<data::LabeledDataset>(data::load_feature_csv(spec.source_csv, spec.label_column));
    data::UnlabeledDataset target;
    if (csv_has_column(spec.target_csv, spec.label_column)) {
        target = data::hide_labels(std::get<data::LabeledDataset>(data::load_feature_csv(spec.target_csv, spec.label_column)));
    } else {
        target = std::get<data::UnlabeledDataset>(data::load_feature_csv(spec.target_csv, std::nullopt));
    }
    const int classes = std::max(source.num_classes, target.num_classes);
    source.num_classes = classes;
    target.num_classes = classes;
    if (source.dim() != target.dim()) {
        throw DataError("source and target csv files have different feature counts");
    }
    TaskData t{std::move(source), std::move(target), {}, {}};
    return t;
}

}  // namespace

TaskData make_task(const ExperimentConfig& config, std::uint64_t seed) {
    const TaskSpec& spec = config.task;
    const std::uint64_t data_seed = derive_seed(seed, SeedStream::data);
    TaskData t;
    switch (spec.kind) {
        case TaskKind::gaussians: {
            auto pair = data::gen_rotated_gaussians(spec.per_class, spec.classes, spec.radius, spec.spread, spec.theta,
                                                    data_seed);
            t.source = std::move(pair.source);
            t.target = std::move(pair.target);
            break;
        }
        case TaskKind::moons: {
            auto pair = data::gen_two_moons_shift(spec.per_class, spec.noise, spec.theta, data_seed);
            t.source = std::move(pair.source);
            t.target = std::move(pair.target);
            break;
        }
        case TaskKind::anomaly: {
            data::SeriesSpec src = spec.source_series;
            data::SeriesSpec tgt = spec.target_series;
            src.seed = data_seed;
            tgt.seed = derive_seed(data_seed, SeedStream::data);
            const auto s = data::gen_anomaly_series(src);
            const auto g = data::gen_anomaly_series(tgt);
            t.source = data::window_preprocess(s.values, s.flags, spec.window);
            t.source.provenance = "anomaly/source";
            t.target = data::hide_labels(data::window_preprocess(g.values, g.flags, spec.window));
            t.target.provenance = "anomaly/target";
            break;
        }
        case TaskKind::csv:
            t = csv_task(spec);
            break;
    }
    data::validate(t.source);
    data::validate(t.target);
    t.source_cp = class_proportions(t.source.labels, t.source.num_classes, ProportionKind::source);
    t.target_cp = t.target.hidden_labels
                      ? class_proportions(*t.target.hidden_labels, t.target.num_classes, ProportionKind::true_target)
                      : ClassProportions{t.source_cp.values, ProportionKind::guessed};
    return t;
}

std::vector<int> layer_dims(const ExperimentConfig& config, const TaskData& task) {
    std::vector<int> dims{static_cast<int>(task.source.dim())};
    dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
    dims.push_back(task.source.num_classes);
    return dims;
}

double headline(const Metrics& m, Headline h) { return h == Headline::f1 ? m.positive_f1() : m.accuracy; }

PreparedSeed prepare_seed(const ExperimentConfig& config, std::uint64_t seed, nn::LossKind pretrain_loss) {
    PreparedSeed p;
    p.seed = seed;
    p.task = make_task(config, seed);
    if (!p.task.target.hidden_labels) {
        throw ConfigError("experiments need target labels for evaluation; the target set has none");
    }
    if (config.positive_class >= p.task.source.num_classes) {
        throw ConfigError("positive_class " + std::to_string(config.positive_class) + " exceeds the class count");
    }
    p.pretrained = nn::init_model<float>(layer_dims(config, p.task), derive_seed(seed, SeedStream::init));
    TrainSettings settings = config.pretrain;
    settings.loss = pretrain_loss;
    pretrain_source(p.pretrained, p.task.source, settings, derive_seed(seed, SeedStream::pretrain));
    p.source_only = evaluate(p.pretrained, data::reveal_labels(p.task.target), config.positive_class);
    return p;
}

ClassProportions choose_proportions(const ExperimentConfig& config, const PreparedSeed& prepared,
                                    const ProportionChoice& choice) {
    using S = ProportionChoice::Source;
    switch (choice.source) {
        case S::configured:
            return config.enforce == ProportionKind::source ? prepared.task.source_cp : prepared.task.target_cp;
        case S::true_target:
            return prepared.task.target_cp;
        case S::source_domain:
            return prepared.task.source_cp;
        case S::perturbed: {
            std::mt19937_64 rng(derive_seed(prepared.seed, SeedStream::perturb));
            return perturb_proportions(prepared.task.target_cp, choice.error, config.sweep.mode, config.positive_class,
                                       rng);
        }
    }
    return prepared.task.target_cp;
}

SeedRecord adapt_seed(const ExperimentConfig& config, const PreparedSeed& prepared, const RunVariant& variant) {
    SeedRecord rec;
    rec.seed = prepared.seed;
    rec.source_only = prepared.source_only;
    rec.source_only_headline = headline(prepared.source_only, config.headline);
    rec.enforced = choose_proportions(config, prepared, variant.proportions);

    AdaptConfig ac = config.adapt;
    ac.ablation = variant.ablation.value_or(config.adapt.ablation);
    ac.seed = derive_seed(prepared.seed, SeedStream::adapt);

    const data::LabeledDataset truth = data::reveal_labels(prepared.task.target);
    const int positive = config.positive_class;
    AdaptObserver observer = [&](IterationRecord& it, const PseudoState& state, const Model& model) {
        const Metrics m = evaluate(model, truth, positive);
        it.target_accuracy = m.accuracy;
        it.target_f1 = m.positive_f1();
        Eigen::Index wrong = 0;
        Eigen::Index included = 0;
        for (Eigen::Index i = 0; i < state.size(); ++i) {
            if (state.weights(i) > 0.0) {
                ++included;
                wrong += state.pseudo_labels(i) != truth.labels(i) ? 1 : 0;
            }
        }
        it.pseudo_label_error = included > 0 ? static_cast<double>(wrong) / static_cast<double>(included) : 0.0;
    };

    Model model = prepared.pretrained;
    rec.report = adapt(model, prepared.task.source, prepared.task.target.features, rec.enforced, ac, observer);
    rec.adapted = evaluate(model, truth, positive);
    rec.adapted_headline = headline(rec.adapted, config.headline);
    return rec;
}

Summary summarize(const std::vector<SeedRecord>& records) {
    std::vector<double> before;
    std::vector<double> after;
    Summary s;
    for (const auto& r : records) {
        if (!r.error.empty()) {
            ++s.failed;
            continue;
        }
        before.push_back(r.source_only_headline);
        after.push_back(r.adapted_headline);
    }
    s.completed = static_cast<int>(after.size());
    if (s.completed > 0) {
        s.source_only_mean = mean(before);
        s.source_only_std = stddev(before);
        s.adapted_mean = mean(after);
        s.adapted_std = stddev(after);
    }
    return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunVariant& variant) {
    ExperimentResult result;
    result.config = config;
    const Ablation ablation = variant.ablation.value_or(config.adapt.ablation);
    const nn::LossKind loss = ablation == Ablation::cross_entropy ? nn::LossKind::ce : config.pretrain.loss;
    for (std::uint64_t seed : config.seeds) {
        try {
            const PreparedSeed prepared = prepare_seed(config, seed, loss);
            result.seeds.push_back(adapt_seed(config, prepared, variant));
        } catch (const Error& e) {
            SeedRecord failed;
            failed.seed = seed;
            failed.error = e.what();
            result.seeds.push_back(std::move(failed));
        }
    }
    result.summary = summarize(result.seeds);
    return result;
}

namespace {

void finish_table(ComparisonTable& table) {
    const std::size_t cols = table.columns.size();
    table.means.assign(cols, 0.0);
    table.stds.assign(cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<double> column;
        for (const auto& row : table.values) {
            column.push_back(row[c]);
        }
        table.means[c] = mean(column);
        table.stds[c] = stddev(column);
    }
}

}  // namespace

ComparisonTable run_ablation(const ExperimentConfig& config, const std::vector<Ablation>& variants) {
    if (variants.empty()) {
        throw ConfigError("ablation needs at least one variant");
    }
    ComparisonTable table;
    for (auto v : variants) {
        if (v == Ablation::none) {
            throw ConfigError("ablation variants must be drawn from A1..A4");
        }
        table.columns.emplace_back(to_string(v));
    }
    table.columns.emplace_back("PPPL");
    const bool needs_ce = std::find(variants.begin(), variants.end(), Ablation::cross_entropy) != variants.end();

    for (std::uint64_t seed : config.seeds) {
        const PreparedSeed base = prepare_seed(config, seed, config.pretrain.loss);
        std::optional<PreparedSeed> ce;
        if (needs_ce) {
            ce = prepare_seed(config, seed, nn::LossKind::ce);
        }
        std::vector<double> row;
        for (auto v : variants) {
            const PreparedSeed& p = v == Ablation::cross_entropy ? *ce : base;
            row.push_back(adapt_seed(config, p, RunVariant{v, {}}).adapted_headline);
        }
        row.push_back(adapt_seed(config, base, RunVariant{Ablation::none, {}}).adapted_headline);
        table.seeds.push_back(seed);
        table.values.push_back(std::move(row));
        table.source_only.push_back(headline(base.source_only, config.headline));
    }
    finish_table(table);
    return table;
}

std::string error_column_name(double error) {
    std::ostringstream os;
    os << std::round(error * 1000.0) / 10.0 << '%';
    return os.str();
}

ComparisonTable run_cp_sweep(const ExperimentConfig& config, const std::vector<double>& errors,
                             bool include_source_cp) {
    ComparisonTable table;
    for (double e : errors) {
        if (!(e >= 0.0)) {
            throw ConfigError("proportion errors must be nonnegative");
        }
        table.columns.push_back(error_column_name(e));
    }
    if (include_source_cp) {
        table.columns.emplace_back("S.");
    }
    table.columns.emplace_back("T.");

    using S = ProportionChoice::Source;
    std::vector<double> diffs;
    for (std::uint64_t seed : config.seeds) {
        const PreparedSeed prepared = prepare_seed(config, seed, config.pretrain.loss);
        std::vector<double> row;
        for (double e : errors) {
            row.push_back(adapt_seed(config, prepared, RunVariant{Ablation::none, {S::perturbed, e}}).adapted_headline);
        }
        if (include_source_cp) {
            row.push_back(adapt_seed(config, prepared, RunVariant{Ablation::none, {S::source_domain, 0.0}}).adapted_headline);
        }
        row.push_back(adapt_seed(config, prepared, RunVariant{Ablation::none, {S::true_target, 0.0}}).adapted_headline);
        table.seeds.push_back(seed);
        table.values.push_back(std::move(row));
        table.source_only.push_back(headline(prepared.source_only, config.headline));
        diffs.push_back(proportion_distance(prepared.task.source_cp, prepared.task.target_cp));
    }
    finish_table(table);
    table.cp_difference = mean(diffs);
    return table;
}

}  // namespace pppl::harness

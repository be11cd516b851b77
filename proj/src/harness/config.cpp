#include "pppl/harness/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "pppl/error.hpp"

namespace pppl::harness {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

TaskKind parse_task_kind(const std::string& s) {
    if (s == "gaussians") return TaskKind::gaussians;
    if (s == "moons") return TaskKind::moons;
    if (s == "anomaly") return TaskKind::anomaly;
    if (s == "csv") return TaskKind::csv;
    throw ConfigError("unknown task kind '" + s + "' (expected gaussians, moons, anomaly, or csv)");
}

void read_series(const json& obj, data::SeriesSpec& spec, const std::string& where) {
    reject_unknown(obj, {"length", "period", "amplitude", "noise_scale", "trend", "anomaly_count", "magnitude_min",
                         "magnitude_max"},
                   where);
    read(obj, "length", spec.length, where);
    read(obj, "period", spec.period, where);
    read(obj, "amplitude", spec.amplitude, where);
    read(obj, "noise_scale", spec.noise_scale, where);
    read(obj, "trend", spec.trend, where);
    read(obj, "anomaly_count", spec.anomaly_count, where);
    read(obj, "magnitude_min", spec.magnitude_min, where);
    read(obj, "magnitude_max", spec.magnitude_max, where);
    data::validate(spec);
}

json series_json(const data::SeriesSpec& s) {
    return {{"length", s.length},           {"period", s.period},
            {"amplitude", s.amplitude},     {"noise_scale", s.noise_scale},
            {"trend", s.trend},             {"anomaly_count", s.anomaly_count},
            {"magnitude_min", s.magnitude_min}, {"magnitude_max", s.magnitude_max}};
}

void read_train(const json& obj, TrainSettings& t, const std::string& where) {
    reject_unknown(obj, {"epochs", "batch_size", "learning_rate", "momentum", "loss"}, where);
    read(obj, "epochs", t.epochs, where);
    read(obj, "batch_size", t.batch_size, where);
    read(obj, "learning_rate", t.learning_rate, where);
    read(obj, "momentum", t.momentum, where);
    if (obj.contains("loss")) {
        std::string loss;
        read(obj, "loss", loss, where);
        t.loss = nn::parse_loss_kind(loss);
    }
    if (t.epochs < 0 || t.batch_size < 1 || !(t.learning_rate >= 0.0) || !(t.momentum >= 0.0 && t.momentum < 1.0)) {
        throw ConfigError(where + ": epochs >= 0, batch_size >= 1, learning_rate >= 0, momentum in [0,1) required");
    }
}

void validate_config(const ExperimentConfig& c) {
    if (c.seeds.empty()) {
        throw ConfigError("seeds must be nonempty");
    }
    for (int h : c.hidden) {
        if (h < 1) {
            throw ConfigError("hidden layer widths must be positive");
        }
    }
    const TaskSpec& t = c.task;
    switch (t.kind) {
        case TaskKind::gaussians:
            if (t.classes < 2 || t.per_class < 1 || !(t.radius > 0) || !(t.spread > 0)) {
                throw ConfigError("gaussians task needs classes >= 2, per_class >= 1, radius > 0, spread > 0");
            }
            break;
        case TaskKind::moons:
            if (t.per_class < 1 || !(t.noise >= 0)) {
                throw ConfigError("moons task needs per_class >= 1 and noise >= 0");
            }
            break;
        case TaskKind::anomaly:
            if (t.window < 1) {
                throw ConfigError("anomaly task window must be at least 1");
            }
            data::validate(t.source_series);
            data::validate(t.target_series);
            break;
        case TaskKind::csv:
            for (const auto* p : {&t.source_csv, &t.target_csv}) {
                if (p->empty() || !std::filesystem::exists(*p)) {
                    throw ConfigError("csv task file '" + *p + "' does not exist");
                }
            }
            break;
    }
    validate(c.adapt);
    const DiagnosticSettings& d = c.diagnostics;
    if (d.epochs < 0 || d.passes_per_epoch < 1 || d.batch_size < 1 || d.buckets < 1) {
        throw ConfigError("diagnostics: epochs >= 0, passes_per_epoch >= 1, batch_size >= 1, buckets >= 1 required");
    }
    if (!(d.poison_fraction >= 0.0 && d.poison_fraction <= 1.0)) {
        throw ConfigError("diagnostics.poison_fraction must lie in [0, 1]");
    }
    for (int e : d.injection_epochs) {
        if (e < 1 || e > d.epochs) {
            throw ConfigError("injection epoch " + std::to_string(e) + " outside [1, " + std::to_string(d.epochs) + "]");
        }
    }
    for (double e : c.sweep.errors) {
        if (!(e >= 0.0)) {
            throw ConfigError("sweep errors must be nonnegative");
        }
    }
    if (c.positive_class < 0) {
        throw ConfigError("positive_class must be nonnegative");
    }
}

}  // namespace

std::string_view to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::gaussians: return "gaussians";
        case TaskKind::moons: return "moons";
        case TaskKind::anomaly: return "anomaly";
        case TaskKind::csv: return "csv";
    }
    return "unknown";
}

ExperimentConfig default_config(TaskKind kind) {
    ExperimentConfig c;
    c.task.kind = kind;
    switch (kind) {
        case TaskKind::gaussians:
            break;
        case TaskKind::moons:
            c.task.per_class = 300;
            c.task.theta = 30.0;
            c.task.classes = 2;
            break;
        case TaskKind::anomaly:
            c.task.classes = 2;
            c.headline = Headline::f1;
            c.sweep.mode = PerturbMode::anomaly;
            c.hidden = {32};
            // Target regime: slower, larger base signal with more noise and a drift.
            c.task.target_series.period = 80.0;
            c.task.target_series.amplitude = 1.5;
            c.task.target_series.noise_scale = 0.2;
            c.task.target_series.trend = 0.0005;
            break;
        case TaskKind::csv:
            break;
    }
    return c;
}

ExperimentConfig parse_config(const json& doc) {
    reject_unknown(doc, {"format", "task", "model", "pretrain", "adapt", "proportions", "metrics", "diagnostics",
                         "sweep", "ablation", "seeds", "output_dir"},
                   "config");
    if (!doc.contains("format")) {
        throw ConfigError("config is missing the 'format' field");
    }
    int format = 0;
    read(doc, "format", format, "config");
    if (format != kConfigFormat) {
        throw ConfigError("unsupported config format " + std::to_string(format) + " (expected " +
                          std::to_string(kConfigFormat) + ")");
    }
    if (!doc.contains("task") || !doc.at("task").contains("kind")) {
        throw ConfigError("config needs task.kind");
    }
    ExperimentConfig c = default_config(parse_task_kind(doc.at("task").at("kind").get<std::string>()));

    const json& task = doc.at("task");
    reject_unknown(task, {"kind", "per_class", "classes", "radius", "spread", "noise", "theta", "window",
                          "source_series", "target_series", "source_csv", "target_csv", "label_column"},
                   "task");
    read(task, "per_class", c.task.per_class, "task");
    read(task, "classes", c.task.classes, "task");
    read(task, "radius", c.task.radius, "task");
    read(task, "spread", c.task.spread, "task");
    read(task, "noise", c.task.noise, "task");
    read(task, "theta", c.task.theta, "task");
    read(task, "window", c.task.window, "task");
    if (task.contains("source_series")) read_series(task.at("source_series"), c.task.source_series, "task.source_series");
    if (task.contains("target_series")) read_series(task.at("target_series"), c.task.target_series, "task.target_series");
    read(task, "source_csv", c.task.source_csv, "task");
    read(task, "target_csv", c.task.target_csv, "task");
    read(task, "label_column", c.task.label_column, "task");

    if (doc.contains("model")) {
        reject_unknown(doc.at("model"), {"hidden"}, "model");
        read(doc.at("model"), "hidden", c.hidden, "model");
    }
    if (doc.contains("pretrain")) {
        read_train(doc.at("pretrain"), c.pretrain, "pretrain");
    }
    if (doc.contains("adapt")) {
        const json& a = doc.at("adapt");
        reject_unknown(a, {"iterations", "schedule_base", "schedule_step", "source_mix", "source_ratio", "epochs_per_iteration",
                           "batch_size", "learning_rate", "momentum", "ablation"},
                       "adapt");
        read(a, "iterations", c.adapt.iterations, "adapt");
        read(a, "schedule_base", c.adapt.schedule_base, "adapt");
        read(a, "schedule_step", c.adapt.schedule_step, "adapt");
        read(a, "source_ratio", c.adapt.source_ratio, "adapt");
        read(a, "epochs_per_iteration", c.adapt.epochs_per_iteration, "adapt");
        read(a, "batch_size", c.adapt.batch_size, "adapt");
        read(a, "learning_rate", c.adapt.learning_rate, "adapt");
        read(a, "momentum", c.adapt.momentum, "adapt");
        std::string text;
        if (a.contains("source_mix")) {
            read(a, "source_mix", text, "adapt");
            c.adapt.source_mix = parse_source_mix(text);
        }
        if (a.contains("ablation")) {
            read(a, "ablation", text, "adapt");
            c.adapt.ablation = parse_ablation(text);
        }
    }
    if (doc.contains("proportions")) {
        reject_unknown(doc.at("proportions"), {"enforce"}, "proportions");
        std::string enforce = "true";
        read(doc.at("proportions"), "enforce", enforce, "proportions");
        if (enforce == "true") {
            c.enforce = ProportionKind::true_target;
        } else if (enforce == "source") {
            c.enforce = ProportionKind::source;
        } else {
            throw ConfigError("proportions.enforce must be 'true' or 'source'");
        }
    }
    if (doc.contains("metrics")) {
        reject_unknown(doc.at("metrics"), {"positive_class", "headline"}, "metrics");
        read(doc.at("metrics"), "positive_class", c.positive_class, "metrics");
        if (doc.at("metrics").contains("headline")) {
            std::string h;
            read(doc.at("metrics"), "headline", h, "metrics");
            if (h == "accuracy") {
                c.headline = Headline::accuracy;
            } else if (h == "f1") {
                c.headline = Headline::f1;
            } else {
                throw ConfigError("metrics.headline must be 'accuracy' or 'f1'");
            }
        }
    }
    if (doc.contains("diagnostics")) {
        const json& d = doc.at("diagnostics");
        reject_unknown(d, {"epochs", "passes_per_epoch", "batch_size", "learning_rate", "momentum", "buckets",
                           "injection_epochs", "poison_fraction"},
                       "diagnostics");
        read(d, "epochs", c.diagnostics.epochs, "diagnostics");
        read(d, "passes_per_epoch", c.diagnostics.passes_per_epoch, "diagnostics");
        read(d, "batch_size", c.diagnostics.batch_size, "diagnostics");
        read(d, "learning_rate", c.diagnostics.learning_rate, "diagnostics");
        read(d, "momentum", c.diagnostics.momentum, "diagnostics");
        read(d, "buckets", c.diagnostics.buckets, "diagnostics");
        read(d, "injection_epochs", c.diagnostics.injection_epochs, "diagnostics");
        read(d, "poison_fraction", c.diagnostics.poison_fraction, "diagnostics");
    }
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        reject_unknown(s, {"errors", "include_source_cp", "mode"}, "sweep");
        read(s, "errors", c.sweep.errors, "sweep");
        read(s, "include_source_cp", c.sweep.include_source_cp, "sweep");
        if (s.contains("mode")) {
            std::string mode;
            read(s, "mode", mode, "sweep");
            if (mode == "anomaly") {
                c.sweep.mode = PerturbMode::anomaly;
            } else if (mode == "multiclass") {
                c.sweep.mode = PerturbMode::multiclass;
            } else {
                throw ConfigError("sweep.mode must be 'anomaly' or 'multiclass'");
            }
        }
    }
    if (doc.contains("ablation")) {
        reject_unknown(doc.at("ablation"), {"variants"}, "ablation");
        std::vector<std::string> names;
        read(doc.at("ablation"), "variants", names, "ablation");
        c.ablation_variants.clear();
        for (const auto& n : names) {
            c.ablation_variants.push_back(parse_ablation(n));
        }
    }
    read(doc, "seeds", c.seeds, "config");
    read(doc, "output_dir", c.output_dir, "config");
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    json task = {{"kind", to_string(c.task.kind)}};
    switch (c.task.kind) {
        case TaskKind::gaussians:
            task.update({{"per_class", c.task.per_class}, {"classes", c.task.classes}, {"radius", c.task.radius},
                         {"spread", c.task.spread}, {"theta", c.task.theta}});
            break;
        case TaskKind::moons:
            task.update({{"per_class", c.task.per_class}, {"noise", c.task.noise}, {"theta", c.task.theta}});
            break;
        case TaskKind::anomaly:
            task.update({{"window", c.task.window}, {"source_series", series_json(c.task.source_series)},
                         {"target_series", series_json(c.task.target_series)}});
            break;
        case TaskKind::csv:
            task.update({{"source_csv", c.task.source_csv}, {"target_csv", c.task.target_csv},
                         {"label_column", c.task.label_column}});
            break;
    }
    std::vector<std::string> variants;
    for (auto a : c.ablation_variants) {
        variants.emplace_back(to_string(a));
    }
    return {
        {"format", kConfigFormat},
        {"task", task},
        {"model", {{"hidden", c.hidden}}},
        {"pretrain",
         {{"epochs", c.pretrain.epochs}, {"batch_size", c.pretrain.batch_size},
          {"learning_rate", c.pretrain.learning_rate}, {"momentum", c.pretrain.momentum},
          {"loss", nn::to_string(c.pretrain.loss)}}},
        {"adapt",
         {{"iterations", c.adapt.iterations}, {"schedule_base", c.adapt.schedule_base},
          {"schedule_step", c.adapt.schedule_step}, {"source_mix", to_string(c.adapt.source_mix)},
          {"source_ratio", c.adapt.source_ratio},
          {"epochs_per_iteration", c.adapt.epochs_per_iteration}, {"batch_size", c.adapt.batch_size},
          {"learning_rate", c.adapt.learning_rate}, {"momentum", c.adapt.momentum},
          {"ablation", to_string(c.adapt.ablation)}}},
        {"proportions", {{"enforce", c.enforce == ProportionKind::source ? "source" : "true"}}},
        {"metrics",
         {{"positive_class", c.positive_class}, {"headline", c.headline == Headline::f1 ? "f1" : "accuracy"}}},
        {"diagnostics",
         {{"epochs", c.diagnostics.epochs}, {"passes_per_epoch", c.diagnostics.passes_per_epoch},
          {"batch_size", c.diagnostics.batch_size}, {"learning_rate", c.diagnostics.learning_rate},
          {"momentum", c.diagnostics.momentum}, {"buckets", c.diagnostics.buckets},
          {"injection_epochs", c.diagnostics.injection_epochs},
          {"poison_fraction", c.diagnostics.poison_fraction}}},
        {"sweep",
         {{"errors", c.sweep.errors}, {"include_source_cp", c.sweep.include_source_cp},
          {"mode", c.sweep.mode == PerturbMode::anomaly ? "anomaly" : "multiclass"}}},
        {"ablation", {{"variants", variants}}},
        {"seeds", c.seeds},
        {"output_dir", c.output_dir},
    };
}

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x9e3779b9u};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace pppl::harness

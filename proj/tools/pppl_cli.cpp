// Command-line front end: dataset synthesis, pretraining, adaptation, evaluation, ablations,
// proportion sweeps, and the three diagnostics. Exit codes: 0 ok, 1 config, 2 data, 3 numerical.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pppl/data/dataset.hpp"
#include "pppl/error.hpp"
#include "pppl/harness/config.hpp"
#include "pppl/harness/diagnostics.hpp"
#include "pppl/harness/experiment.hpp"
#include "pppl/harness/report.hpp"
#include "pppl/nn/checkpoint.hpp"

namespace {

using namespace pppl;
using namespace pppl::harness;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
};

ExperimentConfig resolve(const GlobalOptions& g) {
    if (g.config_path.empty()) {
        throw ConfigError("--config is required");
    }
    ExperimentConfig c = load_config(g.config_path);
    if (g.seed) {
        c.seeds = {*g.seed};
    }
    if (!g.out.empty()) {
        c.output_dir = g.out;
    }
    if (c.output_dir.empty()) {
        c.output_dir = "out";
    }
    return c;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void say(const GlobalOptions& g, const std::string& text) {
    if (!g.quiet) {
        std::cout << text << '\n';
    }
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

void print_table(const GlobalOptions& g, const ComparisonTable& t) {
    std::ostringstream os;
    os << "column";
    for (const auto& c : t.columns) os << '\t' << c;
    os << "\nmean";
    for (double v : t.means) os << '\t' << pct(v);
    os << "\nstd";
    for (double v : t.stds) os << '\t' << pct(v);
    if (t.cp_difference) os << "\ncp_diff\t" << pct(*t.cp_difference);
    say(g, os.str());
}

void cmd_synth(const GlobalOptions& g) {
    const ExperimentConfig c = resolve(g);
    ensure_directory(c.output_dir);
    for (auto seed : c.seeds) {
        const TaskData t = make_task(c, seed);
        const std::string src = c.output_dir + "/source_" + seed_tag(seed) + ".csv";
        const std::string tgt = c.output_dir + "/target_" + seed_tag(seed) + ".csv";
        data::write_feature_csv(src, t.source.features, t.source.labels);
        data::write_feature_csv(tgt, t.target.features, t.target.hidden_labels);
        say(g, "wrote " + src + " (" + std::to_string(t.source.size()) + " rows) and " + tgt + " (" +
                   std::to_string(t.target.size()) + " rows)");
    }
}

void cmd_pretrain(const GlobalOptions& g) {
    const ExperimentConfig c = resolve(g);
    ensure_directory(c.output_dir);
    for (auto seed : c.seeds) {
        const PreparedSeed p = prepare_seed(c, seed, c.pretrain.loss);
        const std::string path = c.output_dir + "/pretrained_" + seed_tag(seed) + ".ckpt";
        nn::save_checkpoint(path, p.pretrained, c.pretrain.loss);
        const Metrics src = evaluate(p.pretrained, p.task.source, c.positive_class);
        say(g, seed_tag(seed) + ": source acc " + pct(src.accuracy) + ", target (source-only) headline " +
                   pct(headline(p.source_only, c.headline)) + " -> " + path);
    }
}

void cmd_adapt(const GlobalOptions& g, const std::string& checkpoint) {
    const ExperimentConfig c = resolve(g);
    if (checkpoint.empty()) {
        const ExperimentResult r = run_experiment(c);
        write_report_pair(
            c.output_dir, "experiment", [&](std::ostream& o) { write_experiment_jsonl(o, r); },
            [&](std::ostream& o) { write_experiment_csv(o, r); });
        for (const auto& s : r.seeds) {
            say(g, seed_tag(s.seed) + (s.error.empty() ? ": source-only " + pct(s.source_only_headline) + " -> adapted " +
                                                             pct(s.adapted_headline)
                                                       : ": FAILED " + s.error));
        }
        say(g, "mean: source-only " + pct(r.summary.source_only_mean) + " -> adapted " + pct(r.summary.adapted_mean));
        if (r.summary.completed == 0) {
            throw NumericalError("every seed failed");
        }
        return;
    }
    // Adapt an existing checkpoint on the first configured seed's data.
    const std::uint64_t seed = c.seeds.front();
    nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint);
    PreparedSeed p;
    p.seed = seed;
    p.task = make_task(c, seed);
    if (ckpt.model.layer_dims() != layer_dims(c, p.task)) {
        throw ShapeError("checkpoint dims do not match the configured task and model");
    }
    p.pretrained = ckpt.model;
    ExperimentResult r;
    r.config = c;
    if (p.task.target.hidden_labels) {
        p.source_only = evaluate(p.pretrained, data::reveal_labels(p.task.target), c.positive_class);
        r.seeds.push_back(adapt_seed(c, p, {}));
    } else {
        SeedRecord rec;
        rec.seed = seed;
        AdaptConfig ac = c.adapt;
        ac.seed = derive_seed(seed, SeedStream::adapt);
        rec.enforced = choose_proportions(c, p, {});
        Model model = p.pretrained;
        rec.report = adapt(model, p.task.source, p.task.target.features, rec.enforced, ac);
        p.pretrained = model;
        r.seeds.push_back(std::move(rec));
    }
    r.summary = summarize(r.seeds);
    write_report_pair(
        c.output_dir, "adapt_" + seed_tag(seed), [&](std::ostream& o) { write_experiment_jsonl(o, r); },
        [&](std::ostream& o) { write_experiment_csv(o, r); });
    say(g, "adapted " + checkpoint + " on " + seed_tag(seed));
}

void cmd_evaluate(const GlobalOptions& g, const std::string& checkpoint, const std::string& csv,
                  const std::string& label_column) {
    const ExperimentConfig c = resolve(g);
    if (checkpoint.empty()) {
        throw ConfigError("evaluate needs --checkpoint");
    }
    const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint);
    data::LabeledDataset eval;
    if (!csv.empty()) {
        auto loaded = data::load_feature_csv(csv, label_column);
        eval = std::get<data::LabeledDataset>(loaded);
        eval.num_classes = ckpt.model.output_dim();
        data::validate(eval);
    } else {
        eval = data::reveal_labels(make_task(c, c.seeds.front()).target);
    }
    const Metrics m = evaluate(ckpt.model, eval, c.positive_class);
    std::cout << to_json(m).dump() << '\n';
}

void cmd_ablate(const GlobalOptions& g, const std::vector<std::string>& names) {
    ExperimentConfig c = resolve(g);
    if (!names.empty()) {
        c.ablation_variants.clear();
        for (const auto& n : names) c.ablation_variants.push_back(parse_ablation(n));
    }
    const ComparisonTable t = run_ablation(c, c.ablation_variants);
    write_report_pair(
        c.output_dir, "ablation", [&](std::ostream& o) { write_table_jsonl(o, c, "ablation", t); },
        [&](std::ostream& o) { write_table_csv(o, t); });
    print_table(g, t);
}

void cmd_cp_sweep(const GlobalOptions& g, const std::vector<double>& errors, bool no_source) {
    ExperimentConfig c = resolve(g);
    if (!errors.empty()) c.sweep.errors = errors;
    if (no_source) c.sweep.include_source_cp = false;
    const ComparisonTable t = run_cp_sweep(c, c.sweep.errors, c.sweep.include_source_cp);
    write_report_pair(
        c.output_dir, "cp_sweep", [&](std::ostream& o) { write_table_jsonl(o, c, "cp-sweep", t); },
        [&](std::ostream& o) { write_table_csv(o, t); });
    print_table(g, t);
}

void cmd_diagnose(const GlobalOptions& g, const std::string& kind) {
    const ExperimentConfig c = resolve(g);
    if (kind == "oracle") {
        const OracleFilterResult r = diag_oracle_filter(c);
        write_report_pair(
            c.output_dir, "diagnose_oracle", [&](std::ostream& o) { write_oracle_jsonl(o, c, r); },
            [&](std::ostream& o) { write_oracle_csv(o, r); });
        for (std::size_t s = 0; s < r.seeds.size(); ++s) {
            say(g, seed_tag(r.seeds[s]) + ": " + pct(r.curves[s].front()) + " -> " + pct(r.curves[s].back()));
        }
    } else if (kind == "buckets") {
        std::vector<std::uint64_t> seeds;
        std::vector<BucketResult> results;
        for (auto seed : c.seeds) {
            const PreparedSeed p = prepare_seed(c, seed, c.pretrain.loss);
            seeds.push_back(seed);
            results.push_back(
                diag_certainty_buckets(p.pretrained, data::reveal_labels(p.task.target), c.diagnostics.buckets));
            say(g, seed_tag(seed) + ": spearman(bucket, wrong ratio) = " + pct(bucket_trend(results.back())));
        }
        write_report_pair(
            c.output_dir, "diagnose_buckets", [&](std::ostream& o) { write_buckets_jsonl(o, c, seeds, results); },
            [&](std::ostream& o) { write_buckets_csv(o, seeds, results); });
    } else if (kind == "timing") {
        const TimingSweep r = diag_timing_injection(c, c.diagnostics.injection_epochs, c.diagnostics.poison_fraction);
        write_report_pair(
            c.output_dir, "diagnose_timing",
            [&](std::ostream& o) { write_timing_jsonl(o, c, r, c.diagnostics.poison_fraction); },
            [&](std::ostream& o) { write_timing_csv(o, r); });
        for (std::size_t s = 0; s < r.seeds.size(); ++s) {
            std::string line = seed_tag(r.seeds[s]) + ":";
            for (std::size_t k = 0; k < r.runs[s].injection_epochs.size(); ++k) {
                line += " e" + std::to_string(r.runs[s].injection_epochs[k]) + "=" + pct(r.runs[s].final_accuracy[k]);
            }
            say(g, line);
        }
    } else {
        throw ConfigError("unknown diagnostic '" + kind + "' (expected oracle, buckets, or timing)");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proportional progressive pseudo-labelling for unsupervised domain adaptation"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Run only this seed")->expected(1);
    app.add_option("--config", g.config_path, "Experiment config (JSON)");
    app.add_option("--out", g.out, "Output directory");
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    auto* synth = app.add_subcommand("synth", "Write generated source/target datasets as CSV");
    auto* pretrain = app.add_subcommand("pretrain", "Train on the source domain and save checkpoints");
    auto* adapt_cmd = app.add_subcommand("adapt", "Pretrain + adapt per seed, or adapt a given checkpoint");
    std::string adapt_ckpt;
    adapt_cmd->add_option("--checkpoint", adapt_ckpt, "Adapt this checkpoint instead of pretraining");
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Metrics of a checkpoint on the target or a CSV file");
    std::string eval_ckpt, eval_csv, eval_label = "label";
    evaluate_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint to evaluate")->required();
    evaluate_cmd->add_option("--data", eval_csv, "Labeled CSV (default: the configured target domain)");
    evaluate_cmd->add_option("--label-column", eval_label, "Label column of --data");
    auto* ablate = app.add_subcommand("ablate", "Compare the full method against ablation variants");
    std::vector<std::string> variants;
    ablate->add_option("--variants", variants, "Subset of A1 A2 A3 A4")->delimiter(',');
    auto* sweep = app.add_subcommand("cp-sweep", "Sensitivity to errors in the enforced class proportions");
    std::vector<double> errors;
    bool no_source = false;
    sweep->add_option("--errors", errors, "Proportion error levels")->delimiter(',');
    sweep->add_flag("--no-source-cp", no_source, "Skip the source-proportion column");
    auto* diagnose = app.add_subcommand("diagnose", "Run a diagnostic: oracle, buckets, or timing");
    std::string kind;
    diagnose->add_option("kind", kind, "oracle | buckets | timing")->required()->check(
        CLI::IsMember({"oracle", "buckets", "timing"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (seed_opt->count() > 0) {
        g.seed = seed_value;
    }

    try {
        if (synth->parsed()) cmd_synth(g);
        else if (pretrain->parsed()) cmd_pretrain(g);
        else if (adapt_cmd->parsed()) cmd_adapt(g, adapt_ckpt);
        else if (evaluate_cmd->parsed()) cmd_evaluate(g, eval_ckpt, eval_csv, eval_label);
        else if (ablate->parsed()) cmd_ablate(g, variants);
        else if (sweep->parsed()) cmd_cp_sweep(g, errors, no_source);
        else if (diagnose->parsed()) cmd_diagnose(g, kind);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::bad_variant_access&) {
        std::cerr << "data error: expected a labeled CSV file\n";
        return 2;
    }
    return 0;
}

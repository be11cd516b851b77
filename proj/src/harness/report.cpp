#include "pppl/harness/report.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>

#include "pppl/error.hpp"

namespace pppl::harness {

using nlohmann::json;

namespace {

template <typename T>
std::vector<T> to_std(const Eigen::Matrix<T, Eigen::Dynamic, 1>& v) {
    return std::vector<T>(v.data(), v.data() + v.size());
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// NaN is not representable in JSON.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fixed(double v) {
    if (!std::isfinite(v)) {
        return "nan";
    }
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

void line(std::ostream& out, const json& record) { out << record.dump() << '\n'; }

json config_record(const ExperimentConfig& config, const std::string& kind) {
    return {{"type", "config"}, {"report", kind}, {"config", to_json(config)}, {"seeds", config.seeds}};
}

}  // namespace

json to_json(const Metrics& m) {
    std::vector<std::vector<int>> confusion;
    for (Eigen::Index r = 0; r < m.confusion.rows(); ++r) {
        std::vector<int> row;
        for (Eigen::Index c = 0; c < m.confusion.cols(); ++c) {
            row.push_back(m.confusion(r, c));
        }
        confusion.push_back(std::move(row));
    }
    return {{"accuracy", m.accuracy},          {"precision", to_std(m.precision)},
            {"recall", to_std(m.recall)},      {"f1", to_std(m.f1)},
            {"positive_class", m.positive_class}, {"positive_f1", m.positive_f1()},
            {"confusion", confusion}};
}

json to_json(const IterationRecord& r) {
    return {{"iteration", r.iteration},
            {"percent", r.percent},
            {"included_per_class", r.included_per_class},
            {"excluded_per_class", r.excluded_per_class},
            {"mean_weight", r.mean_weight},
            {"source_selected", r.source_selected},
            {"train_loss", r.train_loss},
            {"target_accuracy", optional_number(r.target_accuracy)},
            {"target_f1", optional_number(r.target_f1)},
            {"pseudo_label_error", optional_number(r.pseudo_label_error)}};
}

json to_json(const ComparisonTable& t) {
    json rows = json::array();
    for (std::size_t s = 0; s < t.seeds.size(); ++s) {
        json values = json::array();
        for (double v : t.values[s]) {
            values.push_back(number_or_null(v));
        }
        rows.push_back({{"seed", t.seeds[s]}, {"source_only", t.source_only[s]}, {"values", values}});
    }
    json means = json::array();
    json stds = json::array();
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        means.push_back(number_or_null(t.means[c]));
        stds.push_back(number_or_null(t.stds[c]));
    }
    json out = {{"columns", t.columns}, {"rows", rows}, {"mean", means}, {"std", stds}};
    if (t.cp_difference) {
        out["cp_difference"] = *t.cp_difference;
    }
    return out;
}

void write_experiment_jsonl(std::ostream& out, const ExperimentResult& result) {
    line(out, config_record(result.config, "experiment"));
    for (const auto& s : result.seeds) {
        if (!s.error.empty()) {
            line(out, {{"type", "seed"}, {"seed", s.seed}, {"status", "failed"}, {"error", s.error}});
            continue;
        }
        for (const auto& it : s.report.iterations) {
            json rec = to_json(it);
            rec["type"] = "iteration";
            rec["seed"] = s.seed;
            line(out, rec);
        }
        line(out, {{"type", "seed"},
                   {"seed", s.seed},
                   {"status", "ok"},
                   {"enforced_proportions", to_std(s.enforced.values)},
                   {"enforced_kind", to_string(s.enforced.kind)},
                   {"source_only", to_json(s.source_only)},
                   {"adapted", to_json(s.adapted)},
                   {"source_only_headline", s.source_only_headline},
                   {"adapted_headline", s.adapted_headline}});
    }
    const Summary& m = result.summary;
    line(out, {{"type", "summary"},
               {"completed", m.completed},
               {"failed", m.failed},
               {"source_only_mean", m.source_only_mean},
               {"source_only_std", m.source_only_std},
               {"adapted_mean", m.adapted_mean},
               {"adapted_std", m.adapted_std}});
}

void write_experiment_csv(std::ostream& out, const ExperimentResult& result) {
    out << "seed,status,source_only,adapted\n";
    for (const auto& s : result.seeds) {
        if (!s.error.empty()) {
            out << s.seed << ",failed,,\n";
        } else {
            out << s.seed << ",ok," << fixed(s.source_only_headline) << ',' << fixed(s.adapted_headline) << '\n';
        }
    }
    out << "mean,," << fixed(result.summary.source_only_mean) << ',' << fixed(result.summary.adapted_mean) << '\n';
    out << "std,," << fixed(result.summary.source_only_std) << ',' << fixed(result.summary.adapted_std) << '\n';
}

void write_table_jsonl(std::ostream& out, const ExperimentConfig& config, const std::string& kind,
                       const ComparisonTable& table) {
    line(out, config_record(config, kind));
    json rec = to_json(table);
    rec["type"] = "table";
    line(out, rec);
}

void write_table_csv(std::ostream& out, const ComparisonTable& table) {
    out << "seed,Only-Src";
    for (const auto& c : table.columns) {
        out << ',' << c;
    }
    if (table.cp_difference) {
        out << ",CP Diff.";
    }
    out << '\n';
    for (std::size_t s = 0; s < table.seeds.size(); ++s) {
        out << table.seeds[s] << ',' << fixed(table.source_only[s]);
        for (double v : table.values[s]) {
            out << ',' << fixed(v);
        }
        if (table.cp_difference) {
            out << ',';
        }
        out << '\n';
    }
    out << "mean," << fixed(mean(table.source_only));
    for (double v : table.means) {
        out << ',' << fixed(v);
    }
    if (table.cp_difference) {
        out << ',' << fixed(*table.cp_difference);
    }
    out << '\n';
    out << "std," << fixed(stddev(table.source_only));
    for (double v : table.stds) {
        out << ',' << fixed(v);
    }
    if (table.cp_difference) {
        out << ',';
    }
    out << '\n';
}

void write_oracle_jsonl(std::ostream& out, const ExperimentConfig& config, const OracleFilterResult& result) {
    line(out, config_record(config, "diagnose-oracle"));
    for (std::size_t s = 0; s < result.seeds.size(); ++s) {
        line(out, {{"type", "curve"}, {"seed", result.seeds[s]}, {"accuracy", result.curves[s]}});
    }
}

void write_oracle_csv(std::ostream& out, const OracleFilterResult& result) {
    out << "seed,epoch,accuracy\n";
    for (std::size_t s = 0; s < result.seeds.size(); ++s) {
        for (std::size_t e = 0; e < result.curves[s].size(); ++e) {
            out << result.seeds[s] << ',' << e << ',' << fixed(result.curves[s][e]) << '\n';
        }
    }
}

void write_buckets_jsonl(std::ostream& out, const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                         const std::vector<BucketResult>& results) {
    json rec = config_record(config, "diagnose-buckets");
    rec["score_clamp"] = "certainty >= 1 counted in the top bucket";
    line(out, rec);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const BucketResult& r = results[s];
        json ratios = json::array();
        for (const auto& v : r.mean_wrong_ratio) {
            ratios.push_back(optional_number(v));
        }
        json per_class = json::array();
        for (std::size_t c = 0; c < r.class_ratio.size(); ++c) {
            json cls = json::array();
            for (const auto& v : r.class_ratio[c]) {
                cls.push_back(optional_number(v));
            }
            per_class.push_back({{"ratio", cls}, {"count", r.class_counts[c]}});
        }
        line(out, {{"type", "buckets"},
                   {"seed", seeds[s]},
                   {"buckets", r.buckets},
                   {"mean_wrong_ratio", ratios},
                   {"per_class", per_class},
                   {"spearman", number_or_null(bucket_trend(r))}});
    }
}

void write_buckets_csv(std::ostream& out, const std::vector<std::uint64_t>& seeds,
                       const std::vector<BucketResult>& results) {
    out << "seed,bucket,lower,upper,mean_wrong_ratio,samples\n";
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const BucketResult& r = results[s];
        for (int b = 0; b < r.buckets; ++b) {
            Eigen::Index n = 0;
            for (const auto& counts : r.class_counts) {
                n += counts[static_cast<std::size_t>(b)];
            }
            out << seeds[s] << ',' << b << ',' << fixed(static_cast<double>(b) / r.buckets) << ','
                << fixed(static_cast<double>(b + 1) / r.buckets) << ','
                << (r.mean_wrong_ratio[b] ? fixed(*r.mean_wrong_ratio[b]) : std::string{}) << ',' << n << '\n';
        }
    }
}

void write_timing_jsonl(std::ostream& out, const ExperimentConfig& config, const TimingSweep& sweep,
                        double poison_fraction) {
    json rec = config_record(config, "diagnose-timing");
    rec["poison_fraction"] = poison_fraction;
    line(out, rec);
    for (std::size_t s = 0; s < sweep.seeds.size(); ++s) {
        const TimingResult& r = sweep.runs[s];
        line(out, {{"type", "timing"},
                   {"seed", sweep.seeds[s]},
                   {"injection_epochs", r.injection_epochs},
                   {"final_accuracy", r.final_accuracy},
                   {"delta", r.delta}});
    }
}

void write_timing_csv(std::ostream& out, const TimingSweep& sweep) {
    out << "seed,injection_epoch,final_accuracy,delta\n";
    for (std::size_t s = 0; s < sweep.seeds.size(); ++s) {
        const TimingResult& r = sweep.runs[s];
        for (std::size_t k = 0; k < r.injection_epochs.size(); ++k) {
            out << sweep.seeds[s] << ',' << r.injection_epochs[k] << ',' << fixed(r.final_accuracy[k]) << ','
                << fixed(r.delta[k]) << '\n';
        }
    }
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create output directory '" + dir + "': " + ec.message());
    }
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    return out;
}

}  // namespace pppl::harness

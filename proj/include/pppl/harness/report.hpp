#ifndef PPPL_HARNESS_REPORT_HPP
#define PPPL_HARNESS_REPORT_HPP

#include <fstream>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "pppl/harness/diagnostics.hpp"
#include "pppl/harness/experiment.hpp"

namespace pppl::harness {

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const IterationRecord& r);
nlohmann::json to_json(const ComparisonTable& t);

/// Line-delimited records: a config record first, then per-iteration, per-seed, and summary records.
void write_experiment_jsonl(std::ostream& out, const ExperimentResult& result);
/// seed,status,source_only,adapted rows followed by mean and std rows.
void write_experiment_csv(std::ostream& out, const ExperimentResult& result);

void write_table_jsonl(std::ostream& out, const ExperimentConfig& config, const std::string& kind,
                       const ComparisonTable& table);
/// Header row of column names, one row per seed, then mean and std rows.
void write_table_csv(std::ostream& out, const ComparisonTable& table);

void write_oracle_jsonl(std::ostream& out, const ExperimentConfig& config, const OracleFilterResult& result);
void write_oracle_csv(std::ostream& out, const OracleFilterResult& result);

void write_buckets_jsonl(std::ostream& out, const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                         const std::vector<BucketResult>& results);
void write_buckets_csv(std::ostream& out, const std::vector<std::uint64_t>& seeds,
                       const std::vector<BucketResult>& results);

void write_timing_jsonl(std::ostream& out, const ExperimentConfig& config, const TimingSweep& sweep,
                        double poison_fraction);
void write_timing_csv(std::ostream& out, const TimingSweep& sweep);

void ensure_directory(const std::string& dir);
std::ofstream open_output(const std::string& path);

/// Writes `<dir>/<stem>.jsonl` and `<dir>/<stem>.csv` through the two callbacks, creating `dir`.
template <typename JsonWriter, typename CsvWriter>
void write_report_pair(const std::string& dir, const std::string& stem, JsonWriter&& jsonl, CsvWriter&& csv) {
    ensure_directory(dir);
    {
        auto out = open_output(dir + "/" + stem + ".jsonl");
        jsonl(out);
    }
    {
        auto out = open_output(dir + "/" + stem + ".csv");
        csv(out);
    }
}

}  // namespace pppl::harness

#endif  // PPPL_HARNESS_REPORT_HPP

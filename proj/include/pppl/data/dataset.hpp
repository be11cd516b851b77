#ifndef PPPL_DATA_DATASET_HPP
#define PPPL_DATA_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Dense>

namespace pppl::data {

/// Feature rows with integer class labels in [0, num_classes).
struct LabeledDataset {
    Eigen::MatrixXf features;
    Eigen::VectorXi labels;
    int num_classes = 0;
    std::string provenance;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

/// Feature rows whose labels, if known at all, are kept aside for evaluation only.
struct UnlabeledDataset {
    Eigen::MatrixXf features;
    std::optional<Eigen::VectorXi> hidden_labels;
    int num_classes = 0;
    std::string provenance;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

struct DomainPair {
    LabeledDataset source;
    UnlabeledDataset target;
};

/// Throws DataError on empty data, non-finite features, or out-of-range labels.
void validate(const LabeledDataset& ds);
void validate(const UnlabeledDataset& ds);

/// Target view of a labeled set with its labels moved to `hidden_labels`.
UnlabeledDataset hide_labels(const LabeledDataset& ds);

/// Labeled view of a target set with hidden labels; throws ConfigError when there are none.
LabeledDataset reveal_labels(const UnlabeledDataset& ds);

/// Seeded shuffle split; the first part holds round(fraction * N) samples.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double fraction, std::uint64_t seed);

/// Comma-separated file with a mandatory header row. With `label_column`, that column is parsed
/// as an integer class and the result is labeled; otherwise every column is a feature.
std::variant<LabeledDataset, UnlabeledDataset> load_feature_csv(const std::string& path,
                                                                 const std::optional<std::string>& label_column);

/// Writes features (columns x0..x{D-1}) and, when given, a trailing `label` column.
void write_feature_csv(const std::string& path, const Eigen::MatrixXf& features,
                       const std::optional<Eigen::VectorXi>& labels);

}  // namespace pppl::data

#endif  // PPPL_DATA_DATASET_HPP

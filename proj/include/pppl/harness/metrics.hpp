#ifndef PPPL_HARNESS_METRICS_HPP
#define PPPL_HARNESS_METRICS_HPP

#include <vector>

#include <Eigen/Dense>

#include "pppl/adapt.hpp"

namespace pppl::harness {

struct Metrics {
    double accuracy = 0.0;
    Eigen::VectorXd precision;
    Eigen::VectorXd recall;
    Eigen::VectorXd f1;
    Eigen::MatrixXi confusion;  // rows: truth, cols: prediction
    int positive_class = 1;

    /// F1 of the positive class.
    double positive_f1() const { return f1(positive_class); }
    /// Unweighted mean of per-class F1.
    double macro_f1() const { return f1.mean(); }
};

/// Precision/recall/F1 are 0 whenever their denominator is 0.
Metrics compute_metrics(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth, int num_classes,
                        int positive_class);

/// Predictions by argmax of raw outputs.
Eigen::VectorXi predict(const Model& model, const Eigen::MatrixXf& features);

Metrics evaluate(const Model& model, const data::LabeledDataset& eval, int positive_class);

/// Spearman rank correlation with average ranks for ties. NaN when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(const std::vector<double>& v);

}  // namespace pppl::harness

#endif  // PPPL_HARNESS_METRICS_HPP

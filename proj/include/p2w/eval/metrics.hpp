#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "p2w/data/dataset.hpp"
#include "p2w/nn/mlp.hpp"

namespace p2w::eval {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    Eigen::MatrixXi counts;

    explicit ConfusionMatrix(int classes = 2) : counts(Eigen::MatrixXi::Zero(classes, classes)) {}
    int classes() const { return static_cast<int>(counts.rows()); }
    long total() const { return counts.cast<long>().sum(); }
    void add(int truth, int predicted);
};

ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);
ConfusionMatrix confusion_matrix(const nn::MlpModel& model, const data::LabeledDataset& dataset);

/// Fraction of correct predictions. An empty sample set is an error.
double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);
double accuracy(const nn::MlpModel& model, const data::LabeledDataset& dataset);

enum class Averaging { Binary, Macro };

/// Binary averaging scores class 1 and needs two classes. Macro averaging is the unweighted
/// mean of per-class F1, where a class with P + R = 0 scores 0.
double f1_score(const ConfusionMatrix& cm, Averaging averaging);
/// Binary for two classes, macro otherwise.
Averaging default_averaging(int classes);

/// First epoch (1-indexed) that is a running maximum of the curve and is followed by
/// `window` epochs all strictly below it.
std::optional<int> overfit_epoch(const std::vector<double>& curve, int window = 5);

} // namespace p2w::eval

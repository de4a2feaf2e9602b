#include "p2w/eval/metrics.hpp"

#include "p2w/common/error.hpp"

namespace p2w::eval {

void ConfusionMatrix::add(int truth, int predicted) {
    if (truth < 0 || truth >= classes() || predicted < 0 || predicted >= classes()) {
        throw ValidationError("confusion matrix: class index out of range");
    }
    ++counts(truth, predicted);
}

ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
    if (truth.size() != predicted.size()) throw ShapeError("confusion matrix: label count mismatch");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return cm;
}

ConfusionMatrix confusion_matrix(const nn::MlpModel& model, const data::LabeledDataset& dataset) {
    return confusion_matrix(dataset.labels, nn::mlp_classify(model, dataset.samples), model.topology.class_count());
}

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.empty()) throw ValidationError("accuracy of an empty sample set");
    if (truth.size() != predicted.size()) throw ShapeError("accuracy: label count mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double accuracy(const nn::MlpModel& model, const data::LabeledDataset& dataset) {
    return accuracy(dataset.labels, nn::mlp_classify(model, dataset.samples));
}

namespace {

double class_f1(const ConfusionMatrix& cm, int c) {
    const double tp = cm.counts(c, c);
    const double predicted = cm.counts.col(c).sum();
    const double actual = cm.counts.row(c).sum();
    if (tp == 0.0) return 0.0; // covers P + R = 0
    const double p = tp / predicted;
    const double r = tp / actual;
    return 2.0 * p * r / (p + r);
}

} // namespace

double f1_score(const ConfusionMatrix& cm, Averaging averaging) {
    if (averaging == Averaging::Binary) {
        if (cm.classes() != 2) throw ValidationError("binary F1 needs exactly two classes");
        return class_f1(cm, 1);
    }
    double sum = 0.0;
    for (int c = 0; c < cm.classes(); ++c) sum += class_f1(cm, c);
    return sum / cm.classes();
}

Averaging default_averaging(int classes) { return classes == 2 ? Averaging::Binary : Averaging::Macro; }

std::optional<int> overfit_epoch(const std::vector<double>& curve, int window) {
    if (window < 1) throw ValidationError("overfit window must be >= 1");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < curve.size(); ++e) {
        if (curve[e] < best) continue;
        best = curve[e];
        if (e + static_cast<std::size_t>(window) >= curve.size()) break;
        bool declines = true;
        for (int k = 1; k <= window && declines; ++k) declines = curve[e + k] < curve[e];
        if (declines) return static_cast<int>(e) + 1;
    }
    return std::nullopt;
}

} // namespace p2w::eval

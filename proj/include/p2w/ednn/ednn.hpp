#pragma once

#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "p2w/codec/weights_matrix.hpp"
#include "p2w/nn/network.hpp"
#include "p2w/nn/optim.hpp"

namespace p2w::ednn {

enum class Scale { Paper, Desk };

Scale scale_from_string(const std::string& s);
std::string to_string(Scale s);

/// Encoder-decoder mapping a reduced power trace to a weights matrix.
struct EdnnModel {
    nn::Network net;
    int input_len = 0;
    int rows = 0;
    int cols = 0;
    Scale scale = Scale::Desk;
    nn::Topology target_topology; // topology whose weights matrix the decoder emits

    std::string digest();
};

/// Layer stack for the given scale. Paper scale:
///   Dense 256, ReLU, reshape 1x256,
///   Conv1D 256/128/64 (kernel 4, stride 1) each with ReLU,
///   ConvTranspose1D 256 (kernel 5) + ReLU + Dropout 0.5,
///   ConvTranspose1D 128 (kernel 4) + ReLU + Dropout 0.5,
///   Dense rows*cols, reshape rows x cols.
/// Desk scale halves every filter count.
std::vector<nn::LayerSpec> ednn_layer_specs(int rows, int cols, Scale scale);

EdnnModel build_ednn(int input_len, std::pair<int, int> output_shape, Scale scale, std::uint64_t seed);
EdnnModel build_ednn(int input_len, const nn::Topology& target, Scale scale, std::uint64_t seed);

/// Fraction of entries (restricted to `mask` != 0 when given) with |pred - truth| <= tau.
double ednn_accuracy(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, double tau,
                     const Eigen::MatrixXd* mask = nullptr);
/// Coefficient-recovery accuracy over the non-pad entries of `truth`'s topology.
double ednn_accuracy(const codec::WeightsMatrix& pred, const codec::WeightsMatrix& truth, double tau);

/// Supervised pairs: row i of `inputs` (standardized reduced trace) maps to row i of
/// `targets` (weights matrix flattened row-major).
struct TrainingSet {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
    std::vector<int> train;
    std::vector<int> validation;
    Eigen::MatrixXd mask; // rows x cols coefficient mask
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> validation_accuracy;
    bool reached_threshold = false;
    int epochs_run() const { return static_cast<int>(train_loss.size()); }
    double final_validation_accuracy() const {
        return validation_accuracy.empty() ? 0.0 : validation_accuracy.back();
    }
};

/// Minimises the mean squared matrix error with the configured optimizer. Stops as soon as
/// the validation accuracy reaches `theta`. Throws NumericalError naming the epoch on divergence.
/// `on_epoch` (optional) receives epoch, mean training loss and validation accuracy.
using EpochHook = std::function<void(int, double, double)>;
TrainHistory train_ednn(EdnnModel& model, const TrainingSet& data, const nn::TrainConfig& cfg, double theta,
                        double tau, const EpochHook& on_epoch = {});

/// Mean accuracy over the given rows of a training set.
double split_accuracy(EdnnModel& model, const TrainingSet& data, const std::vector<int>& rows, double tau);

/// Single inference pass (dropout off); the result is tagged with the target topology.
codec::WeightsMatrix predict_weights(EdnnModel& model, const Eigen::VectorXd& reduced_trace);

/// `ednn.json` (architecture) + `ednn.f64` (parameters in layer order, weights before biases).
void save_ednn(const std::filesystem::path& dir, EdnnModel& model);
EdnnModel load_ednn(const std::filesystem::path& dir);

} // namespace p2w::ednn

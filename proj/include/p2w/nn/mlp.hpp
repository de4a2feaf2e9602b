#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "p2w/common/rng.hpp"
#include "p2w/nn/topology.hpp"

namespace p2w::nn {

/// Fully connected classifier. weights[l] is fan_in x fan_out; biases[l] has fan_out entries.
struct MlpModel {
    Topology topology;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    static MlpModel zeros(const Topology& topology);
    /// Uniform in [-sqrt(1/fan_in), +sqrt(1/fan_in)] for weights and biases.
    static MlpModel random(const Topology& topology, Rng& rng);

    /// Shapes match the topology and every coefficient is finite.
    void validate() const;
    std::size_t parameter_count() const;
    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> parameter_blocks() const;

    bool operator==(const MlpModel& other) const;
};

enum class Loss { MSE, CrossEntropy };

struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    double loss = 0.0;

    std::vector<std::span<const double>> blocks() const;
};

/// Single-sample inference. With `train_mode`, dropout follows every hidden layer and `rng` must be set.
Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& input, bool train_mode = false,
                            Rng* rng = nullptr);

/// Inference over a batch (rows are samples); returns N x output_width.
Eigen::MatrixXd mlp_predict(const MlpModel& model, const Eigen::MatrixXd& inputs);

/// Loss and parameter gradients over a batch. Targets are N x output_width:
/// 0/1 for a sigmoid output, one-hot rows for softmax. Passing `dropout_rng`
/// runs the forward pass in training mode.
MlpGradients mlp_backward(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                          Loss loss, Rng* dropout_rng = nullptr);

/// Class decision per row: threshold 0.5 for sigmoid, argmax for softmax.
std::vector<int> mlp_classify(const MlpModel& model, const Eigen::MatrixXd& inputs);

Json to_json(const MlpModel& model);
MlpModel mlp_from_json(const Json& j);

} // namespace p2w::nn

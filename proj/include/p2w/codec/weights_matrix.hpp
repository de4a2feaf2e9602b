#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "p2w/nn/mlp.hpp"

namespace p2w::codec {

/// One row per neuron (layer-major, neuron-major): the neuron's fan-in weights, then its
/// bias, then zero padding up to the widest row.
struct WeightsMatrix {
    Eigen::MatrixXd entries;
    nn::Topology topology;

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
    std::string topology_digest() const { return topology.digest(); }
};

/// (sum of non-input layer widths, 1 + widest fan-in).
std::pair<int, int> matrix_shape(const nn::Topology& topology);

/// 1 where an entry holds a coefficient, 0 on padding.
Eigen::MatrixXd coefficient_mask(const nn::Topology& topology);

WeightsMatrix coefficients_to_matrix(const nn::MlpModel& model);

/// Inverse of coefficients_to_matrix; padding is ignored.
nn::MlpModel matrix_to_coefficients(const WeightsMatrix& matrix, const nn::Topology& topology);
nn::MlpModel matrix_to_coefficients(const Eigen::MatrixXd& entries, const nn::Topology& topology);

/// {"rows", "cols", "topology", "data" (row-major)}.
Json to_json(const WeightsMatrix& m);
WeightsMatrix weights_matrix_from_json(const Json& j);

} // namespace p2w::codec

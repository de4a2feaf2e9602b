#include "p2w/codec/weights_matrix.hpp"

#include <algorithm>

#include "p2w/common/error.hpp"

namespace p2w::codec {

std::pair<int, int> matrix_shape(const nn::Topology& topology) {
    topology.validate();
    int rows = 0;
    int widest = 0;
    for (int l = 0; l < topology.layer_count(); ++l) {
        rows += topology.layer_sizes[l + 1];
        widest = std::max(widest, topology.layer_sizes[l]);
    }
    return {rows, widest + 1};
}

Eigen::MatrixXd coefficient_mask(const nn::Topology& topology) {
    const auto [rows, cols] = matrix_shape(topology);
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(rows, cols);
    int row = 0;
    for (int l = 0; l < topology.layer_count(); ++l) {
        for (int j = 0; j < topology.layer_sizes[l + 1]; ++j, ++row) {
            mask.row(row).head(topology.layer_sizes[l] + 1).setOnes();
        }
    }
    return mask;
}

WeightsMatrix coefficients_to_matrix(const nn::MlpModel& model) {
    model.validate();
    const auto [rows, cols] = matrix_shape(model.topology);
    WeightsMatrix out{Eigen::MatrixXd::Zero(rows, cols), model.topology};
    int row = 0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        for (Eigen::Index j = 0; j < w.cols(); ++j, ++row) {
            Eigen::Index z = 0;
            for (Eigen::Index k = 0; k < w.rows(); ++k) out.entries(row, z++) = w(k, j);
            out.entries(row, z) = model.biases[l](j);
        }
    }
    return out;
}

nn::MlpModel matrix_to_coefficients(const Eigen::MatrixXd& entries, const nn::Topology& topology) {
    const auto [rows, cols] = matrix_shape(topology);
    if (entries.rows() != rows || entries.cols() != cols) {
        throw ShapeError("weights matrix is " + std::to_string(entries.rows()) + "x" + std::to_string(entries.cols()) +
                         ", topology needs " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    nn::MlpModel model = nn::MlpModel::zeros(topology);
    int row = 0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        auto& w = model.weights[l];
        for (Eigen::Index j = 0; j < w.cols(); ++j, ++row) {
            for (Eigen::Index k = 0; k < w.rows(); ++k) w(k, j) = entries(row, k);
            model.biases[l](j) = entries(row, w.rows());
        }
    }
    return model;
}

nn::MlpModel matrix_to_coefficients(const WeightsMatrix& matrix, const nn::Topology& topology) {
    if (!(matrix.topology.layer_sizes.empty()) && matrix.topology.layer_sizes != topology.layer_sizes) {
        throw ShapeError("weights matrix was produced for topology " + matrix.topology_digest() +
                         ", decoding requested for " + topology.digest());
    }
    return matrix_to_coefficients(matrix.entries, topology);
}

Json to_json(const WeightsMatrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.entries.size()));
    for (Eigen::Index r = 0; r < m.entries.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.entries.cols(); ++c) data.push_back(m.entries(r, c));
    }
    return Json{{"rows", m.rows()},
                {"cols", m.cols()},
                {"topology", m.topology.layer_sizes},
                {"topology_digest", m.topology_digest()},
                {"data", data}};
}

WeightsMatrix weights_matrix_from_json(const Json& j) {
    WeightsMatrix m;
    m.topology.layer_sizes = j.at("topology").get<std::vector<int>>();
    m.topology.validate();
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const auto expected = matrix_shape(m.topology);
    if (expected != std::pair{rows, cols}) {
        throw ShapeError("weights matrix header says " + std::to_string(rows) + "x" + std::to_string(cols) +
                         ", topology needs " + std::to_string(expected.first) + "x" + std::to_string(expected.second));
    }
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != static_cast<std::size_t>(rows) * cols) {
        throw ShapeError("weights matrix data has " + std::to_string(data.size()) + " entries, expected " +
                         std::to_string(rows * cols));
    }
    m.entries.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m.entries(r, c) = data[static_cast<std::size_t>(r) * cols + c];
    }
    return m;
}

} // namespace p2w::codec

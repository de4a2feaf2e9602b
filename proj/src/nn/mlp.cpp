#include "p2w/nn/mlp.hpp"

#include <cmath>

#include "p2w/common/error.hpp"
#include "p2w/nn/ops.hpp"

namespace p2w::nn {

MlpModel MlpModel::zeros(const Topology& topology) {
    topology.validate();
    MlpModel m;
    m.topology = topology;
    for (int l = 0; l < topology.layer_count(); ++l) {
        m.weights.push_back(Eigen::MatrixXd::Zero(topology.layer_sizes[l], topology.layer_sizes[l + 1]));
        m.biases.push_back(Eigen::VectorXd::Zero(topology.layer_sizes[l + 1]));
    }
    return m;
}

MlpModel MlpModel::random(const Topology& topology, Rng& rng) {
    MlpModel m = zeros(topology);
    for (int l = 0; l < topology.layer_count(); ++l) {
        const double bound = std::sqrt(1.0 / topology.layer_sizes[l]);
        auto& w = m.weights[l];
        // fill in the codec's order (neuron-major) so a seed maps to the same matrix rows
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index k = 0; k < w.rows(); ++k) w(k, j) = rng.uniform(-bound, bound);
            m.biases[l](j) = rng.uniform(-bound, bound);
        }
    }
    return m;
}

void MlpModel::validate() const {
    topology.validate();
    const auto layers = static_cast<std::size_t>(topology.layer_count());
    if (weights.size() != layers || biases.size() != layers) {
        throw ShapeError("model has " + std::to_string(weights.size()) + " weight layers, topology expects " +
                         std::to_string(layers));
    }
    for (std::size_t l = 0; l < layers; ++l) {
        const int fan_in = topology.layer_sizes[l];
        const int fan_out = topology.layer_sizes[l + 1];
        if (weights[l].rows() != fan_in || weights[l].cols() != fan_out || biases[l].size() != fan_out) {
            throw ShapeError("layer " + std::to_string(l) + ": expected " + std::to_string(fan_in) + "x" +
                             std::to_string(fan_out) + " weights");
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw ValidationError("layer " + std::to_string(l) + " holds a non-finite coefficient");
        }
    }
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

std::vector<std::span<double>> MlpModel::parameter_blocks() {
    std::vector<std::span<double>> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.emplace_back(weights[l].data(), weights[l].size());
        out.emplace_back(biases[l].data(), biases[l].size());
    }
    return out;
}

std::vector<std::span<const double>> MlpModel::parameter_blocks() const {
    std::vector<std::span<const double>> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.emplace_back(weights[l].data(), weights[l].size());
        out.emplace_back(biases[l].data(), biases[l].size());
    }
    return out;
}

bool MlpModel::operator==(const MlpModel& other) const {
    if (!(topology == other.topology) || weights.size() != other.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
    }
    return true;
}

std::vector<std::span<const double>> MlpGradients::blocks() const {
    std::vector<std::span<const double>> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.emplace_back(weights[l].data(), weights[l].size());
        out.emplace_back(biases[l].data(), biases[l].size());
    }
    return out;
}

namespace {

struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations; // activations[0] = input, activations[l+1] = layer l output
    std::vector<Eigen::MatrixXd> masks;       // dropout masks for hidden layers (empty if inference)
    Eigen::MatrixXd logits;
    Eigen::MatrixXd output;
};

void check_input(const MlpModel& model, Eigen::Index width) {
    if (width != model.topology.input_width()) {
        throw ShapeError("layer 0: input has " + std::to_string(width) + " features, expected " +
                         std::to_string(model.topology.input_width()));
    }
}

ForwardCache forward(const MlpModel& model, const Eigen::MatrixXd& inputs, Rng* dropout_rng) {
    check_input(model, inputs.cols());
    ForwardCache c;
    c.activations.push_back(inputs);
    const int layers = model.topology.layer_count();
    for (int l = 0; l < layers; ++l) {
        if (model.weights[l].rows() != c.activations.back().cols()) {
            throw ShapeError("layer " + std::to_string(l) + ": weight fan-in " +
                             std::to_string(model.weights[l].rows()) + " does not match incoming width " +
                             std::to_string(c.activations.back().cols()));
        }
        Eigen::MatrixXd z = c.activations.back() * model.weights[l];
        z.rowwise() += model.biases[l].transpose();
        if (l + 1 < layers) {
            Eigen::MatrixXd a = z.cwiseMax(0.0);
            if (dropout_rng != nullptr && model.topology.dropout_rate > 0.0) {
                c.masks.push_back(dropout_mask(a.rows(), a.cols(), model.topology.dropout_rate, *dropout_rng));
                a = a.cwiseProduct(c.masks.back());
            }
            c.activations.push_back(std::move(a));
        } else {
            c.logits = std::move(z);
        }
    }
    c.output = model.topology.output_activation() == OutputActivation::Sigmoid ? sigmoid(c.logits)
                                                                               : softmax_rows(c.logits);
    if (!c.output.allFinite()) throw NumericalError("non-finite model output");
    return c;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

} // namespace

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& input, bool train_mode, Rng* rng) {
    if (train_mode && rng == nullptr) throw ValidationError("training-mode forward pass needs a generator");
    Eigen::MatrixXd row = input.transpose();
    return forward(model, row, train_mode ? rng : nullptr).output.row(0).transpose();
}

Eigen::MatrixXd mlp_predict(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    return forward(model, inputs, nullptr).output;
}

std::vector<int> mlp_classify(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    const Eigen::MatrixXd out = mlp_predict(model, inputs);
    std::vector<int> labels(static_cast<std::size_t>(out.rows()));
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        if (out.cols() == 1) {
            labels[r] = out(r, 0) >= 0.5 ? 1 : 0;
        } else {
            Eigen::Index best;
            out.row(r).maxCoeff(&best);
            labels[r] = static_cast<int>(best);
        }
    }
    return labels;
}

MlpGradients mlp_backward(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                          Loss loss, Rng* dropout_rng) {
    if (inputs.rows() < 1) throw ShapeError("backward: empty batch");
    if (targets.rows() != inputs.rows() || targets.cols() != model.topology.output_width()) {
        throw ShapeError("backward: targets are " + std::to_string(targets.rows()) + "x" +
                         std::to_string(targets.cols()) + ", expected " + std::to_string(inputs.rows()) + "x" +
                         std::to_string(model.topology.output_width()));
    }
    const ForwardCache c = forward(model, inputs, dropout_rng);
    const double n = static_cast<double>(inputs.rows());
    const bool is_sigmoid = model.topology.output_activation() == OutputActivation::Sigmoid;

    MlpGradients g;
    Eigen::MatrixXd delta; // dLoss/dlogits
    if (loss == Loss::MSE) {
        g.loss = loss_mse(c.output, targets);
        const Eigen::MatrixXd d_out = 2.0 * (c.output - targets) / n;
        if (is_sigmoid) {
            delta = d_out.cwiseProduct(c.output.cwiseProduct((1.0 - c.output.array()).matrix()));
        } else {
            const Eigen::VectorXd dot = d_out.cwiseProduct(c.output).rowwise().sum();
            delta = c.output.cwiseProduct(d_out - dot.replicate(1, d_out.cols()));
        }
    } else {
        double total = 0.0;
        if (is_sigmoid) {
            for (Eigen::Index r = 0; r < c.logits.rows(); ++r) {
                const double z = c.logits(r, 0);
                const double t = targets(r, 0);
                total += t * softplus(-z) + (1.0 - t) * softplus(z);
            }
        } else {
            for (Eigen::Index r = 0; r < c.logits.rows(); ++r) {
                const double m = c.logits.row(r).maxCoeff();
                const double lse = m + std::log((c.logits.row(r).array() - m).exp().sum());
                total -= (targets.row(r).array() * (c.logits.row(r).array() - lse)).sum();
            }
        }
        g.loss = total / n;
        delta = (c.output - targets) / n;
    }
    if (!std::isfinite(g.loss)) throw NumericalError("non-finite loss");

    const int layers = model.topology.layer_count();
    g.weights.resize(layers);
    g.biases.resize(layers);
    for (int l = layers - 1; l >= 0; --l) {
        g.weights[l] = c.activations[l].transpose() * delta;
        g.biases[l] = delta.colwise().sum().transpose();
        if (l == 0) break;
        Eigen::MatrixXd d_prev = delta * model.weights[l].transpose();
        if (!c.masks.empty()) d_prev = d_prev.cwiseProduct(c.masks[l - 1]);
        // ReLU gate: the stored activation is positive exactly where the pre-activation was
        delta = d_prev.cwiseProduct((c.activations[l].array() > 0.0).cast<double>().matrix());
        if (!delta.allFinite()) throw NumericalError("non-finite gradient at layer " + std::to_string(l));
    }
    return g;
}

Json to_json(const MlpModel& model) {
    Json layers = Json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(w.rows()));
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) rows[i].push_back(w(i, j));
        }
        std::vector<double> b(model.biases[l].data(), model.biases[l].data() + model.biases[l].size());
        layers.push_back(Json{{"weights", rows}, {"bias", b}});
    }
    return Json{{"topology", to_json(model.topology)}, {"layers", layers}};
}

MlpModel mlp_from_json(const Json& j) {
    MlpModel m = MlpModel::zeros(topology_from_json(j.at("topology")));
    const auto& layers = j.at("layers");
    if (layers.size() != m.weights.size()) throw ShapeError("model file layer count does not match its topology");
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const auto rows = layers[l].at("weights").get<std::vector<std::vector<double>>>();
        const auto bias = layers[l].at("bias").get<std::vector<double>>();
        if (rows.size() != static_cast<std::size_t>(m.weights[l].rows()) ||
            bias.size() != static_cast<std::size_t>(m.biases[l].size())) {
            throw ShapeError("model file layer " + std::to_string(l) + " has the wrong shape");
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != static_cast<std::size_t>(m.weights[l].cols())) {
                throw ShapeError("model file layer " + std::to_string(l) + " has a ragged row");
            }
            for (std::size_t k = 0; k < rows[i].size(); ++k) m.weights[l](i, k) = rows[i][k];
        }
        for (std::size_t k = 0; k < bias.size(); ++k) m.biases[l](k) = bias[k];
    }
    m.validate();
    return m;
}

} // namespace p2w::nn

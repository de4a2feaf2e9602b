#include "p2w/ednn/ednn.hpp"

#include <cmath>

#include "p2w/common/digest.hpp"
#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"

namespace p2w::ednn {

Scale scale_from_string(const std::string& s) {
    if (s == "paper") return Scale::Paper;
    if (s == "desk") return Scale::Desk;
    throw ValidationError("unknown scale '" + s + "' (expected paper or desk)");
}

std::string to_string(Scale s) { return s == Scale::Paper ? "paper" : "desk"; }

std::string EdnnModel::digest() {
    const auto params = net.flat_parameters();
    Digest d;
    d.text("ednn").u64(static_cast<std::uint64_t>(input_len)).u64(static_cast<std::uint64_t>(rows));
    d.u64(static_cast<std::uint64_t>(cols)).reals(params);
    return d.hex();
}

std::vector<nn::LayerSpec> ednn_layer_specs(int rows, int cols, Scale scale) {
    using nn::LayerSpec;
    const int div = scale == Scale::Paper ? 1 : 2;
    constexpr int kEncoderWidth = 256;
    return {
        LayerSpec::dense(kEncoderWidth),
        LayerSpec::relu(),
        LayerSpec::reshape({1, kEncoderWidth}),
        LayerSpec::conv1d(256 / div, 4),
        LayerSpec::relu(),
        LayerSpec::conv1d(128 / div, 4),
        LayerSpec::relu(),
        LayerSpec::conv1d(64 / div, 4),
        LayerSpec::relu(),
        LayerSpec::conv_transpose1d(256 / div, 5),
        LayerSpec::relu(),
        LayerSpec::dropout(0.5),
        LayerSpec::conv_transpose1d(128 / div, 4),
        LayerSpec::relu(),
        LayerSpec::dropout(0.5),
        LayerSpec::dense(rows * cols),
        LayerSpec::reshape({rows, cols}),
    };
}

EdnnModel build_ednn(int input_len, std::pair<int, int> output_shape, Scale scale, std::uint64_t seed) {
    if (input_len < 16) throw ValidationError("ednn: input length must be >= 16, got " + std::to_string(input_len));
    const auto [rows, cols] = output_shape;
    if (rows < 1 || cols < 1) throw ValidationError("ednn: output shape must be positive");
    EdnnModel m;
    m.net = nn::Network({1, input_len}, ednn_layer_specs(rows, cols, scale));
    m.input_len = input_len;
    m.rows = rows;
    m.cols = cols;
    m.scale = scale;
    Rng rng(seed);
    m.net.initialize(rng);
    return m;
}

EdnnModel build_ednn(int input_len, const nn::Topology& target, Scale scale, std::uint64_t seed) {
    EdnnModel m = build_ednn(input_len, codec::matrix_shape(target), scale, seed);
    m.target_topology = target;
    return m;
}

double ednn_accuracy(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, double tau,
                     const Eigen::MatrixXd* mask) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw ShapeError("ednn accuracy: prediction is " + std::to_string(pred.rows()) + "x" +
                         std::to_string(pred.cols()) + ", truth is " + std::to_string(truth.rows()) + "x" +
                         std::to_string(truth.cols()));
    }
    if (mask != nullptr && (mask->rows() != truth.rows() || mask->cols() != truth.cols())) {
        throw ShapeError("ednn accuracy: mask shape differs from the matrices");
    }
    long hit = 0;
    long total = 0;
    for (Eigen::Index r = 0; r < pred.rows(); ++r) {
        for (Eigen::Index c = 0; c < pred.cols(); ++c) {
            if (mask != nullptr && (*mask)(r, c) == 0.0) continue;
            ++total;
            if (std::abs(pred(r, c) - truth(r, c)) <= tau) ++hit;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

double ednn_accuracy(const codec::WeightsMatrix& pred, const codec::WeightsMatrix& truth, double tau) {
    const Eigen::MatrixXd mask = codec::coefficient_mask(truth.topology);
    return ednn_accuracy(pred.entries, truth.entries, tau, &mask);
}

namespace {

nn::Batch gather_rows(const Eigen::MatrixXd& m, std::span<const int> rows) {
    nn::Batch out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

template <typename Row>
Eigen::MatrixXd unflatten(const Row& row, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = row(r * cols + c);
    }
    return m;
}

} // namespace

double split_accuracy(EdnnModel& model, const TrainingSet& data, const std::vector<int>& rows, double tau) {
    if (rows.empty()) return 0.0;
    constexpr std::size_t kChunk = 100;
    double sum = 0.0;
    for (std::size_t start = 0; start < rows.size(); start += kChunk) {
        const std::span<const int> part(rows.data() + start, std::min(kChunk, rows.size() - start));
        const nn::Batch pred = model.net.forward(gather_rows(data.inputs, part), false);
        for (std::size_t i = 0; i < part.size(); ++i) {
            const Eigen::MatrixXd pm = unflatten(pred.row(static_cast<Eigen::Index>(i)), model.rows, model.cols);
            const Eigen::MatrixXd tm = unflatten(data.targets.row(part[i]), model.rows, model.cols);
            sum += ednn_accuracy(pm, tm, tau, data.mask.size() > 0 ? &data.mask : nullptr);
        }
    }
    return sum / static_cast<double>(rows.size());
}

TrainHistory train_ednn(EdnnModel& model, const TrainingSet& data, const nn::TrainConfig& cfg, double theta,
                        double tau, const EpochHook& on_epoch) {
    cfg.validate();
    if (data.inputs.cols() != model.input_len) {
        throw ShapeError("ednn training inputs have " + std::to_string(data.inputs.cols()) +
                         " features, model expects " + std::to_string(model.input_len));
    }
    if (data.targets.cols() != static_cast<Eigen::Index>(model.rows) * model.cols) {
        throw ShapeError("ednn training targets do not match the output matrix shape");
    }
    if (data.train.empty()) throw ValidationError("ednn training split is empty");

    Rng shuffle_rng(derive_seed(cfg.rng_seed, 1));
    Rng dropout_rng(derive_seed(cfg.rng_seed, 2));
    nn::GradientOptimizer opt(cfg);
    std::vector<int> order = data.train;
    TrainHistory history;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(std::span<int>(order));
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::span<const int> idx(order.data() + start,
                                           std::min<std::size_t>(cfg.batch_size, order.size() - start));
            const nn::Batch x = gather_rows(data.inputs, idx);
            const nn::Batch y = gather_rows(data.targets, idx);
            model.net.zero_gradients();
            const nn::Batch pred = model.net.forward(x, true, &dropout_rng);
            const double n = static_cast<double>(idx.size());
            const nn::Batch diff = pred - y;
            const double loss = diff.squaredNorm() / n;
            if (!std::isfinite(loss)) {
                throw NumericalError("ednn training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(start / cfg.batch_size + 1));
            }
            loss_sum += loss * n;
            model.net.backward(diff * (2.0 / n));
            const auto params = model.net.parameters();
            const auto grads = model.net.gradients();
            opt.step(params, grads);
        }
        history.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
        const double acc = data.validation.empty() ? 0.0 : split_accuracy(model, data, data.validation, tau);
        history.validation_accuracy.push_back(acc);
        if (on_epoch) on_epoch(epoch, history.train_loss.back(), acc);
        if (acc >= theta) {
            history.reached_threshold = true;
            break;
        }
    }
    return history;
}

codec::WeightsMatrix predict_weights(EdnnModel& model, const Eigen::VectorXd& reduced_trace) {
    if (reduced_trace.size() != model.input_len) {
        throw ShapeError("ednn: reduced trace has length " + std::to_string(reduced_trace.size()) + ", expected " +
                         std::to_string(model.input_len));
    }
    nn::Batch x(1, model.input_len);
    x.row(0) = reduced_trace.transpose();
    const nn::Batch y = model.net.forward(x, false);
    codec::WeightsMatrix out;
    out.topology = model.target_topology;
    out.entries.resize(model.rows, model.cols);
    for (int r = 0; r < model.rows; ++r) {
        for (int c = 0; c < model.cols; ++c) out.entries(r, c) = y(0, r * model.cols + c);
    }
    return out;
}

void save_ednn(const std::filesystem::path& dir, EdnnModel& model) {
    std::filesystem::create_directories(dir);
    Json layers = Json::array();
    for (const auto& s : model.net.specs()) layers.push_back(to_json(s));
    const auto params = model.net.flat_parameters();
    write_json(dir / "ednn.json", Json{{"input_len", model.input_len},
                                       {"output_shape", {model.rows, model.cols}},
                                       {"scale", to_string(model.scale)},
                                       {"target_topology", nn::to_json(model.target_topology)},
                                       {"layers", layers},
                                       {"parameter_count", params.size()},
                                       {"digest", model.digest()}});
    write_f64(dir / "ednn.f64", params);
}

EdnnModel load_ednn(const std::filesystem::path& dir) {
    const Json meta = read_json(dir / "ednn.json");
    EdnnModel m;
    m.input_len = meta.at("input_len").get<int>();
    const auto shape = meta.at("output_shape").get<std::vector<int>>();
    m.rows = shape.at(0);
    m.cols = shape.at(1);
    m.scale = scale_from_string(meta.at("scale").get<std::string>());
    m.target_topology = nn::topology_from_json(meta.at("target_topology"));
    std::vector<nn::LayerSpec> specs;
    for (const auto& l : meta.at("layers")) specs.push_back(nn::layer_spec_from_json(l));
    m.net = nn::Network({1, m.input_len}, specs);
    m.net.set_flat_parameters(read_f64(dir / "ednn.f64"));
    return m;
}

} // namespace p2w::ednn

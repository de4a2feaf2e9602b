#include "p2w/nn/layers.hpp"

#include <cmath>

#include "p2w/common/error.hpp"

namespace p2w::nn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

std::string to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv1D: return "conv1d";
    case LayerKind::ConvTranspose1D: return "conv_transpose1d";
    case LayerKind::Activation: return "relu";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Reshape: return "reshape";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    for (auto k : {LayerKind::Dense, LayerKind::Conv1D, LayerKind::ConvTranspose1D, LayerKind::Activation,
                   LayerKind::Dropout, LayerKind::Reshape}) {
        if (to_string(k) == s) return k;
    }
    throw ValidationError("unknown layer kind '" + s + "'");
}

void LayerSpec::validate() const {
    if (kernel_size < 1) throw ValidationError("kernel_size must be >= 1");
    if (stride < 1) throw ValidationError("stride must be >= 1");
    if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("dropout rate must lie in [0, 1)");
    if ((kind == LayerKind::Conv1D || kind == LayerKind::ConvTranspose1D) && filters < 1) {
        throw ValidationError("convolution needs at least one filter");
    }
    if (kind == LayerKind::Dense && out_features < 1) throw ValidationError("dense layer needs out_features >= 1");
}

Json to_json(const LayerSpec& s) {
    Json j{{"kind", to_string(s.kind)}};
    switch (s.kind) {
    case LayerKind::Dense: j["out_features"] = s.out_features; break;
    case LayerKind::Conv1D:
    case LayerKind::ConvTranspose1D:
        j["filters"] = s.filters;
        j["kernel_size"] = s.kernel_size;
        j["stride"] = s.stride;
        break;
    case LayerKind::Dropout: j["rate"] = s.rate; break;
    case LayerKind::Reshape: j["shape"] = {s.reshape_to.channels, s.reshape_to.length}; break;
    case LayerKind::Activation: break;
    }
    return j;
}

LayerSpec layer_spec_from_json(const Json& j) {
    LayerSpec s;
    s.kind = layer_kind_from_string(j.at("kind").get<std::string>());
    s.out_features = j.value("out_features", 0);
    s.filters = j.value("filters", 0);
    s.kernel_size = j.value("kernel_size", 1);
    s.stride = j.value("stride", 1);
    s.rate = j.value("rate", 0.0);
    if (j.contains("shape")) {
        const auto shape = j.at("shape").get<std::vector<int>>();
        if (shape.size() != 2) throw ValidationError("reshape needs [channels, length]");
        s.reshape_to = {shape[0], shape[1]};
    }
    s.validate();
    return s;
}

int conv1d_output_length(int length, int kernel, int stride) {
    if (length < kernel) return 0;
    return (length - kernel) / stride + 1;
}

int conv_transpose1d_output_length(int length, int kernel, int stride) { return (length - 1) * stride + kernel; }

namespace {

void fill_uniform(std::span<double> values, double bound, Rng& rng) {
    for (double& v : values) v = rng.uniform(-bound, bound);
}

class Dense final : public Layer {
public:
    Dense(const LayerSpec& spec, const Shape& in) : spec_(spec) {
        in_ = in;
        out_ = {1, spec.out_features};
        w_ = RowMatrix::Zero(in.features(), spec.out_features);
        b_ = Eigen::RowVectorXd::Zero(spec.out_features);
        gw_ = w_;
        gb_ = b_;
    }

    LayerSpec spec() const override { return spec_; }

    Batch forward(const Batch& x, bool, Rng*) override {
        input_ = x;
        Batch y = x * w_;
        y.rowwise() += b_;
        return y;
    }

    Batch backward(const Batch& grad_out) override {
        gw_.noalias() += input_.transpose() * grad_out;
        gb_ += grad_out.colwise().sum();
        return grad_out * w_.transpose();
    }

    std::vector<std::span<double>> parameters() override {
        return {{w_.data(), static_cast<std::size_t>(w_.size())}, {b_.data(), static_cast<std::size_t>(b_.size())}};
    }
    std::vector<std::span<const double>> gradients() const override {
        return {{gw_.data(), static_cast<std::size_t>(gw_.size())},
                {gb_.data(), static_cast<std::size_t>(gb_.size())}};
    }
    void zero_gradients() override {
        gw_.setZero();
        gb_.setZero();
    }
    void initialize(Rng& rng) override {
        const double bound = std::sqrt(1.0 / in_.features());
        for (auto block : parameters()) fill_uniform(block, bound, rng);
    }

private:
    LayerSpec spec_;
    RowMatrix w_, gw_;
    Eigen::RowVectorXd b_, gb_;
    Batch input_;
};

// Weight layout: filters x (in_channels * kernel), entry (f, c * K + k).
class Conv1D final : public Layer {
public:
    Conv1D(const LayerSpec& spec, const Shape& in) : spec_(spec) {
        in_ = in;
        out_ = {spec.filters, conv1d_output_length(in.length, spec.kernel_size, spec.stride)};
        w_ = RowMatrix::Zero(spec.filters, in.channels * spec.kernel_size);
        b_ = Eigen::VectorXd::Zero(spec.filters);
        gw_ = w_;
        gb_ = b_;
    }

    LayerSpec spec() const override { return spec_; }

    Batch forward(const Batch& x, bool, Rng*) override {
        input_ = x;
        Batch y(x.rows(), out_.features());
        RowMatrix col;
        for (Eigen::Index n = 0; n < x.rows(); ++n) {
            im2col(x.row(n).data(), col);
            RowMap out(y.row(n).data(), out_.channels, out_.length);
            out.noalias() = w_ * col.transpose();
            out.colwise() += b_;
        }
        return y;
    }

    Batch backward(const Batch& grad_out) override {
        Batch grad_in = Batch::Zero(grad_out.rows(), in_.features());
        RowMatrix col;
        RowMatrix dcol;
        for (Eigen::Index n = 0; n < grad_out.rows(); ++n) {
            im2col(input_.row(n).data(), col);
            ConstRowMap dout(grad_out.row(n).data(), out_.channels, out_.length);
            gw_.noalias() += dout * col;
            gb_ += dout.rowwise().sum();
            dcol.noalias() = dout.transpose() * w_;
            col2im(dcol, grad_in.row(n).data());
        }
        return grad_in;
    }

    std::vector<std::span<double>> parameters() override {
        return {{w_.data(), static_cast<std::size_t>(w_.size())}, {b_.data(), static_cast<std::size_t>(b_.size())}};
    }
    std::vector<std::span<const double>> gradients() const override {
        return {{gw_.data(), static_cast<std::size_t>(gw_.size())},
                {gb_.data(), static_cast<std::size_t>(gb_.size())}};
    }
    void zero_gradients() override {
        gw_.setZero();
        gb_.setZero();
    }
    void initialize(Rng& rng) override {
        const double bound = std::sqrt(1.0 / (in_.channels * spec_.kernel_size));
        for (auto block : parameters()) fill_uniform(block, bound, rng);
    }

private:
    // col(t, c * K + k) = in(c, t * stride + k)
    void im2col(const double* in, RowMatrix& col) const {
        const int K = spec_.kernel_size;
        col.resize(out_.length, in_.channels * K);
        for (int t = 0; t < out_.length; ++t) {
            for (int c = 0; c < in_.channels; ++c) {
                const double* src = in + c * in_.length + t * spec_.stride;
                for (int k = 0; k < K; ++k) col(t, c * K + k) = src[k];
            }
        }
    }

    void col2im(const RowMatrix& dcol, double* grad_in) const {
        const int K = spec_.kernel_size;
        for (int t = 0; t < out_.length; ++t) {
            for (int c = 0; c < in_.channels; ++c) {
                double* dst = grad_in + c * in_.length + t * spec_.stride;
                for (int k = 0; k < K; ++k) dst[k] += dcol(t, c * K + k);
            }
        }
    }

    LayerSpec spec_;
    RowMatrix w_, gw_;
    Eigen::VectorXd b_, gb_;
    Batch input_;
};

// Weight layout: in_channels x (filters * kernel), entry (c, f * K + k).
class ConvTranspose1D final : public Layer {
public:
    ConvTranspose1D(const LayerSpec& spec, const Shape& in) : spec_(spec) {
        in_ = in;
        out_ = {spec.filters, conv_transpose1d_output_length(in.length, spec.kernel_size, spec.stride)};
        w_ = RowMatrix::Zero(in.channels, spec.filters * spec.kernel_size);
        b_ = Eigen::VectorXd::Zero(spec.filters);
        gw_ = w_;
        gb_ = b_;
    }

    LayerSpec spec() const override { return spec_; }

    Batch forward(const Batch& x, bool, Rng*) override {
        input_ = x;
        Batch y(x.rows(), out_.features());
        RowMatrix contrib;
        const int K = spec_.kernel_size;
        for (Eigen::Index n = 0; n < x.rows(); ++n) {
            ConstRowMap in(x.row(n).data(), in_.channels, in_.length);
            contrib.noalias() = in.transpose() * w_; // L_in x (F * K)
            RowMap out(y.row(n).data(), out_.channels, out_.length);
            out.colwise() = b_;
            for (int t = 0; t < in_.length; ++t) {
                for (int f = 0; f < out_.channels; ++f) {
                    double* dst = &out(f, t * spec_.stride);
                    const double* src = &contrib(t, f * K);
                    for (int k = 0; k < K; ++k) dst[k] += src[k];
                }
            }
        }
        return y;
    }

    Batch backward(const Batch& grad_out) override {
        Batch grad_in(grad_out.rows(), in_.features());
        RowMatrix dcontrib(in_.length, out_.channels * spec_.kernel_size);
        const int K = spec_.kernel_size;
        for (Eigen::Index n = 0; n < grad_out.rows(); ++n) {
            ConstRowMap dout(grad_out.row(n).data(), out_.channels, out_.length);
            for (int t = 0; t < in_.length; ++t) {
                for (int f = 0; f < out_.channels; ++f) {
                    const double* src = dout.data() + f * out_.length + t * spec_.stride;
                    double* dst = &dcontrib(t, f * K);
                    for (int k = 0; k < K; ++k) dst[k] = src[k];
                }
            }
            ConstRowMap in(input_.row(n).data(), in_.channels, in_.length);
            gw_.noalias() += in * dcontrib;
            gb_ += dout.rowwise().sum();
            RowMap din(grad_in.row(n).data(), in_.channels, in_.length);
            din.noalias() = w_ * dcontrib.transpose();
        }
        return grad_in;
    }

    std::vector<std::span<double>> parameters() override {
        return {{w_.data(), static_cast<std::size_t>(w_.size())}, {b_.data(), static_cast<std::size_t>(b_.size())}};
    }
    std::vector<std::span<const double>> gradients() const override {
        return {{gw_.data(), static_cast<std::size_t>(gw_.size())},
                {gb_.data(), static_cast<std::size_t>(gb_.size())}};
    }
    void zero_gradients() override {
        gw_.setZero();
        gb_.setZero();
    }
    void initialize(Rng& rng) override {
        const double bound = std::sqrt(1.0 / (in_.channels * spec_.kernel_size));
        for (auto block : parameters()) fill_uniform(block, bound, rng);
    }

private:
    LayerSpec spec_;
    RowMatrix w_, gw_;
    Eigen::VectorXd b_, gb_;
    Batch input_;
};

class Relu final : public Layer {
public:
    explicit Relu(const Shape& in) {
        in_ = in;
        out_ = in;
    }
    LayerSpec spec() const override { return LayerSpec::relu(); }
    Batch forward(const Batch& x, bool, Rng*) override {
        gate_ = (x.array() > 0.0).cast<double>();
        return x.cwiseMax(0.0);
    }
    Batch backward(const Batch& grad_out) override { return grad_out.cwiseProduct(gate_); }

private:
    Batch gate_;
};

class Dropout final : public Layer {
public:
    Dropout(const LayerSpec& spec, const Shape& in) : rate_(spec.rate) {
        in_ = in;
        out_ = in;
    }
    LayerSpec spec() const override { return LayerSpec::dropout(rate_); }
    Batch forward(const Batch& x, bool train, Rng* rng) override {
        active_ = train && rate_ > 0.0;
        if (!active_) return x;
        if (rng == nullptr) throw ValidationError("dropout in training mode needs a generator");
        mask_.resize(x.rows(), x.cols());
        const double keep_scale = 1.0 / (1.0 - rate_);
        for (Eigen::Index i = 0; i < mask_.size(); ++i) mask_.data()[i] = rng->uniform() < rate_ ? 0.0 : keep_scale;
        return x.cwiseProduct(mask_);
    }
    Batch backward(const Batch& grad_out) override { return active_ ? Batch(grad_out.cwiseProduct(mask_)) : grad_out; }

private:
    double rate_;
    bool active_ = false;
    Batch mask_;
};

class Reshape final : public Layer {
public:
    Reshape(const LayerSpec& spec, const Shape& in) {
        in_ = in;
        out_ = spec.reshape_to;
    }
    LayerSpec spec() const override { return LayerSpec::reshape(out_); }
    Batch forward(const Batch& x, bool, Rng*) override { return x; }
    Batch backward(const Batch& grad_out) override { return grad_out; }
};

} // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input) {
    spec.validate();
    switch (spec.kind) {
    case LayerKind::Dense: return std::make_unique<Dense>(spec, input);
    case LayerKind::Conv1D:
        if (conv1d_output_length(input.length, spec.kernel_size, spec.stride) < 1) {
            throw ValidationError("conv1d: input length " + std::to_string(input.length) +
                                  " is shorter than kernel " + std::to_string(spec.kernel_size));
        }
        return std::make_unique<Conv1D>(spec, input);
    case LayerKind::ConvTranspose1D: return std::make_unique<ConvTranspose1D>(spec, input);
    case LayerKind::Activation: return std::make_unique<Relu>(input);
    case LayerKind::Dropout: return std::make_unique<Dropout>(spec, input);
    case LayerKind::Reshape:
        if (spec.reshape_to.features() != input.features()) {
            throw ValidationError("reshape: " + std::to_string(input.features()) + " features cannot become " +
                                  std::to_string(spec.reshape_to.channels) + "x" +
                                  std::to_string(spec.reshape_to.length));
        }
        return std::make_unique<Reshape>(spec, input);
    }
    throw ValidationError("unhandled layer kind");
}

} // namespace p2w::nn

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "p2w/common/json_io.hpp"
#include "p2w/common/rng.hpp"

namespace p2w::nn {

/// Batches are row-major: one sample per row, features laid out channel-major (c * length + t).
using Batch = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape {
    int channels = 1;
    int length = 1;
    int features() const { return channels * length; }
    bool operator==(const Shape&) const = default;
};

enum class LayerKind { Dense, Conv1D, ConvTranspose1D, Activation, Dropout, Reshape };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& s);

/// Declarative description of one network layer. Activation layers are ReLU.
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    int filters = 0;
    int kernel_size = 1;
    int stride = 1;
    int out_features = 0;
    double rate = 0.0;
    Shape reshape_to{};

    static LayerSpec dense(int out_features) { return {LayerKind::Dense, 0, 1, 1, out_features, 0.0, {}}; }
    static LayerSpec conv1d(int filters, int kernel, int stride = 1) {
        return {LayerKind::Conv1D, filters, kernel, stride, 0, 0.0, {}};
    }
    static LayerSpec conv_transpose1d(int filters, int kernel, int stride = 1) {
        return {LayerKind::ConvTranspose1D, filters, kernel, stride, 0, 0.0, {}};
    }
    static LayerSpec relu() { return {LayerKind::Activation, 0, 1, 1, 0, 0.0, {}}; }
    static LayerSpec dropout(double rate) { return {LayerKind::Dropout, 0, 1, 1, 0, rate, {}}; }
    static LayerSpec reshape(Shape to) { return {LayerKind::Reshape, 0, 1, 1, 0, 0.0, to}; }

    void validate() const;
};

Json to_json(const LayerSpec& s);
LayerSpec layer_spec_from_json(const Json& j);

/// Valid (unpadded) convolution output lengths.
int conv1d_output_length(int length, int kernel, int stride);
int conv_transpose1d_output_length(int length, int kernel, int stride);

/// A layer with hand-written backward pass. forward() caches what backward() needs;
/// backward() accumulates parameter gradients and returns the input gradient.
class Layer {
public:
    virtual ~Layer() = default;

    virtual LayerSpec spec() const = 0;
    const Shape& input_shape() const { return in_; }
    const Shape& output_shape() const { return out_; }

    virtual Batch forward(const Batch& x, bool train, Rng* rng) = 0;
    virtual Batch backward(const Batch& grad_out) = 0;

    virtual std::vector<std::span<double>> parameters() { return {}; }
    virtual std::vector<std::span<const double>> gradients() const { return {}; }
    virtual void zero_gradients() {}
    virtual void initialize(Rng&) {}

protected:
    Shape in_;
    Shape out_;
};

/// Builds a layer for `spec` fed with `input`; throws ValidationError when the shapes do not work out.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input);

} // namespace p2w::nn

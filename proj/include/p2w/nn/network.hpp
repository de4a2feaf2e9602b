#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "p2w/nn/layers.hpp"

namespace p2w::nn {

/// Sequential stack of layers with shape algebra checked at construction.
class Network {
public:
    Network() = default;
    /// Throws ValidationError naming the offending layer index when shapes do not compose.
    Network(Shape input, const std::vector<LayerSpec>& specs);

    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;
    Network(const Network& other);
    Network& operator=(const Network& other);

    const Shape& input_shape() const { return input_; }
    Shape output_shape() const;
    std::size_t layer_count() const { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return *layers_.at(i); }
    std::vector<LayerSpec> specs() const;

    void initialize(Rng& rng);

    Batch forward(const Batch& x, bool train, Rng* rng = nullptr);
    /// Back-propagates dLoss/doutput through the cached forward pass; returns dLoss/dinput.
    Batch backward(const Batch& grad_out);

    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> gradients() const;
    void zero_gradients();
    std::size_t parameter_count();

    std::vector<double> flat_parameters();
    void set_flat_parameters(std::span<const double> values);

private:
    Shape input_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

} // namespace p2w::nn

#pragma once

#include <string>
#include <vector>

#include "p2w/common/json_io.hpp"

namespace p2w::nn {

enum class HiddenActivation { ReLU };
enum class OutputActivation { Sigmoid, Softmax };

/// Layer widths and activations of an MLP. The output activation is
/// implied by the output width: one unit is a sigmoid, more is a softmax.
struct Topology {
    std::vector<int> layer_sizes;
    HiddenActivation hidden_activation = HiddenActivation::ReLU;
    double dropout_rate = 0.0;

    int input_width() const { return layer_sizes.front(); }
    int output_width() const { return layer_sizes.back(); }
    int layer_count() const { return static_cast<int>(layer_sizes.size()) - 1; }
    OutputActivation output_activation() const {
        return output_width() == 1 ? OutputActivation::Sigmoid : OutputActivation::Softmax;
    }
    /// Number of classes the model discriminates (2 for a sigmoid output).
    int class_count() const { return output_width() == 1 ? 2 : output_width(); }

    /// Throws ValidationError when an invariant is broken.
    void validate() const;
    std::string digest() const;

    bool operator==(const Topology&) const = default;
};

/// Desk-scale classifier shape [d, 16, 8, 8, 8, out].
Topology desk_topology(int input_width, int class_count, double dropout_rate);

Json to_json(const Topology& t);
Topology topology_from_json(const Json& j);

} // namespace p2w::nn

#include "p2w/nn/network.hpp"

#include "p2w/common/error.hpp"

namespace p2w::nn {

Network::Network(Shape input, const std::vector<LayerSpec>& specs) : input_(input) {
    Shape shape = input;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        try {
            layers_.push_back(make_layer(specs[i], shape));
        } catch (const ValidationError& e) {
            throw ValidationError("layer " + std::to_string(i) + " (" + to_string(specs[i].kind) + "): " + e.what());
        }
        shape = layers_.back()->output_shape();
    }
}

Network::Network(const Network& other) : Network(other.input_, other.specs()) {
    auto& self = const_cast<Network&>(other);
    set_flat_parameters(self.flat_parameters());
}

Network& Network::operator=(const Network& other) {
    if (this != &other) {
        Network copy(other);
        *this = std::move(copy);
    }
    return *this;
}

Shape Network::output_shape() const { return layers_.empty() ? input_ : layers_.back()->output_shape(); }

std::vector<LayerSpec> Network::specs() const {
    std::vector<LayerSpec> out;
    for (const auto& l : layers_) out.push_back(l->spec());
    return out;
}

void Network::initialize(Rng& rng) {
    for (auto& l : layers_) l->initialize(rng);
}

Batch Network::forward(const Batch& x, bool train, Rng* rng) {
    if (x.cols() != input_.features()) {
        throw ShapeError("network input has " + std::to_string(x.cols()) + " features, expected " +
                         std::to_string(input_.features()));
    }
    Batch h = x;
    for (auto& l : layers_) h = l->forward(h, train, rng);
    return h;
}

Batch Network::backward(const Batch& grad_out) {
    Batch g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<std::span<double>> Network::parameters() {
    std::vector<std::span<double>> out;
    for (auto& l : layers_) {
        for (auto p : l->parameters()) out.push_back(p);
    }
    return out;
}

std::vector<std::span<const double>> Network::gradients() const {
    std::vector<std::span<const double>> out;
    for (const auto& l : layers_) {
        for (auto g : l->gradients()) out.push_back(g);
    }
    return out;
}

void Network::zero_gradients() {
    for (auto& l : layers_) l->zero_gradients();
}

std::size_t Network::parameter_count() {
    std::size_t n = 0;
    for (auto p : parameters()) n += p.size();
    return n;
}

std::vector<double> Network::flat_parameters() {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (auto p : parameters()) out.insert(out.end(), p.begin(), p.end());
    return out;
}

void Network::set_flat_parameters(std::span<const double> values) {
    if (values.size() != parameter_count()) {
        throw ShapeError("parameter vector has " + std::to_string(values.size()) + " entries, network needs " +
                         std::to_string(parameter_count()));
    }
    std::size_t offset = 0;
    for (auto p : parameters()) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), p.size(), p.begin());
        offset += p.size();
    }
}

} // namespace p2w::nn

#include "p2w/nn/topology.hpp"

#include "p2w/common/digest.hpp"
#include "p2w/common/error.hpp"

namespace p2w::nn {

void Topology::validate() const {
    if (layer_sizes.size() < 2) {
        throw ValidationError("topology needs at least an input and an output layer");
    }
    for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
        if (layer_sizes[i] < 1) {
            throw ValidationError("topology layer " + std::to_string(i) + " has non-positive width " +
                                  std::to_string(layer_sizes[i]));
        }
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ValidationError("dropout rate must lie in [0, 1)");
    }
}

std::string Topology::digest() const {
    Digest d;
    d.text("mlp").ints(layer_sizes).u64(static_cast<std::uint64_t>(hidden_activation));
    return d.hex();
}

Topology desk_topology(int input_width, int class_count, double dropout_rate) {
    Topology t;
    t.layer_sizes = {input_width, 16, 8, 8, 8, class_count == 2 ? 1 : class_count};
    t.dropout_rate = dropout_rate;
    t.validate();
    return t;
}

Json to_json(const Topology& t) {
    return Json{{"layer_sizes", t.layer_sizes}, {"hidden_activation", "relu"}, {"dropout_rate", t.dropout_rate}};
}

Topology topology_from_json(const Json& j) {
    Topology t;
    t.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    if (j.contains("hidden_activation") && j.at("hidden_activation") != "relu") {
        throw ValidationError("unsupported hidden activation " + j.at("hidden_activation").dump());
    }
    t.dropout_rate = j.value("dropout_rate", 0.0);
    t.validate();
    return t;
}

} // namespace p2w::nn

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p2w/data/dataset.hpp"

namespace p2w::data {

/// Gaussian-mixture classification task. `rng_seed` fixes the task itself (cluster
/// centres); individual draws take their own seed.
struct SyntheticTaskSpec {
    std::string name = "synthetic";
    int d = 2;
    int C = 2;
    double cluster_separation = 1.0;
    int clusters_per_class = 1;
    double noise_sigma = 0.1;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

Json to_json(const SyntheticTaskSpec& s);
SyntheticTaskSpec synthetic_spec_from_json(const Json& j);

/// Cluster centres: 0.5 + separation * z / sqrt(d), z standard normal, indexed [class][cluster].
std::vector<std::vector<Eigen::VectorXd>> cluster_centres(const SyntheticTaskSpec& spec);

/// n samples with labels i mod C shuffled (so every class is present when n >= C),
/// each drawn around a uniformly chosen centre of its class.
LabeledDataset gen_synthetic(const SyntheticTaskSpec& spec, int n, std::uint64_t draw_seed);
inline LabeledDataset gen_synthetic(const SyntheticTaskSpec& spec, int n) {
    return gen_synthetic(spec, n, spec.rng_seed);
}

/// Stand-ins for the small-data tasks: feature and class counts plus the D_small size.
struct TaskPreset {
    SyntheticTaskSpec spec;
    int dsmall_size = 0;
};

TaskPreset task_preset(const std::string& name);
std::vector<std::string> task_preset_names();

} // namespace p2w::data

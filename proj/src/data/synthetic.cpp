#include "p2w/data/synthetic.hpp"

#include <cmath>

#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"

namespace p2w::data {

void SyntheticTaskSpec::validate() const {
    if (d < 2) throw ValidationError("synthetic task needs d >= 2");
    if (C < 2) throw ValidationError("synthetic task needs C >= 2");
    if (!(cluster_separation > 0.0)) throw ValidationError("cluster_separation must be positive");
    if (clusters_per_class < 1) throw ValidationError("clusters_per_class must be >= 1");
    if (!(noise_sigma > 0.0)) throw ValidationError("noise_sigma must be positive");
}

Json to_json(const SyntheticTaskSpec& s) {
    return Json{{"name", s.name},
                {"d", s.d},
                {"C", s.C},
                {"cluster_separation", s.cluster_separation},
                {"clusters_per_class", s.clusters_per_class},
                {"noise_sigma", s.noise_sigma},
                {"rng_seed", s.rng_seed}};
}

SyntheticTaskSpec synthetic_spec_from_json(const Json& j) {
    SyntheticTaskSpec s;
    s.name = j.value("name", s.name);
    s.d = j.at("d").get<int>();
    s.C = j.at("C").get<int>();
    s.cluster_separation = j.value("cluster_separation", s.cluster_separation);
    s.clusters_per_class = j.value("clusters_per_class", s.clusters_per_class);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.rng_seed = j.value("rng_seed", s.rng_seed);
    s.validate();
    return s;
}

std::vector<std::vector<Eigen::VectorXd>> cluster_centres(const SyntheticTaskSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.rng_seed, 0xce47));
    const double scale = spec.cluster_separation / std::sqrt(static_cast<double>(spec.d));
    std::vector<std::vector<Eigen::VectorXd>> centres(static_cast<std::size_t>(spec.C));
    for (int c = 0; c < spec.C; ++c) {
        for (int m = 0; m < spec.clusters_per_class; ++m) {
            Eigen::VectorXd v(spec.d);
            for (int i = 0; i < spec.d; ++i) v(i) = 0.5 + scale * rng.normal();
            centres[c].push_back(std::move(v));
        }
    }
    return centres;
}

LabeledDataset gen_synthetic(const SyntheticTaskSpec& spec, int n, std::uint64_t draw_seed) {
    if (n < spec.C) {
        throw ValidationError("synthetic draw of " + std::to_string(n) + " samples cannot cover " +
                              std::to_string(spec.C) + " classes");
    }
    const auto centres = cluster_centres(spec);
    Rng rng(draw_seed);
    LabeledDataset ds;
    ds.name = spec.name;
    ds.class_count = spec.C;
    ds.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ds.labels[i] = i % spec.C;
    rng.shuffle(std::span<int>(ds.labels));
    ds.samples.resize(n, spec.d);
    for (int i = 0; i < n; ++i) {
        const auto& centre = centres[ds.labels[i]][rng.below(static_cast<std::uint64_t>(spec.clusters_per_class))];
        for (int j = 0; j < spec.d; ++j) ds.samples(i, j) = centre(j) + spec.noise_sigma * rng.normal();
    }
    return ds;
}

TaskPreset task_preset(const std::string& name) {
    TaskPreset p;
    p.spec.name = name;
    if (name == "eeg") {
        p.spec.d = 19;
        p.spec.C = 2;
        p.spec.rng_seed = 0xee9;
        p.spec.clusters_per_class = 24;
        p.spec.cluster_separation = 1.0;
        p.spec.noise_sigma = 0.1;
        p.dsmall_size = 22;
    } else if (name == "diabetes") {
        p.spec.d = 9;
        p.spec.C = 2;
        p.spec.rng_seed = 0xd1ab;
        p.spec.clusters_per_class = 40;
        p.spec.cluster_separation = 1.2;
        p.spec.noise_sigma = 0.08;
        p.dsmall_size = 45;
    } else if (name == "sleep") {
        p.spec.d = 13;
        p.spec.C = 3;
        p.spec.rng_seed = 0x51ee9;
        p.spec.clusters_per_class = 12;
        p.spec.cluster_separation = 1.0;
        p.spec.noise_sigma = 0.1;
        p.dsmall_size = 150;
    } else {
        throw ValidationError("unknown task preset '" + name + "' (expected eeg, diabetes or sleep)");
    }
    return p;
}

std::vector<std::string> task_preset_names() { return {"eeg", "diabetes", "sleep"}; }

} // namespace p2w::data

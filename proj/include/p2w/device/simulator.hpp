#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "p2w/common/json_io.hpp"
#include "p2w/nn/mlp.hpp"

namespace p2w::device {

/// Simulated SoC power model. A MAC combining coefficient c with operand v produces
/// `samples_per_mac` samples of
///     static_power + dynamic_scale * (HW(fix(c)) + HW(fix(v))) + N(0, noise_sigma)
/// which are then digitised by a `adc_bits` ADC spanning `adc_lo..adc_hi`.
/// `samples_per_mac` is the sampling-rate knob: one or more samples per operation.
struct DeviceConfig {
    int samples_per_mac = 1;
    double static_power = 4.0;
    double dynamic_scale = 1.0;
    double noise_sigma = 0.8;
    int adc_bits = 12;
    double adc_lo = 0.0;
    double adc_hi = 40.0;
    int fixed_point_bits = 16;
    int fraction_bits = 4;
    std::uint64_t rng_seed = 0;

    void validate() const;
    std::string digest() const;
};

Json to_json(const DeviceConfig& c);
DeviceConfig device_config_from_json(const Json& j);

/// The one input sample every simulated inference runs on, in Phase 1 and Phase 2.
struct FixedInput {
    Eigen::VectorXd values;
    std::uint64_t seed = 0;

    std::string digest() const;
};

/// Uniform in [0, 1) per feature, matching min-max-scaled classifier inputs.
FixedInput draw_fixed_input(int width, std::uint64_t seed);
Json to_json(const FixedInput& in);
FixedInput fixed_input_from_json(const Json& j);

struct TraceMeta {
    std::string device_digest;
    std::string topology_digest;
    std::string input_digest;
    std::uint64_t rng_seed = 0;
};

struct PowerTrace {
    std::vector<float> samples;
    TraceMeta meta;

    std::size_t sample_count() const { return samples.size(); }
};

/// Weight MACs plus one bias MAC per neuron.
long total_macs(const nn::Topology& topology);

/// Runs inference on `input` and emits one quantized power trace. MACs execute layer by
/// layer, neuron by neuron, weights in fan-in order followed by the bias. Weight operands
/// are the previous layer's post-activation values; the bias MAC has no operand word.
PowerTrace simulate_trace(const nn::MlpModel& model, const FixedInput& input, const DeviceConfig& cfg);

/// Per-pair seed derivation used when many traces share one device config.
inline std::uint64_t pair_seed(std::uint64_t base_seed, std::uint64_t pair_index) { return base_seed ^ pair_index; }

} // namespace p2w::device

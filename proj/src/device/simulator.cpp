#include "p2w/device/simulator.hpp"

#include <cmath>

#include "p2w/common/digest.hpp"
#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"
#include "p2w/device/leakage.hpp"

namespace p2w::device {

void DeviceConfig::validate() const {
    if (samples_per_mac < 1) throw ValidationError("samples_per_mac must be >= 1");
    if (!(dynamic_scale > 0.0)) throw ValidationError("dynamic_scale must be positive");
    if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be nonnegative");
    if (adc_bits < 1 || adc_bits > 16) throw ValidationError("adc_bits must lie in [1, 16]");
    if (!(adc_lo < adc_hi)) throw ValidationError("adc range must satisfy lo < hi");
    if (fixed_point_bits < 2 || fixed_point_bits > 32) throw ValidationError("fixed_point_bits must lie in [2, 32]");
    if (fraction_bits < 0 || fraction_bits >= fixed_point_bits) {
        throw ValidationError("fraction_bits must lie in [0, fixed_point_bits)");
    }
}

std::string DeviceConfig::digest() const { return json_digest(to_json(*this)); }

Json to_json(const DeviceConfig& c) {
    return Json{{"samples_per_mac", c.samples_per_mac}, {"static_power", c.static_power},
                {"dynamic_scale", c.dynamic_scale},     {"noise_sigma", c.noise_sigma},
                {"adc_bits", c.adc_bits},               {"adc_range", {c.adc_lo, c.adc_hi}},
                {"fixed_point_bits", c.fixed_point_bits}, {"fraction_bits", c.fraction_bits},
                {"rng_seed", c.rng_seed}};
}

DeviceConfig device_config_from_json(const Json& j) {
    DeviceConfig c;
    c.samples_per_mac = j.value("samples_per_mac", c.samples_per_mac);
    c.static_power = j.value("static_power", c.static_power);
    c.dynamic_scale = j.value("dynamic_scale", c.dynamic_scale);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.adc_bits = j.value("adc_bits", c.adc_bits);
    if (j.contains("adc_range")) {
        const auto r = j.at("adc_range").get<std::vector<double>>();
        if (r.size() != 2) throw ValidationError("adc_range must be [lo, hi]");
        c.adc_lo = r[0];
        c.adc_hi = r[1];
    }
    c.fixed_point_bits = j.value("fixed_point_bits", c.fixed_point_bits);
    c.fraction_bits = j.value("fraction_bits", c.fraction_bits);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.validate();
    return c;
}

std::string FixedInput::digest() const {
    return Digest{}.text("fixed-input").reals({values.data(), static_cast<std::size_t>(values.size())}).hex();
}

FixedInput draw_fixed_input(int width, std::uint64_t seed) {
    Rng rng(seed);
    FixedInput in;
    in.seed = seed;
    in.values.resize(width);
    for (int i = 0; i < width; ++i) in.values(i) = rng.uniform();
    return in;
}

Json to_json(const FixedInput& in) {
    return Json{{"seed", in.seed},
                {"values", std::vector<double>(in.values.data(), in.values.data() + in.values.size())},
                {"digest", in.digest()}};
}

FixedInput fixed_input_from_json(const Json& j) {
    FixedInput in;
    in.seed = j.at("seed").get<std::uint64_t>();
    const auto v = j.at("values").get<std::vector<double>>();
    in.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    return in;
}

long total_macs(const nn::Topology& topology) {
    long macs = 0;
    for (int l = 0; l < topology.layer_count(); ++l) {
        macs += static_cast<long>(topology.layer_sizes[l]) * topology.layer_sizes[l + 1] + topology.layer_sizes[l + 1];
    }
    return macs;
}

PowerTrace simulate_trace(const nn::MlpModel& model, const FixedInput& input, const DeviceConfig& cfg) {
    cfg.validate();
    model.validate(); // rejects non-finite coefficients before anything runs
    if (input.values.size() != model.topology.input_width()) {
        throw ShapeError("fixed input has " + std::to_string(input.values.size()) + " features, topology expects " +
                         std::to_string(model.topology.input_width()));
    }

    Rng noise(cfg.rng_seed);
    const int B = cfg.fixed_point_bits;
    const int F = cfg.fraction_bits;

    std::vector<double> raw;
    raw.reserve(static_cast<std::size_t>(total_macs(model.topology) * cfg.samples_per_mac));
    auto emit = [&](int hw_sum) {
        const double level = cfg.static_power + cfg.dynamic_scale * hw_sum;
        for (int s = 0; s < cfg.samples_per_mac; ++s) {
            raw.push_back(cfg.noise_sigma > 0.0 ? level + cfg.noise_sigma * noise.normal() : level);
        }
    };

    Eigen::VectorXd operands = input.values;
    const int layers = model.topology.layer_count();
    for (int l = 0; l < layers; ++l) {
        const auto& w = model.weights[l];
        const auto& b = model.biases[l];
        std::vector<int> operand_hw(static_cast<std::size_t>(operands.size()));
        for (Eigen::Index k = 0; k < operands.size(); ++k) operand_hw[k] = leakage_weight(operands(k), B, F);

        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index k = 0; k < w.rows(); ++k) emit(leakage_weight(w(k, j), B, F) + operand_hw[k]);
            emit(leakage_weight(b(j), B, F)); // accumulate-only: no operand word
        }
        Eigen::VectorXd z = w.transpose() * operands + b;
        operands = (l + 1 < layers) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
    }

    PowerTrace trace;
    trace.samples.reserve(raw.size());
    for (double v : raw) trace.samples.push_back(static_cast<float>(quantize_sample(v, cfg.adc_bits, cfg.adc_lo, cfg.adc_hi)));
    trace.meta = {cfg.digest(), model.topology.digest(), input.digest(), cfg.rng_seed};
    return trace;
}

} // namespace p2w::device

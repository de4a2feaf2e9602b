#include <doctest.h>

#include <filesystem>

#include "p2w/common/error.hpp"
#include "p2w/device/leakage.hpp"
#include "p2w/device/simulator.hpp"
#include "p2w/device/trace_store.hpp"
#include "support/oracles.hpp"

using namespace p2w;
using namespace p2w::device;

namespace {

nn::Topology topo(std::vector<int> sizes) {
    nn::Topology t;
    t.layer_sizes = std::move(sizes);
    return t;
}

} // namespace

TEST_SUITE("device") {

TEST_CASE("total_macs") {
    CHECK(total_macs(topo({2, 1})) == 3);
    CHECK(total_macs(topo({2, 3, 3, 1})) == 25);
}

TEST_CASE("trace-length law over random topologies") {
    const auto t = oracle::trace_length_check(200, 0x71);
    CHECK(t.instances == 200);
    CHECK(t.ok());
}

TEST_CASE("zero model on zero input gives a flat trace") {
    const auto m = nn::MlpModel::zeros(topo({3, 4, 1}));
    FixedInput in;
    in.values = Eigen::VectorXd::Zero(3);
    DeviceConfig cfg;
    cfg.noise_sigma = 0.0;
    const auto tr = simulate_trace(m, in, cfg);
    const auto level = static_cast<float>(quantize_sample(cfg.static_power, cfg.adc_bits, cfg.adc_lo, cfg.adc_hi));
    for (float s : tr.samples) CHECK(s == level);
}

TEST_CASE("fixed-point code 0x0003 has weight 2") {
    // 3 / 2^fraction_bits encodes to 0x0003
    CHECK(to_fixed_point(3.0 / 16.0, 16, 4) == 0x0003u);
    CHECK(leakage_weight(3.0 / 16.0, 16, 4) == 2);
    CHECK(to_fixed_point(-1.0 / 16.0, 16, 4) == 0xffffu);
    CHECK(to_fixed_point(1e9, 16, 4) == 0x7fffu);

    // one-weight model [1,1]: slot 0 = static + scale * (2 + HW(fix(v)))
    auto m = nn::MlpModel::zeros(topo({1, 1}));
    m.weights[0](0, 0) = 3.0 / 16.0;
    FixedInput in;
    in.values = Eigen::VectorXd::Constant(1, 0.5); // 8 -> 0x0008, one bit
    DeviceConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.adc_bits = 16;
    cfg.adc_lo = 0.0;
    cfg.adc_hi = 65535.0 / 1024.0; // step 1/1024 so integer levels are exact
    const auto tr = simulate_trace(m, in, cfg);
    CHECK(tr.samples[0] == doctest::Approx(cfg.static_power + cfg.dynamic_scale * (2 + 1)));
    CHECK(tr.samples[1] == doctest::Approx(cfg.static_power)); // bias 0, no operand
}

TEST_CASE("quantizer") {
    CHECK(quantize_sample(0.0, 12, 0.0, 40.0) == 0.0);
    CHECK(quantize_sample(99.0, 12, 0.0, 40.0) == 40.0);
    CHECK(quantize_sample(1.2, 2, 0.0, 3.0) == 1.0);
    const std::vector<double> raw = {-5, 0.4, 2.6, 7};
    CHECK(quantize_trace(raw, 2, 0.0, 3.0) == std::vector<double>{0, 0, 3, 3});
}

TEST_CASE("noise-free traces match the per-slot oracle and stay local") {
    const auto t = oracle::locality_check(300, 0x10c);
    CAPTURE(t.slots.passed);
    CHECK(t.slots.ok());
    CHECK(t.output_layer_cases > 0);
    CHECK(t.output_layer_local == t.output_layer_cases);
}

TEST_CASE("larger coefficient weight gives a larger sample") {
    auto m = nn::MlpModel::zeros(topo({1, 1}));
    FixedInput in;
    in.values = Eigen::VectorXd::Constant(1, 0.25);
    DeviceConfig cfg;
    cfg.noise_sigma = 0.0;
    float prev = -1.0f;
    for (double c : {1.0 / 16, 3.0 / 16, 7.0 / 16, 15.0 / 16}) { // HW 1, 2, 3, 4
        m.weights[0](0, 0) = c;
        const float s = simulate_trace(m, in, cfg).samples[0];
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("determinism and seed sensitivity") {
    Rng rng(9);
    const auto m = oracle::random_model(topo({5, 6, 2}), rng, 0.5);
    const auto in = draw_fixed_input(5, 77);
    DeviceConfig cfg;
    cfg.rng_seed = 1234;
    const auto a = simulate_trace(m, in, cfg);
    const auto b = simulate_trace(m, in, cfg);
    CHECK(a.samples == b.samples);
    cfg.rng_seed = 1235;
    CHECK(simulate_trace(m, in, cfg).samples != a.samples);
    for (float s : a.samples) {
        CHECK(s >= cfg.adc_lo);
        CHECK(s <= cfg.adc_hi);
    }
    CHECK(pair_seed(8, 3) == (8u ^ 3u));
}

TEST_CASE("non-finite coefficient is rejected") {
    auto m = nn::MlpModel::zeros(topo({2, 1}));
    m.weights[0](1, 0) = std::nan("");
    CHECK_THROWS_AS(simulate_trace(m, draw_fixed_input(2, 1), DeviceConfig{}), ValidationError);
    CHECK_THROWS_AS(simulate_trace(nn::MlpModel::zeros(topo({2, 1})), draw_fixed_input(3, 1), DeviceConfig{}),
                    ShapeError);
}

TEST_CASE("config validation") {
    DeviceConfig c;
    c.adc_bits = 17;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.adc_lo = 5;
    c.adc_hi = 5;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.samples_per_mac = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    CHECK(device_config_from_json(to_json(c)).digest() == c.digest());
}

TEST_CASE("trace container round trip is bit-exact") {
    Rng rng(21);
    const auto m = oracle::random_model(topo({4, 5, 1}), rng);
    TraceSet set;
    set.meta = {{"note", "test"}};
    DeviceConfig cfg;
    for (int i = 0; i < 4; ++i) {
        cfg.rng_seed = i;
        const auto tr = simulate_trace(m, draw_fixed_input(4, 3), cfg);
        set.trace_length = tr.samples.size();
        set.append(tr.samples);
    }
    const auto dir = std::filesystem::temp_directory_path() / "p2w_trace_set_test";
    std::filesystem::remove_all(dir);
    write_trace_set(dir, set);
    const auto back = read_trace_set(dir);
    CHECK(back.trace_length == set.trace_length);
    CHECK(back.samples == set.samples);
    CHECK(back.meta.at("note") == "test");
    std::filesystem::remove_all(dir);
}

TEST_CASE("hamming decoder ceiling") {
    Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(1, 2);
    mask(0, 1) = 0.0;
    Eigen::MatrixXd m(4, 2);
    // 0.5 and 0.25 share HW 1 under 4 fraction bits; 0.75 has HW 2
    m << 0.5, 9, 0.25, 9, 0.75, 9, 0.5, 9;
    CHECK(oracle::hamming_decoder_ceiling(m, mask, 0.05, 16, 4) == 0.75);
    CHECK(oracle::hamming_decoder_ceiling(m, mask, 0.2, 16, 4) == 1.0);
}

}

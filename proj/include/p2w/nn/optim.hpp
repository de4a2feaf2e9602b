#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p2w/common/json_io.hpp"

namespace p2w::nn {

enum class Optimizer { Adam, SGD };

struct TrainConfig {
    int epochs = 100;
    int batch_size = 100;
    double learning_rate = 0.001;
    Optimizer optimizer = Optimizer::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);

/// First/second moment buffers, one per parameter block.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update at step t >= 1 using `learning_rate`.
/// Moment buffers are created (zeroed) on first use.
void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, const TrainConfig& config, double learning_rate, long t);

/// Stateful wrapper that tracks the step count and the (adjustable) learning rate.
class GradientOptimizer {
public:
    explicit GradientOptimizer(const TrainConfig& config)
        : config_(config), learning_rate_(config.learning_rate) {}

    void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads);

    double learning_rate() const { return learning_rate_; }
    void set_learning_rate(double lr) { learning_rate_ = lr; }
    long steps() const { return t_; }

private:
    TrainConfig config_;
    double learning_rate_;
    AdamState state_;
    long t_ = 0;
};

} // namespace p2w::nn

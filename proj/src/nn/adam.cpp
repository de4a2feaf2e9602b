#include <cmath>

#include "p2w/common/error.hpp"
#include "p2w/nn/optim.hpp"

namespace p2w::nn {

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("epochs must be positive");
    if (batch_size < 1) throw ValidationError("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0)) throw ValidationError("adam_beta1 must lie in (0, 1)");
    if (!(adam_beta2 > 0.0 && adam_beta2 < 1.0)) throw ValidationError("adam_beta2 must lie in (0, 1)");
    if (!(adam_eps > 0.0)) throw ValidationError("adam_eps must be positive");
}

Json to_json(const TrainConfig& c) {
    return Json{{"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"optimizer", c.optimizer == Optimizer::Adam ? "adam" : "sgd"},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps},
                {"rng_seed", c.rng_seed}};
}

TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    const std::string opt = j.value("optimizer", std::string("adam"));
    if (opt == "adam") {
        c.optimizer = Optimizer::Adam;
    } else if (opt == "sgd") {
        c.optimizer = Optimizer::SGD;
    } else {
        throw ValidationError("unknown optimizer '" + opt + "'");
    }
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.validate();
    return c;
}

void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, const TrainConfig& config, double learning_rate, long t) {
    if (t < 1) throw ValidationError("adam step index must be >= 1");
    if (params.size() != grads.size()) throw ShapeError("adam: parameter and gradient block counts differ");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p.size(), 0.0);
            state.v.emplace_back(p.size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw ShapeError("adam: state does not match the parameter blocks");

    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto p = params[b];
        auto g = grads[b];
        auto& m = state.m[b];
        auto& v = state.v[b];
        if (g.size() != p.size() || m.size() != p.size()) {
            throw ShapeError("adam: block " + std::to_string(b) + " has mismatched sizes");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
        }
    }
}

void GradientOptimizer::step(std::span<const std::span<double>> params,
                             std::span<const std::span<const double>> grads) {
    ++t_;
    if (config_.optimizer == Optimizer::Adam) {
        adam_step(params, grads, state_, config_, learning_rate_, t_);
        return;
    }
    if (params.size() != grads.size()) throw ShapeError("sgd: parameter and gradient block counts differ");
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size()) throw ShapeError("sgd: block sizes differ");
        for (std::size_t i = 0; i < params[b].size(); ++i) params[b][i] -= learning_rate_ * grads[b][i];
    }
}

} // namespace p2w::nn

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>

#include "p2w/codec/weights_matrix.hpp"
#include "p2w/device/leakage.hpp"
#include "p2w/prep/pca.hpp"

namespace p2w::oracle {

double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    double diff = 0.0, na = 0.0, nn_ = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
        na += analytic[i] * analytic[i];
        nn_ += numeric[i] * numeric[i];
    }
    const double denom = std::sqrt(na) + std::sqrt(nn_);
    return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

namespace {

int uniform_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

nn::LayerSpec random_layer(nn::LayerKind kind, Rng& rng, nn::Shape& in) {
    using nn::LayerSpec;
    switch (kind) {
    case nn::LayerKind::Dense:
        in = {uniform_int(rng, 1, 2), uniform_int(rng, 1, 4)};
        return LayerSpec::dense(uniform_int(rng, 1, 5));
    case nn::LayerKind::Conv1D: {
        const int k = uniform_int(rng, 1, 4);
        in = {uniform_int(rng, 1, 3), k + uniform_int(rng, 0, 8)};
        return LayerSpec::conv1d(uniform_int(rng, 1, 3), k, uniform_int(rng, 1, 3));
    }
    case nn::LayerKind::ConvTranspose1D:
        in = {uniform_int(rng, 1, 3), uniform_int(rng, 1, 6)};
        return LayerSpec::conv_transpose1d(uniform_int(rng, 1, 3), uniform_int(rng, 1, 4), uniform_int(rng, 1, 3));
    case nn::LayerKind::Activation:
        in = {uniform_int(rng, 1, 2), uniform_int(rng, 1, 8)};
        return LayerSpec::relu();
    case nn::LayerKind::Dropout:
        in = {uniform_int(rng, 1, 2), uniform_int(rng, 1, 8)};
        return LayerSpec::dropout(rng.uniform(0.1, 0.7));
    case nn::LayerKind::Reshape:
        in = {uniform_int(rng, 1, 3), uniform_int(rng, 1, 5)};
        return LayerSpec::reshape({in.length, in.channels});
    }
    return LayerSpec::relu();
}

} // namespace

CheckTally gradcheck_layer(nn::LayerKind kind, int instances, std::uint64_t seed, double tolerance) {
    CheckTally tally;
    Rng rng(seed);
    const double h = 1e-5;
    for (int n = 0; n < instances; ++n) {
        nn::Shape in;
        const auto spec = random_layer(kind, rng, in);
        auto layer = nn::make_layer(spec, in);
        layer->initialize(rng);
        for (auto block : layer->parameters()) {
            for (double& p : block) p += 0.3 * rng.normal();
        }

        const int batch = uniform_int(rng, 1, 3);
        nn::Batch x(batch, in.features());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double v = rng.normal();
            // keep ReLU inputs clear of the kink
            if (kind == nn::LayerKind::Activation && std::abs(v) < 0.05) v += v < 0 ? -0.05 : 0.05;
            x.data()[i] = v;
        }
        nn::Batch r(batch, layer->output_shape().features());
        for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.normal();

        const std::uint64_t mask_seed = rng.next_u64();
        auto objective = [&](const nn::Batch& input) {
            Rng mask_rng(mask_seed);
            return layer->forward(input, true, &mask_rng).cwiseProduct(r).sum();
        };

        layer->zero_gradients();
        Rng mask_rng(mask_seed);
        layer->forward(x, true, &mask_rng);
        const nn::Batch dx = layer->backward(r);

        std::vector<double> analytic, numeric;
        for (auto g : layer->gradients()) analytic.insert(analytic.end(), g.begin(), g.end());
        for (auto block : layer->parameters()) {
            for (double& p : block) {
                const double saved = p;
                p = saved + h;
                const double up = objective(x);
                p = saved - h;
                const double down = objective(x);
                p = saved;
                numeric.push_back((up - down) / (2 * h));
            }
        }
        nn::Batch xp = x;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            analytic.push_back(dx.data()[i]);
            const double saved = xp.data()[i];
            xp.data()[i] = saved + h;
            const double up = objective(xp);
            xp.data()[i] = saved - h;
            const double down = objective(xp);
            xp.data()[i] = saved;
            numeric.push_back((up - down) / (2 * h));
        }
        const double err = relative_error(analytic, numeric);
        ++tally.instances;
        tally.worst = std::max(tally.worst, err);
        if (err < tolerance) ++tally.passed;
    }
    return tally;
}

CheckTally gradcheck_mlp(int instances, std::uint64_t seed, double tolerance) {
    CheckTally tally;
    Rng rng(seed);
    const double h = 1e-6;
    for (int n = 0; n < instances; ++n) {
        nn::Topology t;
        t.layer_sizes.push_back(uniform_int(rng, 1, 4));
        const int hidden = uniform_int(rng, 0, 2);
        for (int i = 0; i < hidden; ++i) t.layer_sizes.push_back(uniform_int(rng, 1, 5));
        t.layer_sizes.push_back(uniform_int(rng, 1, 3));
        nn::MlpModel model = random_model(t, rng);

        const int batch = uniform_int(rng, 1, 4);
        const auto loss = rng.uniform() < 0.5 ? nn::Loss::MSE : nn::Loss::CrossEntropy;
        Eigen::MatrixXd x(batch, t.input_width());
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(batch, t.output_width());
        for (int i = 0; i < batch; ++i) {
            if (loss == nn::Loss::MSE) {
                for (int j = 0; j < t.output_width(); ++j) y(i, j) = rng.normal();
            } else if (t.output_width() == 1) {
                y(i, 0) = static_cast<double>(rng.below(2));
            } else {
                y(i, static_cast<Eigen::Index>(rng.below(t.output_width()))) = 1.0;
            }
        }

        const auto grads = nn::mlp_backward(model, x, y, loss);
        std::vector<double> analytic, numeric;
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            auto probe = [&](double& p, double g) {
                const double saved = p;
                p = saved + h;
                const double up = nn::mlp_backward(model, x, y, loss).loss;
                p = saved - h;
                const double down = nn::mlp_backward(model, x, y, loss).loss;
                p = saved;
                analytic.push_back(g);
                numeric.push_back((up - down) / (2 * h));
            };
            for (Eigen::Index i = 0; i < model.weights[l].size(); ++i) {
                probe(model.weights[l].data()[i], grads.weights[l].data()[i]);
            }
            for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) probe(model.biases[l](i), grads.biases[l](i));
        }
        const double err = relative_error(analytic, numeric);
        ++tally.instances;
        tally.worst = std::max(tally.worst, err);
        if (err < tolerance) ++tally.passed;
    }
    return tally;
}

double ScalarAdam::step(double w, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return w - lr * mh / (std::sqrt(vh) + eps);
}

double adam_max_deviation(int instances, int steps, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int n = 0; n < instances; ++n) {
        nn::TrainConfig cfg;
        cfg.learning_rate = rng.uniform(1e-4, 1e-1);
        cfg.adam_beta1 = rng.uniform(0.5, 0.95);
        cfg.adam_beta2 = rng.uniform(0.9, 0.9999);
        cfg.adam_eps = 1e-8;

        // f(w) = a (w - b)^2, one scalar per entry of a single parameter block
        const int width = uniform_int(rng, 1, 5);
        std::vector<double> a(width), b(width), w(width), ref(width);
        std::vector<ScalarAdam> ref_opt;
        for (int i = 0; i < width; ++i) {
            a[i] = rng.uniform(0.1, 3.0);
            b[i] = rng.normal();
            w[i] = ref[i] = rng.normal();
            ref_opt.push_back({cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
        }
        nn::AdamState state;
        std::vector<double> g(width);
        for (int s = 1; s <= steps; ++s) {
            for (int i = 0; i < width; ++i) g[i] = 2 * a[i] * (w[i] - b[i]);
            std::span<double> pw(w);
            std::span<const double> pg(g);
            nn::adam_step(std::span<const std::span<double>>(&pw, 1), std::span<const std::span<const double>>(&pg, 1),
                          state, cfg, cfg.learning_rate, s);
            for (int i = 0; i < width; ++i) ref[i] = ref_opt[i].step(ref[i], 2 * a[i] * (ref[i] - b[i]));
            for (int i = 0; i < width; ++i) worst = std::max(worst, std::abs(w[i] - ref[i]));
        }
    }
    return worst;
}

Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd a) {
    const Eigen::Index n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (Eigen::Index i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return Eigen::Map<Eigen::VectorXd>(ev.data(), n);
}

Eigen::MatrixXd covariance_loops(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows(), l = x.cols();
    std::vector<double> mean(l, 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < l; ++j) mean[j] += x(i, j) / n;
    Eigen::MatrixXd c(l, l);
    for (Eigen::Index a = 0; a < l; ++a) {
        for (Eigen::Index b = 0; b < l; ++b) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
            c(a, b) = s / (n - 1);
        }
    }
    return c;
}

CheckTally pca_eigen_check(int matrices, std::uint64_t seed, double tolerance) {
    CheckTally tally;
    Rng rng(seed);
    for (int m = 0; m < matrices; ++m) {
        // alternate between the covariance path (N > L) and the Gram path (N < L)
        const int n = m % 2 == 0 ? uniform_int(rng, 8, 14) : uniform_int(rng, 4, 7);
        const int l = m % 2 == 0 ? uniform_int(rng, 3, 6) : uniform_int(rng, 8, 12);
        Eigen::MatrixXd x(n, l);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal() * (1.0 + (i % l));
        const int k = std::min(n - 1, l);
        const auto model = prep::pca_fit(x, k);
        const auto ref = jacobi_eigenvalues(covariance_loops(x));
        double err = 0.0;
        for (int i = 0; i < k; ++i) err = std::max(err, std::abs(model.eigenvalues(i) - ref(i)));
        ++tally.instances;
        tally.worst = std::max(tally.worst, err);
        if (err <= tolerance) ++tally.passed;
    }
    return tally;
}

double macro_f1_one_vs_rest(const eval::ConfusionMatrix& cm) {
    std::vector<std::pair<int, int>> pairs;
    for (int t = 0; t < cm.classes(); ++t)
        for (int p = 0; p < cm.classes(); ++p)
            for (int n = 0; n < cm.counts(t, p); ++n) pairs.emplace_back(t, p);
    double sum = 0.0;
    for (int c = 0; c < cm.classes(); ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (auto [t, p] : pairs) {
            const bool is_t = t == c, is_p = p == c;
            tp += is_t && is_p;
            fp += !is_t && is_p;
            fn += is_t && !is_p;
        }
        if (tp == 0) continue;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        sum += 2.0 * precision * recall / (precision + recall);
    }
    return sum / cm.classes();
}

CheckTally macro_f1_check(int matrices, std::uint64_t seed) {
    CheckTally tally;
    Rng rng(seed);
    for (int m = 0; m < matrices; ++m) {
        eval::ConfusionMatrix cm(uniform_int(rng, 2, 5));
        for (Eigen::Index i = 0; i < cm.counts.size(); ++i) {
            // roughly one cell in five left empty so absent classes show up
            cm.counts.data()[i] = rng.uniform() < 0.2 ? 0 : uniform_int(rng, 0, 20);
        }
        const double got = eval::f1_score(cm, eval::Averaging::Macro);
        const double want = macro_f1_one_vs_rest(cm);
        ++tally.instances;
        tally.worst = std::max(tally.worst, std::abs(got - want));
        if (got == want) ++tally.passed;
    }
    return tally;
}

nn::Topology random_topology(Rng& rng, int max_hidden, int max_width) {
    nn::Topology t;
    t.layer_sizes.push_back(uniform_int(rng, 1, max_width));
    const int hidden = uniform_int(rng, 0, max_hidden);
    for (int i = 0; i < hidden; ++i) t.layer_sizes.push_back(uniform_int(rng, 1, max_width));
    t.layer_sizes.push_back(uniform_int(rng, 1, 3));
    return t;
}

nn::MlpModel random_model(const nn::Topology& t, Rng& rng, double scale) {
    auto m = nn::MlpModel::zeros(t);
    for (auto block : m.parameter_blocks())
        for (double& v : block) v = scale * rng.normal();
    return m;
}

CheckTally codec_round_trip_check(int models, std::uint64_t seed) {
    CheckTally tally;
    Rng rng(seed);
    for (int n = 0; n < models; ++n) {
        const auto t = random_topology(rng, 5, 12);
        auto model = random_model(t, rng, std::ldexp(1.0, uniform_int(rng, -20, 20)));
        const auto matrix = codec::coefficients_to_matrix(model);
        const auto back = codec::matrix_to_coefficients(matrix, t);
        const auto [rows, cols] = codec::matrix_shape(t);
        bool same = matrix.rows() == rows && matrix.cols() == cols && back.topology == t;
        const auto a = model.parameter_blocks();
        const auto b = back.parameter_blocks();
        same = same && a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) {
            same = a[i].size() == b[i].size() && std::memcmp(a[i].data(), b[i].data(), a[i].size_bytes()) == 0;
        }
        ++tally.instances;
        if (same) ++tally.passed;
    }
    return tally;
}

long mac_count(const std::vector<int>& sizes) {
    long macs = 0;
    for (std::size_t l = 1; l < sizes.size(); ++l) macs += static_cast<long>(sizes[l]) * (sizes[l - 1] + 1);
    return macs;
}

CheckTally trace_length_check(int topologies, std::uint64_t seed) {
    CheckTally tally;
    Rng rng(seed);
    for (int n = 0; n < topologies; ++n) {
        const auto t = random_topology(rng, 5, 16);
        const auto model = random_model(t, rng, 0.5);
        device::DeviceConfig cfg;
        cfg.samples_per_mac = uniform_int(rng, 1, 4);
        cfg.rng_seed = rng.next_u64();
        const auto input = device::draw_fixed_input(t.input_width(), rng.next_u64());
        const auto trace = device::simulate_trace(model, input, cfg);
        ++tally.instances;
        const long want = mac_count(t.layer_sizes) * cfg.samples_per_mac;
        if (static_cast<long>(trace.sample_count()) == want && device::total_macs(t) == mac_count(t.layer_sizes)) {
            ++tally.passed;
        }
    }
    return tally;
}

int popcount_loop(std::uint32_t word) {
    int n = 0;
    for (; word != 0; word >>= 1) n += static_cast<int>(word & 1u);
    return n;
}

std::uint32_t fixed_point_code(double value, int total_bits, int fraction_bits) {
    double scaled = std::rint(value * std::pow(2.0, fraction_bits));
    const double hi = std::pow(2.0, total_bits - 1) - 1, lo = -std::pow(2.0, total_bits - 1);
    scaled = std::min(hi, std::max(lo, scaled));
    auto code = static_cast<long long>(scaled);
    if (code < 0) code += 1LL << total_bits;
    return static_cast<std::uint32_t>(code);
}

std::vector<SlotLeak> slot_leakage(const nn::MlpModel& model, const Eigen::VectorXd& input, int total_bits,
                                   int fraction_bits) {
    auto hw = [&](double v) { return popcount_loop(fixed_point_code(v, total_bits, fraction_bits)); };
    std::vector<SlotLeak> slots;
    std::vector<double> operands(input.data(), input.data() + input.size());
    const int layers = model.topology.layer_count();
    for (int l = 0; l < layers; ++l) {
        const auto& w = model.weights[l];
        const auto& b = model.biases[l];
        std::vector<double> next(w.cols());
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            double z = b(j);
            for (Eigen::Index k = 0; k < w.rows(); ++k) {
                slots.push_back({hw(w(k, j)), hw(operands[k])});
                z += w(k, j) * operands[k];
            }
            slots.push_back({hw(b(j)), 0});
            next[j] = (l + 1 < layers) ? std::max(z, 0.0) : z;
        }
        operands = next;
    }
    return slots;
}

namespace {

double adc(double raw, const device::DeviceConfig& c) {
    const double levels = std::pow(2.0, c.adc_bits) - 1;
    const double step = (c.adc_hi - c.adc_lo) / levels;
    const double clamped = std::min(c.adc_hi, std::max(c.adc_lo, raw));
    const double idx = std::rint((clamped - c.adc_lo) / step);
    return idx >= levels ? c.adc_hi : c.adc_lo + idx * step;
}

// Locate coefficient `slot` in the model (layer-major, neuron-major, weights then bias).
double& coefficient_at(nn::MlpModel& m, int slot) {
    for (int l = 0; l < m.topology.layer_count(); ++l) {
        const int fan_in = static_cast<int>(m.weights[l].rows());
        const int span = static_cast<int>(m.weights[l].cols()) * (fan_in + 1);
        if (slot < span) {
            const int j = slot / (fan_in + 1), k = slot % (fan_in + 1);
            return k == fan_in ? m.biases[l](j) : m.weights[l](k, j);
        }
        slot -= span;
    }
    throw std::out_of_range("slot");
}

} // namespace

LocalityTally locality_check(int perturbations, std::uint64_t seed) {
    LocalityTally tally;
    Rng rng(seed);
    for (int n = 0; n < perturbations; ++n) {
        const auto t = random_topology(rng, 3, 8);
        auto a = random_model(t, rng, 0.6);
        device::DeviceConfig cfg;
        cfg.noise_sigma = 0.0;
        cfg.samples_per_mac = uniform_int(rng, 1, 3);
        const auto input = device::draw_fixed_input(t.input_width(), rng.next_u64());

        const int slots = static_cast<int>(mac_count(t.layer_sizes));
        const int slot = static_cast<int>(rng.below(slots));
        auto b = a;
        double& c = coefficient_at(b, slot);
        const auto before = popcount_loop(fixed_point_code(c, cfg.fixed_point_bits, cfg.fraction_bits));
        do {
            c += rng.normal() * 0.5;
        } while (popcount_loop(fixed_point_code(c, cfg.fixed_point_bits, cfg.fraction_bits)) == before);

        const auto ta = device::simulate_trace(a, input, cfg);
        const auto tb = device::simulate_trace(b, input, cfg);
        const auto la = slot_leakage(a, input.values, cfg.fixed_point_bits, cfg.fraction_bits);
        const auto lb = slot_leakage(b, input.values, cfg.fixed_point_bits, cfg.fraction_bits);

        bool ok = ta.sample_count() == tb.sample_count() && la.size() == static_cast<std::size_t>(slots);
        int changed = 0;
        bool propagated = false;
        for (int s = 0; ok && s < slots; ++s) {
            bool differs = false;
            for (int k = 0; k < cfg.samples_per_mac; ++k) {
                const std::size_t i = static_cast<std::size_t>(s) * cfg.samples_per_mac + k;
                const auto want_a = static_cast<float>(adc(cfg.static_power + cfg.dynamic_scale *
                                                           (la[s].coefficient_hw + la[s].operand_hw), cfg));
                const auto want_b = static_cast<float>(adc(cfg.static_power + cfg.dynamic_scale *
                                                           (lb[s].coefficient_hw + lb[s].operand_hw), cfg));
                ok = ok && ta.samples[i] == want_a && tb.samples[i] == want_b;
                differs = differs || ta.samples[i] != tb.samples[i];
            }
            if (!differs) continue;
            ++changed;
            if (s == slot) continue;
            // any other moved slot must be one whose operand word changed
            ok = ok && la[s].operand_hw != lb[s].operand_hw && la[s].coefficient_hw == lb[s].coefficient_hw;
            propagated = true;
        }
        // the perturbed slot itself must move
        bool slot_moved = false;
        for (int k = 0; k < cfg.samples_per_mac; ++k) {
            const std::size_t i = static_cast<std::size_t>(slot) * cfg.samples_per_mac + k;
            slot_moved = slot_moved || ta.samples[i] != tb.samples[i];
        }
        ok = ok && slot_moved;

        const int last_layer_start = slots - t.output_width() * (t.layer_sizes[t.layer_sizes.size() - 2] + 1);
        if (slot >= last_layer_start) {
            ++tally.output_layer_cases;
            if (ok && changed == 1) ++tally.output_layer_local;
        }
        if (propagated) ++tally.propagated;
        if (ok && changed == 1) ++tally.strictly_local;
        ++tally.slots.instances;
        if (ok) ++tally.slots.passed;
    }
    return tally;
}

double hamming_decoder_ceiling(const Eigen::MatrixXd& matrices, const Eigen::MatrixXd& mask, double tau,
                               int total_bits, int fraction_bits) {
    const Eigen::Index cols = mask.cols();
    long hit = 0, total = 0;
    for (Eigen::Index j = 0; j < matrices.cols(); ++j) {
        if (mask(j / cols, j % cols) == 0.0) continue;
        std::map<int, std::vector<double>> groups;
        for (Eigen::Index i = 0; i < matrices.rows(); ++i) {
            const double v = matrices(i, j);
            groups[popcount_loop(fixed_point_code(v, total_bits, fraction_bits))].push_back(v);
        }
        for (auto& [hw, values] : groups) {
            std::sort(values.begin(), values.end());
            std::size_t best = 0;
            for (std::size_t lo = 0, hi = 0; lo < values.size(); ++lo) {
                while (hi < values.size() && values[hi] - values[lo] <= 2.0 * tau) ++hi;
                best = std::max(best, hi - lo);
            }
            hit += static_cast<long>(best);
            total += static_cast<long>(values.size());
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

} // namespace p2w::oracle

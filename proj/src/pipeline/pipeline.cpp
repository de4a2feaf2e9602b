#include "p2w/pipeline/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"

namespace p2w::pipeline {

namespace {

// Seed streams under the master seed.
constexpr std::uint64_t kFixedInputStream = 0xf1;
constexpr std::uint64_t kSurrogateStream = 0x5a;
constexpr std::uint64_t kSplitStream = 0x59;
constexpr std::uint64_t kEdnnInitStream = 0xed;
constexpr std::uint64_t kEdnnTrainStream = 0xe7;

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes only its own slot.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

void PipelineConfig::validate() const {
    topology.validate();
    device.validate();
    surrogate_train.validate();
    ednn_train.validate();
    finetune.validate();
    if (r < 1) throw ValidationError("pipeline: r must be >= 1");
    if (initial_chunks < 1) throw ValidationError("pipeline: initial_chunks must be >= 1");
    if (!(tau > 0.0)) throw ValidationError("pipeline: tau must be positive");
    if (pca_k < 1) throw ValidationError("pipeline: pca_k must be >= 1");
    if (threads < 1) throw ValidationError("pipeline: threads must be >= 1");
}

Splits split_pairs(int n, std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(std::span<int>(order));
    const int n_train = static_cast<int>(std::lround(0.75 * n));
    const int n_test = std::min(n - n_train, static_cast<int>(std::lround(0.20 * n)));
    Splits s;
    s.train.assign(order.begin(), order.begin() + n_train);
    s.test.assign(order.begin() + n_train, order.begin() + n_train + n_test);
    s.validation.assign(order.begin() + n_train + n_test, order.end());
    for (auto* part : {&s.train, &s.test, &s.validation}) std::sort(part->begin(), part->end());
    return s;
}

Eigen::MatrixXd TracePairDataset::trace_matrix() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(traces.trace_count()), static_cast<Eigen::Index>(traces.trace_length));
    for (std::size_t i = 0; i < traces.trace_count(); ++i) {
        const auto row = traces.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
    }
    return out;
}

codec::WeightsMatrix TracePairDataset::matrix(int i) const {
    const auto [rows, cols] = codec::matrix_shape(topology);
    codec::WeightsMatrix m;
    m.topology = topology;
    m.entries = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        matrices.row(i).eval().data(), rows, cols);
    return m;
}

TracePairDataset prepare_pairs(const std::vector<data::LabeledDataset>& sub, int r, const PipelineConfig& cfg,
                               const device::FixedInput& fixed_input, int round) {
    if (sub.empty()) throw ValidationError("prepare_pairs: no chunks given");
    if (r < 1) throw ValidationError("prepare_pairs: r must be >= 1");
    const nn::Topology& topo = cfg.topology;
    for (std::size_t c = 0; c < sub.size(); ++c) {
        if (sub[c].features() != topo.input_width() || sub[c].class_count != topo.class_count()) {
            throw ValidationError("prepare_pairs: chunk " + std::to_string(c) + " ('" + sub[c].name + "') has " +
                                  std::to_string(sub[c].features()) + " features and " +
                                  std::to_string(sub[c].class_count) + " classes, the surrogate topology needs " +
                                  std::to_string(topo.input_width()) + " and " + std::to_string(topo.class_count()));
        }
    }
    if (fixed_input.values.size() != topo.input_width()) {
        throw ShapeError("prepare_pairs: fixed input width differs from the topology input width");
    }

    const int n = static_cast<int>(sub.size()) * r;
    const auto [rows, cols] = codec::matrix_shape(topo);
    const std::uint64_t round_seed = derive_seed(derive_seed(cfg.seed, kSurrogateStream), static_cast<std::uint64_t>(round));
    device::DeviceConfig dev = cfg.device;
    const std::uint64_t device_base = derive_seed(cfg.device.rng_seed, static_cast<std::uint64_t>(round));

    std::vector<std::vector<float>> traces(static_cast<std::size_t>(n));
    TracePairDataset out;
    out.matrices.resize(n, static_cast<Eigen::Index>(rows) * cols);
    out.surrogate_accuracy.assign(static_cast<std::size_t>(n), 0.0);

    parallel_for(n, cfg.threads, [&](int p) {
        const auto& chunk = sub[static_cast<std::size_t>(p / r)];
        const std::uint64_t s = derive_seed(round_seed, static_cast<std::uint64_t>(p));
        Rng init_rng(derive_seed(s, 1));
        nn::MlpModel model = nn::MlpModel::random(topo, init_rng);
        nn::TrainConfig tc = cfg.surrogate_train;
        tc.rng_seed = derive_seed(s, 2);
        out.surrogate_accuracy[static_cast<std::size_t>(p)] = train_classifier(model, chunk, tc);

        device::DeviceConfig d = dev;
        d.rng_seed = device::pair_seed(device_base, static_cast<std::uint64_t>(p));
        traces[static_cast<std::size_t>(p)] = device::simulate_trace(model, fixed_input, d).samples;

        const codec::WeightsMatrix w = codec::coefficients_to_matrix(model);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> flat = w.entries;
        out.matrices.row(p) = Eigen::Map<const Eigen::RowVectorXd>(flat.data(), flat.size());
    });

    for (const auto& t : traces) out.traces.append(t);
    out.topology = topo;
    out.fixed_input_digest = fixed_input.digest();
    out.traces.meta = Json{{"device", device::to_json(dev)},
                           {"device_digest", dev.digest()},
                           {"topology", nn::to_json(topo)},
                           {"topology_digest", topo.digest()},
                           {"input_digest", out.fixed_input_digest},
                           {"rng_seed", device_base},
                           {"round", round}};
    out.splits = split_pairs(n, derive_seed(derive_seed(cfg.seed, kSplitStream), static_cast<std::uint64_t>(round)));
    return out;
}

device::FixedInput phase_fixed_input(const PipelineConfig& cfg) {
    return device::draw_fixed_input(cfg.topology.input_width(), derive_seed(cfg.seed, kFixedInputStream));
}

Phase1Result run_phase1(const PipelineConfig& cfg, const std::vector<data::LabeledDataset>& chunks,
                        const device::FixedInput& fixed_input) {
    cfg.validate();
    if (chunks.empty()) throw ValidationError("phase 1: the chunk list S is empty");

    std::optional<ednn::EdnnModel> model;
    Phase1Result result;
    std::vector<data::LabeledDataset> sub;
    const std::size_t first = std::min<std::size_t>(static_cast<std::size_t>(cfg.initial_chunks), chunks.size());
    sub.assign(chunks.begin(), chunks.begin() + static_cast<std::ptrdiff_t>(first - 1));
    for (std::size_t k = first; k <= chunks.size(); ++k) {
        sub.push_back(chunks[k - 1]);
        TracePairDataset pairs = prepare_pairs(sub, cfg.r, cfg, fixed_input, static_cast<int>(k));
        if (pairs.size() < cfg.pca_k) {
            throw ValidationError("phase 1: " + std::to_string(pairs.size()) + " pairs cannot support pca_k = " +
                                  std::to_string(cfg.pca_k) + "; raise r or lower pca_k");
        }
        const Eigen::MatrixXd raw = pairs.trace_matrix();
        prep::PcaModel pca = prep::pca_fit(raw, cfg.pca_k);
        pairs.pca_digest = pca.digest();
        const Eigen::MatrixXd reduced = prep::pca_transform_rows(pca, raw);
        prep::Standardizer stats = prep::Standardizer::fit(reduced);

        if (!model) model = ednn::build_ednn(cfg.pca_k, cfg.topology, cfg.scale, derive_seed(cfg.seed, kEdnnInitStream));
        ednn::TrainingSet ts;
        ts.inputs = stats.apply_rows(reduced);
        ts.targets = pairs.matrices;
        ts.train = pairs.splits.train;
        ts.validation = pairs.splits.validation;
        ts.mask = codec::coefficient_mask(cfg.topology);
        nn::TrainConfig tc = cfg.ednn_train;
        tc.rng_seed = derive_seed(derive_seed(cfg.seed, kEdnnTrainStream), k);
        const ednn::TrainHistory h = ednn::train_ednn(*model, ts, tc, cfg.theta, cfg.tau, cfg.on_epoch);

        IterationRecord rec;
        rec.iteration = static_cast<int>(k);
        rec.pairs = pairs.size();
        rec.epochs = h.epochs_run();
        rec.validation_accuracy = h.final_validation_accuracy();
        rec.test_accuracy = pairs.splits.test.empty() ? 0.0
                                                      : ednn::split_accuracy(*model, ts, pairs.splits.test, cfg.tau);
        rec.mean_surrogate_accuracy = mean(pairs.surrogate_accuracy);
        rec.reached_threshold = h.reached_threshold;
        result.history.push_back(rec);
        result.validation_curve.insert(result.validation_curve.end(), h.validation_accuracy.begin(),
                                       h.validation_accuracy.end());

        result.pca = std::move(pca);
        result.standardizer = std::move(stats);
        result.pairs = std::move(pairs);
        if (h.reached_threshold) {
            result.reached_threshold = true;
            break;
        }
    }
    result.ednn = std::move(*model);
    return result;
}

codec::WeightsMatrix extract_from_trace(ednn::EdnnModel& ednn, const prep::PcaModel& pca,
                                        const prep::Standardizer& stats, const std::vector<float>& trace,
                                        const nn::Topology& topology) {
    if (topology != ednn.target_topology) {
        throw ValidationError("phase 2: the target topology differs from the one the EDNN was trained for");
    }
    const Eigen::VectorXd raw = Eigen::Map<const Eigen::VectorXf>(trace.data(), static_cast<Eigen::Index>(trace.size()))
                                    .cast<double>();
    const Eigen::VectorXd reduced = prep::pca_transform(pca, raw);
    return ednn::predict_weights(ednn, stats.apply(reduced));
}

codec::WeightsMatrix run_phase2(ednn::EdnnModel& ednn, const prep::PcaModel& pca, const prep::Standardizer& stats,
                                const nn::MlpModel& target, const device::FixedInput& fixed_input,
                                const device::DeviceConfig& device, const Phase1Fingerprint& expected,
                                std::uint64_t capture_seed) {
    if (fixed_input.digest() != expected.fixed_input_digest) {
        throw ValidationError("phase 2: fixed input digest " + fixed_input.digest() + " differs from phase 1 (" +
                              expected.fixed_input_digest + ")");
    }
    if (pca.digest() != expected.pca_digest) {
        throw ValidationError("phase 2: PCA digest " + pca.digest() + " differs from phase 1 (" +
                              expected.pca_digest + ")");
    }
    target.validate();
    device::DeviceConfig d = device;
    d.rng_seed = capture_seed;
    const device::PowerTrace trace = device::simulate_trace(target, fixed_input, d);
    return extract_from_trace(ednn, pca, stats, trace.samples, target.topology);
}

void save_pairs(const std::filesystem::path& dir, const TracePairDataset& pairs, const std::string& config_digest) {
    device::TraceSet set = pairs.traces;
    set.meta["config_digest"] = config_digest;
    device::write_trace_set(dir, set);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m = pairs.matrices;
    write_f64(dir / "matrices.f64", std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
    write_json(dir / "pairs.json", Json{{"config_digest", config_digest},
                                        {"count", pairs.size()},
                                        {"matrix_width", pairs.matrices.cols()},
                                        {"topology", nn::to_json(pairs.topology)},
                                        {"fixed_input_digest", pairs.fixed_input_digest},
                                        {"pca_digest", pairs.pca_digest},
                                        {"surrogate_accuracy", pairs.surrogate_accuracy},
                                        {"splits",
                                         {{"train", pairs.splits.train},
                                          {"test", pairs.splits.test},
                                          {"validation", pairs.splits.validation}}}});
}

TracePairDataset load_pairs(const std::filesystem::path& dir) {
    TracePairDataset pairs;
    pairs.traces = device::read_trace_set(dir);
    const Json j = read_json(dir / "pairs.json");
    const int count = j.at("count").get<int>();
    const int width = j.at("matrix_width").get<int>();
    pairs.topology = nn::topology_from_json(j.at("topology"));
    const auto [rows, cols] = codec::matrix_shape(pairs.topology);
    if (width != rows * cols || static_cast<std::size_t>(count) != pairs.traces.trace_count()) {
        throw ValidationError(dir.string() + ": pairs.json disagrees with the stored traces or topology");
    }
    const std::vector<double> flat = read_f64(dir / "matrices.f64");
    if (flat.size() != static_cast<std::size_t>(count) * static_cast<std::size_t>(width)) {
        throw ValidationError(dir.string() + ": matrices.f64 has the wrong size");
    }
    pairs.matrices = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), count, width);
    pairs.fixed_input_digest = j.at("fixed_input_digest").get<std::string>();
    pairs.pca_digest = j.at("pca_digest").get<std::string>();
    pairs.surrogate_accuracy = j.at("surrogate_accuracy").get<std::vector<double>>();
    pairs.splits.train = j.at("splits").at("train").get<std::vector<int>>();
    pairs.splits.test = j.at("splits").at("test").get<std::vector<int>>();
    pairs.splits.validation = j.at("splits").at("validation").get<std::vector<int>>();
    return pairs;
}

} // namespace p2w::pipeline

namespace p2w::pipeline {

void stamp_config_digest(const std::filesystem::path& json_file, const std::string& config_digest) {
    Json j = read_json(json_file);
    j["config_digest"] = config_digest;
    write_json(json_file, j);
}

Json to_json(const IterationRecord& r) {
    return Json{{"iteration", r.iteration},
                {"pairs", r.pairs},
                {"epochs", r.epochs},
                {"validation_accuracy", r.validation_accuracy},
                {"test_accuracy", r.test_accuracy},
                {"mean_surrogate_accuracy", r.mean_surrogate_accuracy},
                {"reached_threshold", r.reached_threshold}};
}

void save_phase1(const std::filesystem::path& dir, Phase1Result& result, const device::FixedInput& fixed_input,
                 const std::string& config_digest, const std::string& phase1_digest) {
    std::filesystem::create_directories(dir);
    Json fi = device::to_json(fixed_input);
    fi["config_digest"] = config_digest;
    write_json(dir / "fixed_input.json", fi);
    save_pairs(dir / "pairs", result.pairs, config_digest);
    prep::save_pca(dir, result.pca);
    stamp_config_digest(dir / "pca.json", config_digest);
    ednn::save_ednn(dir, result.ednn);
    stamp_config_digest(dir / "ednn.json", config_digest);
    Json history = Json::array();
    for (const auto& h : result.history) history.push_back(to_json(h));
    write_json(dir / "phase1.json", Json{{"config_digest", config_digest},
                                         {"phase1_digest", phase1_digest},
                                         {"fixed_input_digest", fixed_input.digest()},
                                         {"pca_digest", result.pca.digest()},
                                         {"ednn_digest", result.ednn.digest()},
                                         {"standardizer", prep::to_json(result.standardizer)},
                                         {"reached_threshold", result.reached_threshold},
                                         {"history", history},
                                         {"validation_curve", result.validation_curve}});
}

bool has_phase1(const std::filesystem::path& dir) {
    for (const char* f : {"fixed_input.json", "pca.json", "ednn.json", "phase1.json"}) {
        if (!std::filesystem::exists(dir / f)) return false;
    }
    return true;
}

std::string stored_phase1_digest(const std::filesystem::path& dir) {
    return read_json(dir / "phase1.json").value("phase1_digest", std::string());
}

Phase1Result load_phase1(const std::filesystem::path& dir, device::FixedInput& fixed_input, bool with_pairs) {
    if (!has_phase1(dir)) throw ValidationError(dir.string() + ": phase-1 artifacts are missing");
    const Json meta = read_json(dir / "phase1.json");
    fixed_input = device::fixed_input_from_json(read_json(dir / "fixed_input.json"));
    if (fixed_input.digest() != meta.at("fixed_input_digest").get<std::string>()) {
        throw ValidationError(dir.string() + ": fixed_input.json does not match the digest recorded in phase 1");
    }
    Phase1Result r;
    r.pca = prep::load_pca(dir);
    if (r.pca.digest() != meta.at("pca_digest").get<std::string>()) {
        throw ValidationError(dir.string() + ": PCA model does not match the digest recorded in phase 1");
    }
    r.ednn = ednn::load_ednn(dir);
    r.standardizer = prep::standardizer_from_json(meta.at("standardizer"));
    r.reached_threshold = meta.at("reached_threshold").get<bool>();
    r.validation_curve = meta.at("validation_curve").get<std::vector<double>>();
    for (const auto& h : meta.at("history")) {
        IterationRecord rec;
        rec.iteration = h.at("iteration").get<int>();
        rec.pairs = h.at("pairs").get<int>();
        rec.epochs = h.at("epochs").get<int>();
        rec.validation_accuracy = h.at("validation_accuracy").get<double>();
        rec.test_accuracy = h.at("test_accuracy").get<double>();
        rec.mean_surrogate_accuracy = h.at("mean_surrogate_accuracy").get<double>();
        rec.reached_threshold = h.at("reached_threshold").get<bool>();
        r.history.push_back(rec);
    }
    if (with_pairs) r.pairs = load_pairs(dir / "pairs");
    return r;
}

} // namespace p2w::pipeline

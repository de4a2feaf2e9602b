#include "p2w/pipeline/config.hpp"

#include <set>

#include "p2w/common/digest.hpp"
#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"

namespace p2w::pipeline {

namespace {

constexpr std::uint64_t kPublicPoolStream = 0x9b;

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError("config: " + where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ValidationError("config: unknown key '" + where + key + "'");
    }
}

const std::set<std::string> kTrainKeys = {"epochs", "batch_size", "learning_rate", "optimizer",
                                          "adam_beta1", "adam_beta2", "adam_eps", "rng_seed"};
const std::set<std::string> kDeviceKeys = {"samples_per_mac", "static_power", "dynamic_scale",
                                           "noise_sigma", "adc_bits", "adc_range",
                                           "fixed_point_bits", "fraction_bits", "rng_seed"};
const std::set<std::string> kFinetuneKeys = {"epochs_max", "learning_rate", "early_stop_patience",
                                             "lr_halve_patience", "batch_size", "validation_fraction",
                                             "rng_seed"};
const std::set<std::string> kTopKeys = {"scale", "seed", "tasks", "hidden", "dropout", "chunks", "chunk_size",
                                        "r", "initial_chunks", "theta", "tau", "pca_k", "device", "surrogate_train",
                                        "ednn_train", "target_train_size", "target_train", "test_size",
                                        "small_pool_size", "finetune", "seeds", "modes", "threads"};

// Overlays the keys present in `patch` onto `base` after checking them.
Json overlay(Json base, const Json& patch, const std::set<std::string>& allowed, const std::string& where) {
    check_keys(patch, allowed, where);
    for (const auto& [key, value] : patch.items()) base[key] = value;
    return base;
}

} // namespace

void RunConfig::validate() const {
    ednn::scale_from_string(scale);
    if (tasks.empty()) throw ValidationError("config: tasks is empty");
    for (const auto& t : tasks) data::task_preset(t);
    if (hidden.empty()) throw ValidationError("config: hidden needs at least one layer");
    for (int h : hidden) {
        if (h < 1) throw ValidationError("config: hidden layer widths must be >= 1");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("config: dropout must lie in [0, 1)");
    if (chunks < 1 || chunk_size < 1) throw ValidationError("config: chunks and chunk_size must be >= 1");
    if (r < 1) throw ValidationError("config: r must be >= 1");
    if (!(tau > 0.0)) throw ValidationError("config: tau must be positive");
    if (pca_k < 1) throw ValidationError("config: pca_k must be >= 1");
    if (initial_chunks < 1 || initial_chunks > chunks) {
        throw ValidationError("config: initial_chunks must lie in [1, chunks]");
    }
    if (initial_chunks * r < pca_k) {
        throw ValidationError("config: initial_chunks * r = " + std::to_string(initial_chunks * r) +
                              " first-iteration pairs cannot support pca_k = " + std::to_string(pca_k));
    }
    device.validate();
    surrogate_train.validate();
    ednn_train.validate();
    target_train.validate();
    finetune.validate();
    if (target_train_size < 2 || test_size < 1 || small_pool_size < 1) {
        throw ValidationError("config: dataset sizes must be positive");
    }
    if (seeds < 1) throw ValidationError("config: seeds must be >= 1");
    if (modes.empty()) throw ValidationError("config: modes is empty");
    if (threads < 1) throw ValidationError("config: threads must be >= 1");
}

std::string RunConfig::digest() const { return json_digest(to_json(*this)); }

RunConfig desk_config() {
    RunConfig c;
    c.device.rng_seed = 0;
    c.ednn_train.epochs = 30;
    c.ednn_train.batch_size = 32;
    c.ednn_train.learning_rate = 0.001;
    c.target_train.epochs = 60;
    c.target_train.batch_size = 32;
    c.target_train.learning_rate = 0.003;
    return c;
}

RunConfig paper_config() {
    RunConfig c = desk_config();
    c.scale = "paper";
    c.hidden = {128, 64, 64, 64};
    c.chunks = 100;
    c.chunk_size = 1090;
    c.r = 30;
    c.initial_chunks = 35;
    c.pca_k = 1024;
    c.ednn_train.epochs = 200;
    c.ednn_train.batch_size = 32;
    c.target_train_size = 50000;
    c.test_size = 10000;
    return c;
}

RunConfig default_config(const std::string& scale) {
    const auto s = ednn::scale_from_string(scale);
    return s == ednn::Scale::Paper ? paper_config() : desk_config();
}

Json to_json(const RunConfig& c) {
    Json modes = Json::array();
    for (auto m : c.modes) modes.push_back(data::to_string(m));
    return Json{{"scale", c.scale},
                {"seed", c.seed},
                {"tasks", c.tasks},
                {"hidden", c.hidden},
                {"dropout", c.dropout},
                {"chunks", c.chunks},
                {"chunk_size", c.chunk_size},
                {"r", c.r},
                {"initial_chunks", c.initial_chunks},
                {"theta", c.theta},
                {"tau", c.tau},
                {"pca_k", c.pca_k},
                {"device", device::to_json(c.device)},
                {"surrogate_train", nn::to_json(c.surrogate_train)},
                {"ednn_train", nn::to_json(c.ednn_train)},
                {"target_train_size", c.target_train_size},
                {"target_train", nn::to_json(c.target_train)},
                {"test_size", c.test_size},
                {"small_pool_size", c.small_pool_size},
                {"finetune", to_json(c.finetune)},
                {"seeds", c.seeds},
                {"modes", modes},
                {"threads", c.threads}};
}

RunConfig run_config_from_json(const Json& j) {
    try {
        check_keys(j, kTopKeys, "");
        const std::string scale = j.value("scale", std::string("desk"));
        const RunConfig defaults = default_config(scale);
        const Json base = to_json(defaults);

        RunConfig c = defaults;
        c.scale = scale;
        c.seed = j.value("seed", c.seed);
        c.tasks = j.value("tasks", c.tasks);
        c.hidden = j.value("hidden", c.hidden);
        c.dropout = j.value("dropout", c.dropout);
        c.chunks = j.value("chunks", c.chunks);
        c.chunk_size = j.value("chunk_size", c.chunk_size);
        c.r = j.value("r", c.r);
        c.initial_chunks = j.value("initial_chunks", c.initial_chunks);
        c.theta = j.value("theta", c.theta);
        c.tau = j.value("tau", c.tau);
        c.pca_k = j.value("pca_k", c.pca_k);
        if (j.contains("device")) {
            c.device = device::device_config_from_json(overlay(base.at("device"), j.at("device"), kDeviceKeys, "device."));
        }
        if (j.contains("surrogate_train")) {
            c.surrogate_train = nn::train_config_from_json(
                overlay(base.at("surrogate_train"), j.at("surrogate_train"), kTrainKeys, "surrogate_train."));
        }
        if (j.contains("ednn_train")) {
            c.ednn_train =
                nn::train_config_from_json(overlay(base.at("ednn_train"), j.at("ednn_train"), kTrainKeys, "ednn_train."));
        }
        c.target_train_size = j.value("target_train_size", c.target_train_size);
        if (j.contains("target_train")) {
            c.target_train = nn::train_config_from_json(
                overlay(base.at("target_train"), j.at("target_train"), kTrainKeys, "target_train."));
        }
        c.test_size = j.value("test_size", c.test_size);
        c.small_pool_size = j.value("small_pool_size", c.small_pool_size);
        if (j.contains("finetune")) {
            c.finetune =
                finetune_config_from_json(overlay(base.at("finetune"), j.at("finetune"), kFinetuneKeys, "finetune."));
        }
        c.seeds = j.value("seeds", c.seeds);
        if (j.contains("modes")) {
            c.modes.clear();
            for (const auto& m : j.at("modes")) c.modes.push_back(data::sample_mode_from_string(m.get<std::string>()));
        }
        c.threads = j.value("threads", c.threads);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    try {
        return run_config_from_json(read_json(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string phase1_digest(const RunConfig& c, const std::string& task) {
    const Json all = to_json(c);
    Json j = Json::object();
    for (const char* key : {"scale", "seed", "hidden", "dropout", "chunks", "chunk_size", "r", "initial_chunks",
                            "theta", "tau", "pca_k", "device", "surrogate_train", "ednn_train"}) {
        j[key] = all.at(key);
    }
    j["task"] = task;
    return json_digest(j);
}

std::uint64_t task_seed(std::uint64_t master, const std::string& task) {
    return derive_seed(master, Digest().text(task).value());
}

nn::Topology task_topology(const RunConfig& c, const data::TaskPreset& preset) {
    nn::Topology t;
    t.layer_sizes.push_back(preset.spec.d);
    t.layer_sizes.insert(t.layer_sizes.end(), c.hidden.begin(), c.hidden.end());
    t.layer_sizes.push_back(preset.spec.C == 2 ? 1 : preset.spec.C);
    t.dropout_rate = c.dropout;
    t.validate();
    return t;
}

PipelineConfig pipeline_config(const RunConfig& c, const data::TaskPreset& preset) {
    PipelineConfig p;
    p.topology = task_topology(c, preset);
    p.r = c.r;
    p.initial_chunks = c.initial_chunks;
    p.theta = c.theta;
    p.tau = c.tau;
    p.pca_k = c.pca_k;
    p.scale = ednn::scale_from_string(c.scale);
    p.seed = task_seed(c.seed, preset.spec.name);
    p.device = c.device;
    p.device.rng_seed = derive_seed(p.seed, c.device.rng_seed);
    p.surrogate_train = c.surrogate_train;
    p.ednn_train = c.ednn_train;
    p.finetune = c.finetune;
    p.threads = c.threads;
    p.validate();
    return p;
}

std::vector<data::LabeledDataset> public_chunks(const RunConfig& c, const data::TaskPreset& preset) {
    const std::uint64_t seed = derive_seed(task_seed(c.seed, preset.spec.name), kPublicPoolStream);
    data::LabeledDataset pool = data::gen_synthetic(preset.spec, c.chunks * c.chunk_size, seed);
    pool.name = preset.spec.name + "/public";
    return data::chunk(pool, c.chunks);
}

} // namespace p2w::pipeline

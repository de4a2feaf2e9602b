#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p2w/data/dataset.hpp"
#include "p2w/data/synthetic.hpp"
#include "p2w/pipeline/pipeline.hpp"

namespace p2w::pipeline {

/// One JSON document drives a whole run: shared topology shape, every phase's settings and the
/// experiment protocol. Unknown keys are rejected, missing keys take the scale's defaults.
struct RunConfig {
    std::string scale = "desk";
    std::uint64_t seed = 7;
    std::vector<std::string> tasks = {"eeg", "diabetes", "sleep"};

    // Classifier shape: [d, hidden..., 1 or C].
    std::vector<int> hidden = {16, 8, 8, 8};
    double dropout = 0.3;

    // Public pool that phase 1 chunks.
    int chunks = 2;
    int chunk_size = 500;

    int r = 300;
    int initial_chunks = 1;
    double theta = 0.85;
    double tau = 0.05;
    int pca_k = 256;
    device::DeviceConfig device;
    nn::TrainConfig surrogate_train = default_surrogate_training();
    nn::TrainConfig ednn_train;

    // Target model and evaluation data, drawn per experiment seed.
    int target_train_size = 5000;
    nn::TrainConfig target_train;
    int test_size = 2000;
    int small_pool_size = 1000;
    FinetuneConfig finetune;

    int seeds = 20;
    std::vector<data::SampleMode> modes = {data::SampleMode::Balanced, data::SampleMode::Imbalanced2x};

    int threads = 1;

    void validate() const;
    std::string digest() const;
};

RunConfig desk_config();
RunConfig paper_config();
RunConfig default_config(const std::string& scale);

Json to_json(const RunConfig& c);
/// Strict parse: missing keys fall back to the defaults of the document's "scale".
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Digest of the settings phase 1 of `task` depends on; artifacts are reused when it matches.
std::string phase1_digest(const RunConfig& c, const std::string& task);

/// Seed of one task's run under the master seed.
std::uint64_t task_seed(std::uint64_t master, const std::string& task);

nn::Topology task_topology(const RunConfig& c, const data::TaskPreset& preset);
PipelineConfig pipeline_config(const RunConfig& c, const data::TaskPreset& preset);

/// Public data for phase 1: `chunks` stratified chunks of a fresh draw from the task.
std::vector<data::LabeledDataset> public_chunks(const RunConfig& c, const data::TaskPreset& preset);

} // namespace p2w::pipeline

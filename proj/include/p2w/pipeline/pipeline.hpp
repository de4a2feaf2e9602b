#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "p2w/codec/weights_matrix.hpp"
#include "p2w/data/dataset.hpp"
#include "p2w/device/simulator.hpp"
#include "p2w/device/trace_store.hpp"
#include "p2w/ednn/ednn.hpp"
#include "p2w/nn/optim.hpp"
#include "p2w/pipeline/classifier.hpp"
#include "p2w/prep/pca.hpp"
#include "p2w/prep/standardize.hpp"

namespace p2w::pipeline {

/// Everything phases 1 to 3 need. Surrogate, target and new model share `topology`.
struct PipelineConfig {
    nn::Topology topology;
    int r = 30;
    /// Chunks in Sub at the first outer iteration. 1 follows the algorithm literally; larger
    /// values let the first PCA fit see at least pca_k traces.
    int initial_chunks = 1;
    double theta = 0.85;
    double tau = 0.05;
    int pca_k = 256;
    ednn::Scale scale = ednn::Scale::Desk;
    device::DeviceConfig device;
    nn::TrainConfig surrogate_train = default_surrogate_training();
    nn::TrainConfig ednn_train;
    FinetuneConfig finetune;
    std::uint64_t seed = 0;
    int threads = 1;
    /// Progress callback for EDNN epochs (not part of the configuration digest).
    ednn::EpochHook on_epoch;

    void validate() const;
};

struct Splits {
    std::vector<int> train;
    std::vector<int> test;
    std::vector<int> validation;
};

/// 75/20/5 train/test/validation within rounding, shuffled by `seed`.
Splits split_pairs(int n, std::uint64_t seed);

/// Raw (pre-PCA) traces with the flattened weights matrix of the model that produced each.
struct TracePairDataset {
    device::TraceSet traces;
    Eigen::MatrixXd matrices; // one flattened (row-major) weights matrix per row
    std::vector<double> surrogate_accuracy;
    nn::Topology topology;
    std::string fixed_input_digest;
    std::string pca_digest; // set once a PCA has been fitted on these traces
    Splits splits;

    int size() const { return static_cast<int>(matrices.rows()); }
    Eigen::MatrixXd trace_matrix() const;
    codec::WeightsMatrix matrix(int i) const;
};

/// For every chunk and repetition: train a fresh surrogate, capture one trace on the fixed
/// input, encode its coefficients. `round` feeds the seed derivation so each outer iteration
/// of phase 1 draws new surrogates and noise. Pair count is |sub| * r.
TracePairDataset prepare_pairs(const std::vector<data::LabeledDataset>& sub, int r, const PipelineConfig& cfg,
                               const device::FixedInput& fixed_input, int round = 1);

struct IterationRecord {
    int iteration = 0;
    int pairs = 0;
    int epochs = 0;
    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;
    double mean_surrogate_accuracy = 0.0;
    bool reached_threshold = false;
};

struct Phase1Result {
    ednn::EdnnModel ednn;
    prep::PcaModel pca;
    prep::Standardizer standardizer;
    TracePairDataset pairs; // from the last iteration
    std::vector<IterationRecord> history;
    std::vector<double> validation_curve; // concatenated over iterations
    bool reached_threshold = false;
    /// Set when the chunks ran out below theta.
    bool below_threshold() const { return !reached_threshold; }
};

/// Fixed input shared by both capture phases.
device::FixedInput phase_fixed_input(const PipelineConfig& cfg);

/// Outer loop: one more chunk per iteration, pairs regenerated for all included chunks, PCA
/// and standardizer refitted, EDNN trained from its previous parameters. Stops at theta or
/// when the chunks are exhausted (the result then reports below_threshold()).
Phase1Result run_phase1(const PipelineConfig& cfg, const std::vector<data::LabeledDataset>& chunks,
                        const device::FixedInput& fixed_input);

/// Digests recorded in phase 1 that phase 2 must reproduce.
struct Phase1Fingerprint {
    std::string fixed_input_digest;
    std::string pca_digest;
};

/// One trace of the target, reduced and standardized with the phase-1 fit, decoded by the EDNN.
/// `capture_seed` seeds the device noise of this single capture.
codec::WeightsMatrix run_phase2(ednn::EdnnModel& ednn, const prep::PcaModel& pca, const prep::Standardizer& stats,
                                const nn::MlpModel& target, const device::FixedInput& fixed_input,
                                const device::DeviceConfig& device, const Phase1Fingerprint& expected,
                                std::uint64_t capture_seed);
/// Phase 2 from an already captured trace.
codec::WeightsMatrix extract_from_trace(ednn::EdnnModel& ednn, const prep::PcaModel& pca,
                                        const prep::Standardizer& stats, const std::vector<float>& trace,
                                        const nn::Topology& topology);

/// `pairs/` trace container plus `pairs/matrices.f64` and `pairs/pairs.json`.
void save_pairs(const std::filesystem::path& dir, const TracePairDataset& pairs, const std::string& config_digest);
TracePairDataset load_pairs(const std::filesystem::path& dir);

} // namespace p2w::pipeline

namespace p2w::pipeline {

/// Phase-1 outputs as laid out in a run directory: `fixed_input.json`, `pairs/`, `pca.*`,
/// `ednn.*`, and `phase1.json` (standardizer, iteration history, digests).
void save_phase1(const std::filesystem::path& dir, Phase1Result& result, const device::FixedInput& fixed_input,
                 const std::string& config_digest, const std::string& phase1_digest);
/// Reloads what phase 2 needs; `pairs` stays empty unless `with_pairs`.
Phase1Result load_phase1(const std::filesystem::path& dir, device::FixedInput& fixed_input, bool with_pairs = false);
bool has_phase1(const std::filesystem::path& dir);
std::string stored_phase1_digest(const std::filesystem::path& dir);

/// Adds "config_digest" to an already written JSON artifact.
void stamp_config_digest(const std::filesystem::path& json_file, const std::string& config_digest);

Json to_json(const IterationRecord& r);

} // namespace p2w::pipeline

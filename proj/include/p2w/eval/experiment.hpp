#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "p2w/data/dataset.hpp"
#include "p2w/pipeline/classifier.hpp"
#include "p2w/pipeline/config.hpp"

namespace p2w::eval {

struct VariantRun {
    double accuracy = 0.0;
    double f1 = 0.0;
    std::optional<int> overfit_epoch;
    pipeline::Curves curves;
};

/// Small-only and full-P2W fine-tuning on one D_small draw.
struct ModeRun {
    data::SampleMode mode = data::SampleMode::Balanced;
    std::vector<int> class_counts;
    std::optional<int> skewed_class;
    VariantRun small_only;
    VariantRun p2w;
};

struct SeedRun {
    std::uint64_t seed = 0;
    double acc_target = 0.0;
    double f1_target = 0.0;
    double acc_init_only = 0.0;
    double f1_init_only = 0.0;
    double extraction_accuracy = 0.0; // ednn accuracy of the extracted matrix against the target's
    std::vector<ModeRun> modes;

    const ModeRun* find(data::SampleMode m) const;
};

struct TaskReport {
    std::string task;
    std::vector<pipeline::IterationRecord> phase1;
    bool phase1_reached_threshold = false;
    std::vector<SeedRun> seeds;
};

struct ExperimentReport {
    std::string config_digest;
    std::vector<TaskReport> tasks;
};

/// Seeds the experiment evaluates for a task, derived from the master seed.
std::vector<std::uint64_t> experiment_seeds(const pipeline::RunConfig& cfg, const std::string& task);

/// Curve the overfitting point is read from.
const std::vector<double>& overfit_curve(const pipeline::Curves& curves);

/// One seed of the protocol: train the target, extract its matrix from one trace, then score
/// small-only, init-only, full P2W and the target on a shared held-out test set.
SeedRun run_seed(const pipeline::RunConfig& cfg, const data::TaskPreset& preset, pipeline::Phase1Result& phase1,
                 const device::FixedInput& fixed_input, std::uint64_t seed);

/// Phase 1 loaded from `task_dir` when present with the same config digest, otherwise built
/// there when `build_missing` (and rejected when not).
pipeline::Phase1Result ensure_phase1(const pipeline::RunConfig& cfg, const data::TaskPreset& preset,
                                     const std::filesystem::path& task_dir, bool build_missing,
                                     device::FixedInput& fixed_input);

TaskReport run_experiment(const pipeline::RunConfig& cfg, const std::string& task, const std::filesystem::path& out,
                          bool build_missing = true);
ExperimentReport run_experiments(const pipeline::RunConfig& cfg, const std::filesystem::path& out,
                                 bool build_missing = true);

/// Mean of a per-seed statistic.
struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
};
Summary summarize(const std::vector<double>& values);

Json to_json(const ExperimentReport& r);
/// report.json, summary.csv and curves.csv under `out`.
void write_report(const std::filesystem::path& out, const ExperimentReport& r);

} // namespace p2w::eval

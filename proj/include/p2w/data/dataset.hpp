#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "p2w/common/json_io.hpp"

namespace p2w::data {

/// Per-column min-max scaling recorded when features were mapped to [0, 1].
struct ScalingStats {
    std::vector<double> min;
    std::vector<double> max;
};

struct LabeledDataset {
    Eigen::MatrixXd samples; // N x d
    std::vector<int> labels; // N entries in [0, class_count)
    std::string name;
    int class_count = 0;
    std::optional<ScalingStats> scaling;
    /// Set by sample_dsmall in imbalanced mode.
    std::optional<int> skewed_class;

    int size() const { return static_cast<int>(labels.size()); }
    int features() const { return static_cast<int>(samples.cols()); }

    /// N >= C, every class present, labels in range, features finite.
    void validate() const;
    std::vector<int> class_counts() const;
    LabeledDataset subset(const std::vector<int>& rows, const std::string& suffix = "") const;
    /// N x out targets: a 0/1 column for two classes with a sigmoid head, one-hot rows otherwise.
    Eigen::MatrixXd targets(int output_width) const;
    std::string digest() const;
};

/// Stratified partition into `chunk_count` disjoint chunks whose sizes differ by at most one.
std::vector<LabeledDataset> chunk(const LabeledDataset& dataset, int chunk_count);

enum class SampleMode { Balanced, Imbalanced2x };

SampleMode sample_mode_from_string(const std::string& s);
std::string to_string(SampleMode m);

/// Small fine-tuning set. Balanced: equal per-class counts (remainder to the lowest classes).
/// Imbalanced2x: one seed-chosen class gets twice the per-class count of every other class.
LabeledDataset sample_dsmall(const LabeledDataset& dataset, int size, SampleMode mode, std::uint64_t seed);

/// Stratified split: roughly `first_fraction` of each class goes to the first part.
std::pair<std::vector<int>, std::vector<int>> stratified_split(const LabeledDataset& dataset, double first_fraction,
                                                               std::uint64_t seed);

/// `data.json` (name, d, C, N, scaling) + `data.f32` (row-major features followed by labels).
void save_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset);
LabeledDataset load_dataset(const std::filesystem::path& dir);

} // namespace p2w::data

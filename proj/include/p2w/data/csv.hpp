#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "p2w/data/dataset.hpp"

namespace p2w::data {

/// Reads a rectangular numeric CSV with a header row. The label column holds non-negative
/// integers; the remaining columns are min-max scaled to [0, 1] (constant columns become 0).
/// With `class_count`, labels at or above it are rejected as unseen.
LabeledDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                        std::optional<int> class_count = std::nullopt);

/// Canonical form: header f0..f{d-1},label, full-precision values.
void write_csv(const std::filesystem::path& path, const LabeledDataset& dataset);

} // namespace p2w::data

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

namespace p2w {

using Json = nlohmann::json;

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

/// Flat little-endian binary arrays.
void write_f32(const std::filesystem::path& path, std::span<const float> values);
void write_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<float> read_f32(const std::filesystem::path& path);
std::vector<double> read_f64(const std::filesystem::path& path);

/// Digest of the canonical (sorted-key, compact) serialization.
std::string json_digest(const Json& doc);

} // namespace p2w

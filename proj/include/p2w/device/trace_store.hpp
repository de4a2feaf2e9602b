#pragma once

#include <filesystem>
#include <vector>

#include "p2w/common/json_io.hpp"

namespace p2w::device {

/// Rows of equal-length traces as written to disk: `meta.json` + `traces.f32`
/// (little-endian float32, row-major, one row per trace).
struct TraceSet {
    Json meta;
    std::size_t trace_length = 0;
    std::vector<float> samples;

    std::size_t trace_count() const { return trace_length == 0 ? 0 : samples.size() / trace_length; }
    std::span<const float> row(std::size_t i) const { return {samples.data() + i * trace_length, trace_length}; }
    void append(std::span<const float> trace);
};

void write_trace_set(const std::filesystem::path& dir, const TraceSet& set);
TraceSet read_trace_set(const std::filesystem::path& dir);

} // namespace p2w::device

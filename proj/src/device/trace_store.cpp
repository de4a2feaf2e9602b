#include "p2w/device/trace_store.hpp"

#include "p2w/common/error.hpp"

namespace p2w::device {

void TraceSet::append(std::span<const float> trace) {
    if (samples.empty() && trace_length == 0) trace_length = trace.size();
    if (trace.size() != trace_length) {
        throw ShapeError("trace of length " + std::to_string(trace.size()) + " added to a set of length " +
                         std::to_string(trace_length));
    }
    samples.insert(samples.end(), trace.begin(), trace.end());
}

void write_trace_set(const std::filesystem::path& dir, const TraceSet& set) {
    std::filesystem::create_directories(dir);
    Json meta = set.meta;
    meta["trace_length"] = set.trace_length;
    meta["trace_count"] = set.trace_count();
    write_json(dir / "meta.json", meta);
    write_f32(dir / "traces.f32", set.samples);
}

TraceSet read_trace_set(const std::filesystem::path& dir) {
    TraceSet set;
    set.meta = read_json(dir / "meta.json");
    set.trace_length = set.meta.at("trace_length").get<std::size_t>();
    set.samples = read_f32(dir / "traces.f32");
    const auto count = set.meta.at("trace_count").get<std::size_t>();
    if (set.samples.size() != count * set.trace_length) {
        throw ValidationError(dir.string() + ": traces.f32 holds " + std::to_string(set.samples.size()) +
                              " samples, meta.json promises " + std::to_string(count) + "x" +
                              std::to_string(set.trace_length));
    }
    return set;
}

} // namespace p2w::device

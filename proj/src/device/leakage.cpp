#include "p2w/device/leakage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace p2w::device {

std::uint32_t to_fixed_point(double value, int total_bits, int fraction_bits) {
    const double scaled = std::nearbyint(std::ldexp(value, fraction_bits));
    const double max_code = std::ldexp(1.0, total_bits - 1) - 1.0;
    const double min_code = -std::ldexp(1.0, total_bits - 1);
    const auto code = static_cast<std::int64_t>(std::clamp(scaled, min_code, max_code));
    const std::uint64_t mask = (total_bits >= 32) ? 0xffffffffULL : ((1ULL << total_bits) - 1);
    return static_cast<std::uint32_t>(static_cast<std::uint64_t>(code) & mask);
}

int hamming_weight(std::uint32_t word) { return std::popcount(word); }

double quantize_sample(double raw, int adc_bits, double lo, double hi) {
    const double levels = std::ldexp(1.0, adc_bits) - 1.0;
    const double step = (hi - lo) / levels;
    const double clamped = std::clamp(raw, lo, hi);
    const double index = std::nearbyint((clamped - lo) / step);
    return index >= levels ? hi : lo + index * step;
}

std::vector<double> quantize_trace(std::span<const double> raw, int adc_bits, double lo, double hi) {
    std::vector<double> out(raw.size());
    std::transform(raw.begin(), raw.end(), out.begin(),
                   [&](double v) { return quantize_sample(v, adc_bits, lo, hi); });
    return out;
}

} // namespace p2w::device

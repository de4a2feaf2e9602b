#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace p2w::device {

/// Two's-complement encoding of round(value * 2^fraction_bits), saturated to `total_bits`
/// and returned in the low `total_bits` bits.
std::uint32_t to_fixed_point(double value, int total_bits, int fraction_bits);

int hamming_weight(std::uint32_t word);

/// Hamming weight of the fixed-point encoding of `value`.
inline int leakage_weight(double value, int total_bits, int fraction_bits) {
    return hamming_weight(to_fixed_point(value, total_bits, fraction_bits));
}

/// ADC model: clamp to [lo, hi], round to the nearest of 2^bits uniform levels, return the level value.
double quantize_sample(double raw, int adc_bits, double lo, double hi);
std::vector<double> quantize_trace(std::span<const double> raw, int adc_bits, double lo, double hi);

} // namespace p2w::device

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace p2w {

/// 64-bit FNV-1a accumulator; digests identify configs, inputs and fitted models.
class Digest {
public:
    Digest& bytes(const void* data, std::size_t size);
    Digest& text(std::string_view s) { return bytes(s.data(), s.size()); }
    Digest& u64(std::uint64_t v) { return bytes(&v, sizeof v); }
    Digest& reals(std::span<const double> v) { return bytes(v.data(), v.size_bytes()); }
    Digest& ints(std::span<const int> v) { return bytes(v.data(), v.size_bytes()); }

    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string digest_hex(std::string_view s);

} // namespace p2w

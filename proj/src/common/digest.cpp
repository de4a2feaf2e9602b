#include "p2w/common/digest.hpp"

#include <cstdio>

namespace p2w {

Digest& Digest::bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state_ ^= p[i];
        state_ *= 0x100000001b3ULL;
    }
    return *this;
}

std::string Digest::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

std::string digest_hex(std::string_view s) { return Digest{}.text(s).hex(); }

} // namespace p2w

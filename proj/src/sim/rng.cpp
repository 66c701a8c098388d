#include "probesense/sim/rng.hpp"

#include <limits>
#include <stdexcept>

namespace probesense::sim {

SimRng::SimRng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

std::int64_t SimRng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
    // Rejection sampling on the largest multiple of span.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
}

Bytes SimRng::bytes(std::size_t n) {
    Bytes out(n);
    for (std::size_t i = 0; i < n; i += 8) {
        auto v = engine_();
        for (std::size_t j = i; j < n && j < i + 8; ++j) {
            out[j] = static_cast<std::uint8_t>(v);
            v >>= 8;
        }
    }
    return out;
}

MacAddress SimRng::random_local_mac() {
    auto v = engine_();
    MacAddress::Octets o{};
    for (auto& b : o) {
        b = static_cast<std::uint8_t>(v);
        v >>= 8;
    }
    o[0] = static_cast<std::uint8_t>((o[0] & 0xfc) | 0x02);
    return MacAddress(o);
}

MacAddress SimRng::random_mac_with_oui(std::uint32_t oui) {
    auto v = engine_();
    MacAddress::Octets o{static_cast<std::uint8_t>(oui >> 16), static_cast<std::uint8_t>(oui >> 8),
                         static_cast<std::uint8_t>(oui), static_cast<std::uint8_t>(v),
                         static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v >> 16)};
    return MacAddress(o);
}

}  // namespace probesense::sim

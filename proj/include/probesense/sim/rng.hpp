#pragma once

#include <cstdint>
#include <random>

#include "probesense/core/bytes.hpp"
#include "probesense/core/mac_address.hpp"

namespace probesense::sim {

/// mt19937_64 with distribution code written out by hand: the standard
/// <random> distributions are implementation-defined, this is not, so a seed
/// reproduces the same stream on every toolchain.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}
    /// Independent stream for sub-entity `stream` of a run seeded with `seed`.
    SimRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [lo, hi] (inclusive), unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    Bytes bytes(std::size_t n);
    /// Locally administered unicast address with 46 random bits.
    MacAddress random_local_mac();
    /// Burned-in address under a vendor OUI.
    MacAddress random_mac_with_oui(std::uint32_t oui);

private:
    std::mt19937_64 engine_;
};

}  // namespace probesense::sim

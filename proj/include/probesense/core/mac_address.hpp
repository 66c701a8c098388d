#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace probesense {

/// 48-bit IEEE 802 MAC address.
class MacAddress {
public:
    using Octets = std::array<std::uint8_t, 6>;

    constexpr MacAddress() = default;
    constexpr explicit MacAddress(const Octets& octets) : octets_(octets) {}

    /// Accepts `AA:BB:CC:DD:EE:FF` or `AA-BB-CC-DD-EE-FF`, either case.
    static std::optional<MacAddress> parse(std::string_view text);
    /// Like parse() but throws ValidationError.
    static MacAddress from_string(std::string_view text);

    const Octets& octets() const { return octets_; }
    /// First three octets packed big-endian into the low 24 bits.
    std::uint32_t oui() const {
        return (std::uint32_t{octets_[0]} << 16) | (std::uint32_t{octets_[1]} << 8) | octets_[2];
    }

    /// Bit 0 of octet 0 (I/G bit).
    constexpr bool is_group() const { return (octets_[0] & 0x01) != 0; }
    /// Bit 1 of octet 0 (U/L bit).
    constexpr bool is_locally_administered() const { return (octets_[0] & 0x02) != 0; }
    /// Locally administered unicast.
    constexpr bool is_randomized() const { return is_locally_administered() && !is_group(); }

    /// Canonical form: 17 chars, uppercase, colon separated.
    std::string to_string() const;

    friend constexpr auto operator<=>(const MacAddress&, const MacAddress&) = default;

private:
    Octets octets_{};
};

enum class MacClass { Randomized, BurnedIn };

constexpr MacClass classify_mac(const MacAddress& mac) {
    return mac.is_randomized() ? MacClass::Randomized : MacClass::BurnedIn;
}

const char* to_string(MacClass c);

}  // namespace probesense

template <>
struct std::hash<probesense::MacAddress> {
    std::size_t operator()(const probesense::MacAddress& mac) const noexcept {
        std::uint64_t v = 0;
        for (auto o : mac.octets()) v = (v << 8) | o;
        return std::hash<std::uint64_t>{}(v);
    }
};

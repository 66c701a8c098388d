#include "probesense/core/mac_address.hpp"

#include "probesense/core/errors.hpp"

namespace probesense {

namespace {

int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::optional<MacAddress> MacAddress::parse(std::string_view text) {
    if (text.size() != 17) return std::nullopt;
    const char sep = text[2];
    if (sep != ':' && sep != '-') return std::nullopt;
    Octets o{};
    for (std::size_t i = 0; i < 6; ++i) {
        const std::size_t p = i * 3;
        if (i > 0 && text[p - 1] != sep) return std::nullopt;
        const int hi = nibble(text[p]);
        const int lo = nibble(text[p + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        o[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return MacAddress(o);
}

MacAddress MacAddress::from_string(std::string_view text) {
    if (auto mac = parse(text)) return *mac;
    throw ValidationError("mac", "not a MAC address: '" + std::string(text) + "'");
}

std::string MacAddress::to_string() const {
    static constexpr char kDigits[] = "0123456789ABCDEF";
    std::string out(17, ':');
    for (std::size_t i = 0; i < 6; ++i) {
        out[i * 3] = kDigits[octets_[i] >> 4];
        out[i * 3 + 1] = kDigits[octets_[i] & 0x0f];
    }
    return out;
}

const char* to_string(MacClass c) { return c == MacClass::Randomized ? "randomized" : "burned-in"; }

}  // namespace probesense

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace probesense {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView bytes);
/// Accepts upper or lower case; throws std::invalid_argument on odd length or
/// non-hex characters.
Bytes from_hex(std::string_view hex);

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view text);

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace probesense

#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "probesense/core/bytes.hpp"

namespace probesense {

/// md5 digest of a probe's information elements, as 32 lowercase hex chars.
class IeFingerprint {
public:
    IeFingerprint() = default;

    /// Throws ValidationError unless `hex` is exactly 32 lowercase hex chars.
    static IeFingerprint from_hex(std::string_view hex);

    const std::string& hex() const { return hex_; }
    bool empty() const { return hex_.empty(); }

    friend auto operator<=>(const IeFingerprint&, const IeFingerprint&) = default;

private:
    explicit IeFingerprint(std::string hex) : hex_(std::move(hex)) {}
    friend IeFingerprint fingerprint(ByteView, ByteView);

    std::string hex_;
};

/// md5(ie_bytes || vendor_ie_bytes). No separator; either input may be empty.
IeFingerprint fingerprint(ByteView ie_bytes, ByteView vendor_ie_bytes);

}  // namespace probesense

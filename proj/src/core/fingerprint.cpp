#include "probesense/core/fingerprint.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

#include "probesense/core/errors.hpp"

namespace probesense {

IeFingerprint IeFingerprint::from_hex(std::string_view hex) {
    if (hex.size() != 32) throw ValidationError("ie_fingerprint", "expected 32 hex chars");
    for (char c : hex) {
        const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!ok) throw ValidationError("ie_fingerprint", "expected lowercase hex");
    }
    return IeFingerprint(std::string(hex));
}

IeFingerprint fingerprint(ByteView ie_bytes, ByteView vendor_ie_bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_md5(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), ie_bytes.data(), ie_bytes.size()) != 1 ||
        EVP_DigestUpdate(ctx.get(), vendor_ie_bytes.data(), vendor_ie_bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw std::runtime_error("md5 digest failed");
    }
    return IeFingerprint(to_hex({digest, len}));
}

}  // namespace probesense

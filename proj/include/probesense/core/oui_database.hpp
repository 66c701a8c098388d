#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <set>
#include <string>
#include <unordered_map>

#include "probesense/core/mac_address.hpp"

namespace probesense {

inline constexpr std::string_view kUnknownVendor = "unknown";

/// OUI prefix -> vendor name, plus the vendors treated as phone makers.
/// Read-only after load.
class OuiDatabase {
public:
    OuiDatabase() = default;

    /// Lines `XX:YY:ZZ,VendorName`; blank lines and `#` comments skipped.
    /// Throws ValidationError("oui:<line>") on a malformed line.
    static OuiDatabase from_csv(std::istream& oui_csv);
    static OuiDatabase load(const std::filesystem::path& oui_csv,
                            const std::filesystem::path& mobile_vendor_list);
    /// Small bundled table covering the simulator's phone vendors.
    static const OuiDatabase& builtin();

    /// One vendor name per line, exact match; `#` comments skipped.
    void load_mobile_vendors(std::istream& in);

    void add(std::uint32_t oui, std::string vendor);
    void add_mobile_vendor(std::string vendor) { mobile_vendors_.insert(std::move(vendor)); }

    /// Exact prefix match; kUnknownVendor when absent.
    std::string lookup_prefix(std::uint32_t oui) const;
    bool is_mobile(const std::string& vendor) const { return mobile_vendors_.contains(vendor); }

    std::size_t size() const { return entries_.size(); }
    const std::set<std::string>& mobile_vendors() const { return mobile_vendors_; }

private:
    std::unordered_map<std::uint32_t, std::string> entries_;
    std::set<std::string> mobile_vendors_;
};

/// Vendor for a burned-in address; randomized addresses never consult the db.
std::string vendor_lookup(const OuiDatabase& db, const MacAddress& mac);

/// Randomized addresses are always retained; burned-in ones only for
/// allowlisted vendors.
bool is_mobile_vendor(const OuiDatabase& db, const MacAddress& mac);

}  // namespace probesense

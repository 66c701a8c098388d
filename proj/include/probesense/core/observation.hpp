#pragma once

#include <string>
#include <vector>

#include "probesense/core/bytes.hpp"
#include "probesense/core/mac_address.hpp"
#include "probesense/core/time.hpp"

namespace probesense {

/// One captured probe request as delivered by the capture layer.
struct ProbeObservation {
    MacAddress mac;
    int rssi_dbm = 0;
    std::vector<std::string> ssids;  ///< previously connected networks, deduplicated
    Bytes ie_bytes;
    Bytes vendor_ie_bytes;
    EpochMs captured_at = 0;
    std::string scanner_id;

    friend bool operator==(const ProbeObservation&, const ProbeObservation&) = default;
};

/// captured_at > 0 and a non-empty scanner id.
bool is_well_formed(const ProbeObservation& obs);

/// Removes duplicates, keeping the first occurrence of each name.
std::vector<std::string> dedup_ssids(std::vector<std::string> ssids);

/// Appends names from `extra` not already in `into`.
void union_ssids(std::vector<std::string>& into, const std::vector<std::string>& extra);

}  // namespace probesense

#include "probesense/core/observation.hpp"

#include <algorithm>

namespace probesense {

bool is_well_formed(const ProbeObservation& obs) { return obs.captured_at > 0 && !obs.scanner_id.empty(); }

std::vector<std::string> dedup_ssids(std::vector<std::string> ssids) {
    std::vector<std::string> out;
    out.reserve(ssids.size());
    union_ssids(out, ssids);
    return out;
}

void union_ssids(std::vector<std::string>& into, const std::vector<std::string>& extra) {
    for (const auto& s : extra) {
        if (std::find(into.begin(), into.end(), s) == into.end()) into.push_back(s);
    }
}

}  // namespace probesense

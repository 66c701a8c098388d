#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "probesense/collector/archive.hpp"

namespace probesense::journey {

inline constexpr EpochMs kDefaultGapThresholdMs = 300'000;

/// Burned-in MACs identify a device directly; randomized ones fall back to
/// the IE fingerprint.
struct DeviceKey {
    enum class Kind { Mac, Fingerprint };
    Kind kind = Kind::Mac;
    std::string value;

    std::string to_string() const;
    friend auto operator<=>(const DeviceKey&, const DeviceKey&) = default;
};

struct Visit {
    std::string scanner_id;
    EpochMs first_seen = 0;
    EpochMs last_seen = 0;

    friend bool operator==(const Visit&, const Visit&) = default;
};

struct Trajectory {
    DeviceKey key;
    std::vector<Visit> visits;
    /// Same fingerprint present at two scanners at once; never counted in flows.
    bool ambiguous = false;
};

/// Groups records per device key and turns each group into visits. Records
/// at one scanner at most `gap_threshold_ms` apart form one visit; a longer
/// silence at the same scanner starts a new trajectory for the same key.
/// Output is ordered by key, then by first visit.
std::vector<Trajectory> build_trajectories(std::vector<collector::ArchiveRecord> records,
                                           EpochMs gap_threshold_ms = kDefaultGapThresholdMs);

struct FlowMatrix {
    EpochMs from = 0;
    EpochMs to = 0;
    std::map<std::pair<std::string, std::string>, std::uint64_t> flows;
    std::uint64_t ambiguous_devices = 0;

    std::uint64_t total() const;
    friend bool operator==(const FlowMatrix&, const FlowMatrix&) = default;
};

/// A move between consecutive visits counts when the second visit starts
/// in [from, to). Ambiguous keys with any visit in the window are counted once.
FlowMatrix flows(const std::vector<Trajectory>& trajectories, EpochMs from, EpochMs to);

/// `{"nodes":[{"id"}],"links":[{"source","target","value"}]}`, sorted.
nlohmann::json sankey_export(const FlowMatrix& m);
/// Inverse of sankey_export for the flow counts. Throws ValidationError.
FlowMatrix sankey_import(const nlohmann::json& doc);

}  // namespace probesense::journey

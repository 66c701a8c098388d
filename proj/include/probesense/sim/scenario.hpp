#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "probesense/core/bytes.hpp"
#include "probesense/core/mac_address.hpp"
#include "probesense/core/time.hpp"
#include "probesense/sim/profile.hpp"

namespace probesense::sim {

struct ScannerZone {
    std::string scanner_id;
    std::string zone_id;
};

/// Presence of a device in a zone over [enter, exit), offsets from scenario start.
struct ItineraryStop {
    std::string zone_id;
    EpochMs enter_ms = 0;
    EpochMs exit_ms = 0;
};

struct ScreenChange {
    EpochMs at_ms = 0;
    ScreenState state = ScreenState::DisplayOff;
};

struct SimulatedDevice {
    std::string device_id;  ///< ground truth only, never visible to estimators
    DeviceProfile profile;
    MacAddress burned_in_mac;
    Bytes session_ie;         ///< IE bytes of the first power session
    Bytes vendor_ie;          ///< vendor-specific elements, fixed per device
    bool fixed_session_ie = false;  ///< session_ie pinned in the scenario (survives power cycles)
    std::vector<std::string> ssids;
    std::vector<ScreenChange> screen_schedule;  ///< sorted; state before the first entry is DisplayOff
    std::vector<ItineraryStop> itinerary;
    std::vector<EpochMs> power_cycles_ms;

    ScreenState screen_at(EpochMs offset_ms) const;
    /// Zone at `offset_ms`, or nullptr when between stops.
    const ItineraryStop* stop_at(EpochMs offset_ms) const;
};

struct Scenario {
    std::uint64_t seed = 0;
    EpochMs start_epoch_ms = 1'600'000'000'000;
    EpochMs duration_ms = 0;
    std::vector<ScannerZone> scanners;
    std::vector<SimulatedDevice> devices;

    EpochMs end_epoch_ms() const { return start_epoch_ms + duration_ms; }
    /// scanner_id covering a zone, or empty string.
    std::string scanner_for_zone(const std::string& zone_id) const;

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// Parses the scenario document (schema in docs/scenario-format.md).
/// Missing MACs and IEs are drawn from the scenario seed.
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace probesense::sim

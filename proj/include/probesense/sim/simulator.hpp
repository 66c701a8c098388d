#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "probesense/core/observation.hpp"
#include "probesense/sim/scenario.hpp"

namespace probesense::sim {

struct Transition {
    std::string device_id;
    std::string from_zone;
    std::string to_zone;
    EpochMs at = 0;  ///< epoch ms when the device entered to_zone

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Simulator-side record of one probe event, observed or not.
struct ProbeEvent {
    std::string device_id;
    EpochMs at = 0;
    int packets = 0;
    MacAddress mac;
    std::string ie_fingerprint;
    ScreenState screen = ScreenState::DisplayOff;
    std::string scanner_id;  ///< empty when outside every scanner zone
};

/// What actually happened, for scoring estimators.
class GroundTruth {
public:
    GroundTruth() = default;
    explicit GroundTruth(const Scenario& scenario);

    std::set<std::string> occupancy(const std::string& zone_id, EpochMs at) const;
    std::size_t occupancy_count(const std::string& zone_id, EpochMs at) const;
    /// Epoch times at which any itinerary boundary (enter/exit) occurs.
    std::vector<EpochMs> boundaries() const;

    const std::vector<Transition>& transitions() const { return transitions_; }
    const std::vector<ProbeEvent>& events() const { return events_; }
    /// MAC string -> device_id for every address a device used.
    const std::map<std::string, std::string>& mac_owner() const { return mac_owner_; }

    /// Directed scanner-to-scanner moves: per device, the sequence of scanner
    /// zones visited (unmonitored stops skipped, repeats collapsed) and its
    /// consecutive pairs.
    std::map<std::pair<std::string, std::string>, std::uint64_t> scanner_flows(const Scenario& s,
                                                                                EpochMs from,
                                                                                EpochMs to) const;

    nlohmann::json to_json() const;

private:
    friend class Simulator;
    struct Interval {
        std::string device_id;
        std::string zone_id;
        EpochMs enter = 0, exit = 0;  // epoch ms, [enter, exit)
    };
    std::vector<Interval> intervals_;
    std::vector<Transition> transitions_;
    std::vector<ProbeEvent> events_;
    std::map<std::string, std::string> mac_owner_;
};

struct SimulationOutput {
    std::vector<ProbeObservation> observations;  ///< ordered by captured_at
    GroundTruth truth;
};

/// Burst window in which the packets of one probe event are spread.
inline constexpr EpochMs kBurstWindowMs = 2000;

/// Runs the scenario. Same scenario (including seed) => identical output.
SimulationOutput run_scenario(const Scenario& scenario);

}  // namespace probesense::sim

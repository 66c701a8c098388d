#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "probesense/core/observation.hpp"
#include "probesense/sim/scenario.hpp"

namespace probesense::sim {

struct ExperimentRow {
    EpochMs event_time_ms = 0;
    int packets = 0;
    std::optional<double> gap_s;  ///< empty for the first event
};

struct ExperimentReport {
    std::string device_id;
    std::vector<ExperimentRow> rows;

    /// Header `event_time_ms,packets,gap_s`; first gap left empty.
    void write_csv(std::ostream& out) const;
};

/// Clusters a single device's packets into probe events: a packet starts a
/// new event when it is at least `burst_window_ms` after the current event's
/// first packet.
ExperimentReport emit_experiment_report(std::span<const ProbeObservation> observations,
                                        std::string device_id, EpochMs burst_window_ms = 2000);

/// One device of the given model held in one scanner zone with a fixed
/// screen state for `duration_ms`.
Scenario phone_experiment_scenario(const std::string& model, ScreenState screen, EpochMs duration_ms,
                                   std::uint64_t seed);

/// Runs phone_experiment_scenario and clusters the captured packets.
ExperimentReport run_phone_experiment(const std::string& model, ScreenState screen, EpochMs duration_ms,
                                      std::uint64_t seed);

}  // namespace probesense::sim

#include "probesense/sim/experiment_report.hpp"

#include <algorithm>
#include <cstdio>

#include "probesense/sim/simulator.hpp"

namespace probesense::sim {

ExperimentReport emit_experiment_report(std::span<const ProbeObservation> observations, std::string device_id,
                                        EpochMs burst_window_ms) {
    std::vector<EpochMs> times;
    times.reserve(observations.size());
    for (const auto& o : observations) times.push_back(o.captured_at);
    std::sort(times.begin(), times.end());

    ExperimentReport report;
    report.device_id = std::move(device_id);
    for (const auto t : times) {
        if (!report.rows.empty() && t - report.rows.back().event_time_ms < burst_window_ms) {
            ++report.rows.back().packets;
            continue;
        }
        ExperimentRow row;
        row.event_time_ms = t;
        row.packets = 1;
        if (!report.rows.empty()) row.gap_s = (t - report.rows.back().event_time_ms) / 1000.0;
        report.rows.push_back(row);
    }
    return report;
}

void ExperimentReport::write_csv(std::ostream& out) const {
    out << "event_time_ms,packets,gap_s\n";
    for (const auto& r : rows) {
        out << r.event_time_ms << ',' << r.packets << ',';
        if (r.gap_s) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", *r.gap_s);
            out << buf;
        }
        out << '\n';
    }
}

Scenario phone_experiment_scenario(const std::string& model, ScreenState screen, EpochMs duration_ms,
                                   std::uint64_t seed) {
    nlohmann::json doc = {{"seed", seed},
                          {"duration_s", duration_ms / 1000.0},
                          {"scanners", {{{"scanner_id", "bench"}, {"zone_id", "bench"}}}},
                          {"devices",
                           {{{"device_id", "phone"},
                             {"profile", model},
                             {"screen", {{{"at_s", 0}, {"state", to_string(screen)}}}},
                             {"itinerary", nlohmann::json::array()}}}}};
    if (duration_ms > 0) {
        doc["devices"][0]["itinerary"].push_back({{"zone_id", "bench"}, {"enter_s", 0}, {"exit_s", duration_ms / 1000.0}});
    }
    return scenario_from_json(doc);
}

ExperimentReport run_phone_experiment(const std::string& model, ScreenState screen, EpochMs duration_ms,
                                      std::uint64_t seed) {
    const auto out = run_scenario(phone_experiment_scenario(model, screen, duration_ms, seed));
    return emit_experiment_report(out.observations, "phone");
}

}  // namespace probesense::sim

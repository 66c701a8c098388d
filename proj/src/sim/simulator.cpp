#include "probesense/sim/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "probesense/core/fingerprint.hpp"
#include "probesense/sim/interval_distribution.hpp"

namespace probesense::sim {

namespace {

constexpr int kRssiBaseDbm = -60;
constexpr int kRssiNoiseDbm = 5;

struct Tagged {
    ProbeObservation obs;
    std::size_t device_index;
    std::size_t seq;
};

}  // namespace

GroundTruth::GroundTruth(const Scenario& scenario) {
    for (const auto& d : scenario.devices) {
        for (std::size_t k = 0; k < d.itinerary.size(); ++k) {
            const auto& stop = d.itinerary[k];
            intervals_.push_back({d.device_id, stop.zone_id, scenario.start_epoch_ms + stop.enter_ms,
                                  scenario.start_epoch_ms + stop.exit_ms});
            if (k > 0) {
                transitions_.push_back({d.device_id, d.itinerary[k - 1].zone_id, stop.zone_id,
                                        scenario.start_epoch_ms + stop.enter_ms});
            }
        }
    }
    std::stable_sort(transitions_.begin(), transitions_.end(),
                     [](const Transition& a, const Transition& b) { return a.at < b.at; });
}

std::set<std::string> GroundTruth::occupancy(const std::string& zone_id, EpochMs at) const {
    std::set<std::string> out;
    for (const auto& iv : intervals_) {
        if (iv.zone_id == zone_id && at >= iv.enter && at < iv.exit) out.insert(iv.device_id);
    }
    return out;
}

std::size_t GroundTruth::occupancy_count(const std::string& zone_id, EpochMs at) const {
    return occupancy(zone_id, at).size();
}

std::vector<EpochMs> GroundTruth::boundaries() const {
    std::vector<EpochMs> out;
    for (const auto& iv : intervals_) {
        out.push_back(iv.enter);
        out.push_back(iv.exit);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::map<std::pair<std::string, std::string>, std::uint64_t> GroundTruth::scanner_flows(const Scenario& s,
                                                                                         EpochMs from,
                                                                                         EpochMs to) const {
    std::map<std::pair<std::string, std::string>, std::uint64_t> flows;
    for (const auto& d : s.devices) {
        std::string prev;
        for (const auto& stop : d.itinerary) {
            const auto scanner = s.scanner_for_zone(stop.zone_id);
            if (scanner.empty() || scanner == prev) continue;
            const EpochMs at = s.start_epoch_ms + stop.enter_ms;
            if (!prev.empty() && at >= from && at < to) ++flows[{prev, scanner}];
            prev = scanner;
        }
    }
    return flows;
}

nlohmann::json GroundTruth::to_json() const {
    using nlohmann::json;
    json doc = {{"intervals", json::array()}, {"transitions", json::array()}, {"events", json::array()}};
    for (const auto& iv : intervals_) {
        doc["intervals"].push_back(
            {{"device_id", iv.device_id}, {"zone_id", iv.zone_id}, {"enter", iv.enter}, {"exit", iv.exit}});
    }
    for (const auto& t : transitions_) {
        doc["transitions"].push_back(
            {{"device_id", t.device_id}, {"from_zone", t.from_zone}, {"to_zone", t.to_zone}, {"at", t.at}});
    }
    for (const auto& e : events_) {
        doc["events"].push_back({{"device_id", e.device_id},
                                 {"at", e.at},
                                 {"packets", e.packets},
                                 {"mac", e.mac.to_string()},
                                 {"ie_fingerprint", e.ie_fingerprint},
                                 {"screen", to_string(e.screen)},
                                 {"scanner_id", e.scanner_id}});
    }
    return doc;
}

class Simulator {
public:
    static SimulationOutput run(const Scenario& s) {
        s.validate();
        SimulationOutput out;
        out.truth = GroundTruth(s);
        std::vector<Tagged> tagged;

        for (std::size_t i = 0; i < s.devices.size(); ++i) {
            const auto& dev = s.devices[i];
            SimRng rng(s.seed, i + 1);
            std::map<ScreenState, IntervalDistribution> gaps;
            for (const auto& [state, b] : dev.profile.screen_states) {
                gaps.emplace(state, IntervalDistribution::fit(b.interval_min_s, b.interval_mode_s, b.interval_max_s,
                                                              3600.0 / b.events_per_hour));
            }
            auto draw_gap = [&](ScreenState state) {
                const double g = gaps.at(state).sample(rng);
                return std::max(kBurstWindowMs, static_cast<EpochMs>(std::llround(g * 1000.0)));
            };

            Bytes ie = dev.session_ie;
            std::size_t next_cycle = 0;
            std::size_t seq = 0;
            // Random phase: the first event lands uniformly inside one gap.
            EpochMs t = rng.uniform_int(0, draw_gap(dev.screen_at(0)) - 1);
            while (t < s.duration_ms) {
                while (next_cycle < dev.power_cycles_ms.size() && dev.power_cycles_ms[next_cycle] <= t) {
                    if (!dev.fixed_session_ie) ie = rng.bytes(ie.size());
                    ++next_cycle;
                }
                const auto state = dev.screen_at(t);
                const auto& behavior = dev.profile.behavior(state);
                const MacAddress mac =
                    dev.profile.randomization == Randomization::PerEvent ? rng.random_local_mac() : dev.burned_in_mac;
                const EpochMs gap = draw_gap(state);

                std::vector<EpochMs> offsets{0};
                for (int p = 1; p < behavior.packets_per_event; ++p) {
                    offsets.push_back(rng.uniform_int(0, kBurstWindowMs - 1));
                }
                std::sort(offsets.begin(), offsets.end());

                ProbeEvent ev;
                ev.device_id = dev.device_id;
                ev.at = s.start_epoch_ms + t;
                ev.packets = behavior.packets_per_event;
                ev.mac = mac;
                ev.ie_fingerprint = fingerprint(ie, dev.vendor_ie).hex();
                ev.screen = state;
                if (const auto* stop = dev.stop_at(t)) ev.scanner_id = s.scanner_for_zone(stop->zone_id);

                for (const auto off : offsets) {
                    const int rssi = kRssiBaseDbm + static_cast<int>(rng.uniform_int(-kRssiNoiseDbm, kRssiNoiseDbm));
                    const EpochMs pt = t + off;
                    if (pt >= s.duration_ms) continue;
                    const auto* stop = dev.stop_at(pt);
                    if (!stop) continue;
                    auto scanner = s.scanner_for_zone(stop->zone_id);
                    if (scanner.empty()) continue;
                    ProbeObservation obs;
                    obs.mac = mac;
                    obs.rssi_dbm = rssi;
                    obs.ssids = dev.ssids;
                    obs.ie_bytes = ie;
                    obs.vendor_ie_bytes = dev.vendor_ie;
                    obs.captured_at = s.start_epoch_ms + pt;
                    obs.scanner_id = std::move(scanner);
                    tagged.push_back({std::move(obs), i, seq++});
                }
                out.truth.mac_owner_[mac.to_string()] = dev.device_id;
                out.truth.events_.push_back(std::move(ev));
                t += gap;
            }
        }

        std::stable_sort(tagged.begin(), tagged.end(), [](const Tagged& a, const Tagged& b) {
            return a.obs.captured_at < b.obs.captured_at;
        });
        out.observations.reserve(tagged.size());
        for (auto& tg : tagged) out.observations.push_back(std::move(tg.obs));
        std::stable_sort(out.truth.events_.begin(), out.truth.events_.end(),
                         [](const ProbeEvent& a, const ProbeEvent& b) { return a.at < b.at; });
        return out;
    }
};

SimulationOutput run_scenario(const Scenario& scenario) { return Simulator::run(scenario); }

}  // namespace probesense::sim

// Acceptance checks. One line per criterion; exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "probesense/agent/edge_agent.hpp"
#include "probesense/core/bytes.hpp"
#include "probesense/density/density_service.hpp"
#include "probesense/pipeline/pipeline.hpp"
#include "probesense/sim/experiment_report.hpp"
#include "probesense/transport/in_memory_bus.hpp"

namespace fs = std::filesystem;
using namespace probesense;

namespace {

// Pinned tolerances.
constexpr double kRateTolerance = 0.15;
constexpr int kRateSeeds = 20;
constexpr EpochMs kRateHours = 10;
constexpr double kRateRuntimeLimitS = 60.0;
constexpr std::size_t kDensityTolerance = 0;
constexpr double kJourneyRecoveryMin = 0.95;
constexpr double kFailureRate = 0.10;
constexpr double kLifecycleLatencyS = 1.0;

constexpr EpochMs kSecond = 1'000;
constexpr EpochMs kMinute = 60 * kSecond;
constexpr EpochMs kHour = 60 * kMinute;
constexpr EpochMs kBurstWindowMs = 2 * kSecond;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("probesense-acceptance-" + std::to_string(::getpid()) + "-" + tag);
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

sim::SimulatedDevice device(const std::string& id, const std::string& model, std::vector<sim::ItineraryStop> stops,
                            std::uint16_t tag, bool randomizing) {
    sim::SimulatedDevice d;
    d.device_id = id;
    d.profile = sim::builtin_profile(model);
    d.profile.randomization = randomizing ? sim::Randomization::PerEvent : sim::Randomization::None;
    const auto oui = d.profile.oui;
    d.burned_in_mac = MacAddress({std::uint8_t(oui >> 16), std::uint8_t(oui >> 8), std::uint8_t(oui), 0x20,
                                  std::uint8_t(tag >> 8), std::uint8_t(tag)});
    d.session_ie = {0x00, 0x05, 'p', 'r', 'o', 'b', 'e', 0x01, 0x04, std::uint8_t(tag >> 8), std::uint8_t(tag)};
    d.vendor_ie = {0xdd, 0x05, 0x00, 0x50, 0xf2, 0x08, 0x00};
    d.fixed_session_ie = true;
    d.screen_schedule = {{0, sim::ScreenState::DisplayOn}};
    d.itinerary = std::move(stops);
    return d;
}

// ---------------------------------------------------------------------------

Outcome probe_rates() {
    const auto started = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool ok = true;
    std::size_t truncated = 0;
    for (const auto& model : sim::builtin_models()) {
        const auto profile = sim::builtin_profile(model);
        for (const auto screen : {sim::ScreenState::DisplayOff, sim::ScreenState::DisplayOn}) {
            const auto& b = profile.behavior(screen);
            double events = 0;
            bool packets_exact = true;
            for (int seed = 1; seed <= kRateSeeds; ++seed) {
                const auto report = sim::run_phone_experiment(model, screen, kRateHours * kHour, static_cast<std::uint64_t>(seed));
                events += static_cast<double>(report.rows.size());
                // a burst still in progress when capture stops is cut short
                const EpochMs capture_end =
                    sim::phone_experiment_scenario(model, screen, kRateHours * kHour, 1).end_epoch_ms();
                for (const auto& row : report.rows) {
                    if (row.event_time_ms + kBurstWindowMs > capture_end) {
                        ++truncated;
                        continue;
                    }
                    packets_exact &= row.packets == b.packets_per_event;
                }
            }
            const double per_hour = events / kRateSeeds / static_cast<double>(kRateHours);
            const double rel = std::abs(per_hour - b.events_per_hour) / b.events_per_hour;
            const bool row_ok = rel <= kRateTolerance && packets_exact;
            ok &= row_ok;
            detail << model << "-" << sim::to_string(screen) << "=" << fmt("%.1f", per_hour) << "/" << b.events_per_hour
                   << (packets_exact ? "" : "(packets!)") << (row_ok ? " " : "(!) ");
        }
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    ok &= elapsed < kRateRuntimeLimitS;
    detail << "bursts cut by capture end=" << truncated << " runtime=" << fmt("%.1f", elapsed) << "s";
    return {ok, detail.str()};
}

// Phases in minutes; every device holds one zone per phase, so each dwell is
// at least as long as the shortest phase.
sim::Scenario occupancy_scenario(bool randomizing) {
    const std::vector<EpochMs> phases = {30, 10, 5, 25, 15};
    sim::Scenario s;
    s.seed = 2024;
    s.scanners = {{"s-1", "Z1"}, {"s-2", "Z2"}, {"s-3", "Z3"}};
    std::mt19937_64 rng(99);
    EpochMs total = 0;
    for (auto p : phases) total += p * kMinute;
    s.duration_ms = total;
    for (int i = 0; i < 20; ++i) {
        std::vector<sim::ItineraryStop> stops;
        EpochMs t = 0;
        for (auto p : phases) {
            const std::string zone = "Z" + std::to_string(1 + rng() % 3);
            if (!stops.empty() && stops.back().zone_id == zone) {
                stops.back().exit_ms += p * kMinute;
            } else {
                stops.push_back({zone, t, t + p * kMinute});
            }
            t += p * kMinute;
        }
        // display-on iPhone cadence: probing gaps of at most 3 minutes
        s.devices.push_back(device("d" + std::to_string(i), "iPhone6S", std::move(stops), std::uint16_t(i), randomizing));
    }
    return s;
}

// Samples where no device entered or left any zone within the expiry window
// plus one second.
std::vector<pipeline::AccuracyRow> steady_rows(const sim::Scenario& s, const pipeline::PipelineResult& r,
                                               EpochMs window) {
    std::vector<EpochMs> bounds;
    for (const auto& d : s.devices) {
        for (const auto& stop : d.itinerary) {
            bounds.push_back(s.start_epoch_ms + stop.enter_ms);
            bounds.push_back(s.start_epoch_ms + stop.exit_ms);
        }
    }
    std::vector<pipeline::AccuracyRow> out;
    for (const auto& row : pipeline::accuracy_rows(s, r)) {
        const bool steady = std::none_of(bounds.begin(), bounds.end(), [&](EpochMs b) {
            return b > row.ts - window - kSecond && b <= row.ts;
        });
        if (steady) out.push_back(row);
    }
    return out;
}

Outcome density_exactness() {
    TempDir dir("density");
    const auto s = occupancy_scenario(false);
    const pipeline::PipelineConfig cfg;
    const auto r = pipeline::run_pipeline(s, cfg, dir.path());
    const auto rows = steady_rows(s, r, cfg.density.expiry_window_ms);
    std::size_t mismatches = 0;
    std::set<std::string> scanners;
    for (const auto& row : rows) {
        const auto diff = row.estimated > row.truth ? row.estimated - row.truth : row.truth - row.estimated;
        if (diff > kDensityTolerance) ++mismatches;
        scanners.insert(row.scanner_id);
    }
    std::ostringstream d;
    d << "steady samples=" << rows.size() << " scanners=" << scanners.size() << " mismatches=" << mismatches;
    return {mismatches == 0 && rows.size() >= 30 && scanners.size() == 3, d.str()};
}

Outcome expiry_bound() {
    const density::DensityConfig cfg;
    std::ostringstream d;
    bool ok = true;
    // exit aligned so that exit + window is itself a sweep tick, and one that is not
    for (const EpochMs exit_at : {1'600'000'020'000, 1'600'000'037'123}) {
        auto bus = transport::InMemoryBus::create();
        density::DensityService svc(cfg, bus, nullptr, nullptr);
        svc.start();
        agent::AgentConfig acfg;
        acfg.scanner_id = "s-1";
        agent::EdgeAgent a(acfg, bus);
        a.start(exit_at - 10 * kMinute);
        ProbeObservation o;
        o.mac = MacAddress::from_string("A8:9C:ED:00:00:01");
        o.rssi_dbm = -60;
        o.ie_bytes = {0x00, 0x01, 'x'};
        o.scanner_id = "s-1";
        o.captured_at = exit_at;
        a.ingest(o);
        a.flush(exit_at + 30 * kSecond);

        EpochMs zero_at = -1;
        bool early_zero = false;
        for (EpochMs tick = align_up(exit_at + 1, cfg.sweep_interval_ms); tick <= exit_at + 10 * kMinute;
             tick += cfg.sweep_interval_ms) {
            const auto samples = svc.sweep(tick);
            const auto count = samples.empty() ? 0 : samples.front().count;
            if (count == 0 && zero_at < 0) zero_at = tick;
            if (count == 0 && tick - exit_at <= cfg.expiry_window_ms) early_zero = true;
        }
        const EpochMs expected = align_up(exit_at + cfg.expiry_window_ms + 1, cfg.sweep_interval_ms);
        const bool this_ok = !early_zero && zero_at == expected;
        ok &= this_ok;
        d << "exit+" << (zero_at - exit_at) / kSecond << "s(expected " << (expected - exit_at) / kSecond << "s) ";
    }

    density::PresenceTable boundary("s-1");
    boundary.touch("m", 0);
    const bool retained = boundary.sweep(cfg.expiry_window_ms, cfg.expiry_window_ms).count == 1;
    const bool removed = boundary.sweep(cfg.expiry_window_ms + 1, cfg.expiry_window_ms).count == 0;
    ok &= retained && removed;
    d << "at-240s=" << (retained ? "kept" : "dropped") << " at-240.001s=" << (removed ? "dropped" : "kept");
    return {ok, d.str()};
}

Outcome randomization_bias() {
    TempDir dir("bias");
    const auto s = occupancy_scenario(true);
    const pipeline::PipelineConfig cfg;
    const auto r = pipeline::run_pipeline(s, cfg, dir.path());
    const auto rows = steady_rows(s, r, cfg.density.expiry_window_ms);
    double est = 0, truth = 0;
    std::size_t below = 0;
    for (const auto& row : rows) {
        est += static_cast<double>(row.estimated);
        truth += static_cast<double>(row.truth);
        if (row.estimated < row.truth) ++below;
    }
    std::uint64_t true_total = 0, recovered = 0;
    for (const auto& [edge, n] : r.true_flows) {
        true_total += n;
        const auto it = r.flows.flows.find(edge);
        recovered += std::min<std::uint64_t>(n, it == r.flows.flows.end() ? 0 : it->second);
    }
    const double recovery = true_total ? static_cast<double>(recovered) / static_cast<double>(true_total) : 0.0;
    const double factor = truth > 0 ? est / truth : 0.0;
    std::ostringstream d;
    d << "overcount_factor=" << fmt("%.2f", factor) << " samples_below_truth=" << below << "/" << rows.size()
      << " journey_recovery=" << recovered << "/" << true_total << " (" << fmt("%.1f", 100 * recovery) << "%)"
      << " ambiguous=" << r.flows.ambiguous_devices;
    return {below == 0 && !rows.empty() && recovery >= kJourneyRecoveryMin && true_total > 0, d.str()};
}

Outcome flow_oracle() {
    TempDir dir("flows");
    sim::Scenario s;
    s.seed = 50;
    s.duration_ms = 90 * kMinute;
    s.scanners = {{"s-a", "A"}, {"s-b", "B"}, {"s-c", "C"}};
    for (int i = 0; i < 50; ++i) {
        const EpochMs o = i * 30 * kSecond;
        const auto* model = i % 2 ? "SamsungJ5" : "XiaomiMiNote3";
        s.devices.push_back(device("d" + std::to_string(i), model,
                                   {{"A", o, o + 20 * kMinute}, {"B", o + 20 * kMinute, o + 40 * kMinute},
                                    {"C", o + 40 * kMinute, o + 60 * kMinute}},
                                   std::uint16_t(i), false));
    }
    // two pairs of randomizers whose members share one IE fingerprint while in different zones
    const std::vector<std::pair<std::string, std::string>> pairs = {{"A", "C"}, {"B", "C"}};
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (int member = 0; member < 2; ++member) {
            auto d = device("dup" + std::to_string(p) + "-" + std::to_string(member), "iPhone6S",
                            {{member ? pairs[p].second : pairs[p].first, 0, 90 * kMinute}}, std::uint16_t(900 + p), true);
            d.burned_in_mac = MacAddress({0x28, 0xCF, 0xE9, 0x30, std::uint8_t(p), std::uint8_t(member)});
            s.devices.push_back(d);
        }
    }
    const pipeline::PipelineConfig cfg;
    const auto r = pipeline::run_pipeline(s, cfg, dir.path());
    const std::map<std::pair<std::string, std::string>, std::uint64_t> scripted = {{{"s-a", "s-b"}, 50},
                                                                                   {{"s-b", "s-c"}, 50}};
    std::ostringstream d;
    d << "estimated={";
    for (const auto& [edge, n] : r.flows.flows) d << edge.first << "->" << edge.second << ":" << n << " ";
    d << "} truth_total=" << r.sim.truth.transitions().size() << " ambiguous_devices=" << r.flows.ambiguous_devices;
    const bool ok = r.flows.flows == r.true_flows && r.true_flows == scripted && r.flows.ambiguous_devices == pairs.size();
    return {ok, d.str()};
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::multiset<std::string> entry_multiset(const std::vector<agent::ObservationBatch>& batches) {
    std::multiset<std::string> out;
    for (const auto& b : batches) {
        for (const auto& e : b.entries) out.insert(b.scanner_id + "|" + agent::entry_to_json(e).dump());
    }
    return out;
}

std::multiset<std::string> archive_multiset(const fs::path& root) {
    std::multiset<std::string> out;
    for (const auto& [sid, first] : collector::archived_scanners(root)) {
        for (const auto& r : collector::read_all(root, sid)) out.insert(sid + "|" + agent::entry_to_json(r.entry).dump());
    }
    return out;
}

// Live count files compared byte for byte with the same samples replayed.
bool replay_identical(const sim::Scenario& s, const pipeline::PipelineConfig& cfg, const pipeline::PipelineResult& r,
                      const fs::path& scratch) {
    const auto replayed = density::replay_archive(r.archive_root, cfg.density, s.start_epoch_ms, s.end_epoch_ms());
    if (replayed != r.samples) return false;
    density::CountStore live(r.output_dir), again(scratch);
    for (const auto& sample : replayed) again.append(sample);
    for (const auto& id : live.scanners()) {
        if (read_bytes(live.file(id)) != read_bytes(again.file(id))) return false;
    }
    return live.scanners() == again.scanners();
}

Outcome pipeline_integrity() {
    const auto s = sim::load_scenario(fs::path(PROBESENSE_DATA_DIR) / "scenarios" / "demo.json");
    std::ostringstream d;

    TempDir clean("integrity-clean");
    pipeline::PipelineConfig cfg;
    const auto r = pipeline::run_pipeline(s, cfg, clean.path() / "run");
    const bool replay_ok = replay_identical(s, cfg, r, clean.path() / "replay");
    d << "replay=" << (replay_ok ? "identical" : "DIFFERENT") << "(" << r.samples.size() << " samples) ";

    TempDir faulty("integrity-faults");
    pipeline::PipelineConfig fcfg;
    fcfg.publish_failure_rate = kFailureRate;
    fcfg.fault_seed = 3;
    const auto fr = pipeline::run_pipeline(s, fcfg, faulty.path() / "run");
    std::uint64_t failures = 0, published = 0;
    for (const auto& [id, m] : fr.agent_metrics) {
        failures += m.publish_failures;
        published += m.batches_published;
    }
    const auto closed = entry_multiset(fr.closed);
    const auto archived = archive_multiset(fr.archive_root);
    const bool multiset_ok = !closed.empty() && closed == archived;
    const bool fault_replay_ok = replay_identical(s, fcfg, fr, faulty.path() / "replay");
    d << "failures=" << failures << "/" << (failures + published) << " entries closed=" << closed.size()
      << " archived=" << archived.size() << " multiset=" << (multiset_ok ? "equal" : "DIFFERENT")
      << " replay_under_faults=" << (fault_replay_ok ? "identical" : "DIFFERENT");
    return {replay_ok && multiset_ok && fault_replay_ok && failures > 0, d.str()};
}

Outcome lifecycle() {
    using Clock = std::chrono::steady_clock;
    auto bus = transport::InMemoryBus::create();
    auto watcher = bus->connect("watcher");
    std::mutex mu;
    std::vector<std::pair<agent::LifecycleMessage, Clock::time_point>> seen;
    watcher->subscribe("probesense/v1/+/log", [&](const transport::Message& m) {
        std::lock_guard lock(mu);
        seen.emplace_back(agent::parse_lifecycle(m.payload), Clock::now());
    });
    auto offline_for = [&](const std::string& id) -> std::optional<Clock::time_point> {
        std::lock_guard lock(mu);
        for (const auto& [msg, at] : seen) {
            if (msg.scanner_id == id && msg.kind == agent::LifecycleMessage::Kind::Offline) return at;
        }
        return std::nullopt;
    };

    agent::AgentConfig killed_cfg;
    killed_cfg.scanner_id = "s-killed";
    agent::EdgeAgent killed(killed_cfg, bus);
    killed.start(1'000);
    const auto kill_at = Clock::now();
    killed.kill();
    std::optional<Clock::time_point> got;
    while (!(got = offline_for("s-killed")) && Clock::now() - kill_at < std::chrono::seconds(2)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    const double latency = got ? std::chrono::duration<double>(*got - kill_at).count() : -1;

    {
        agent::AgentConfig clean_cfg;
        clean_cfg.scanner_id = "s-clean";
        agent::EdgeAgent clean(clean_cfg, bus);
        clean.start(1'000);
        clean.shutdown(2'000);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    const bool clean_silent = !offline_for("s-clean").has_value();

    std::ostringstream d;
    d << "offline after kill=" << (got ? fmt("%.6f", latency) + "s" : std::string("never")) << " clean shutdown offline="
      << (clean_silent ? "none" : "DELIVERED");
    return {got && latency <= kLifecycleLatencyS && clean_silent, d.str()};
}

Outcome bandwidth() {
    constexpr EpochMs t0 = 1'600'000'000'000;
    Bytes ie(240);
    for (std::size_t i = 0; i < ie.size(); ++i) ie[i] = static_cast<std::uint8_t>(0x30 + (i * 7) % 64);
    std::ostringstream d;
    bool ok = true;
    std::optional<std::ptrdiff_t> baseline;
    for (const int k : {1, 10, 100}) {
        auto bus = transport::InMemoryBus::create();
        auto watcher = bus->connect("watcher");
        std::vector<std::string> payloads;
        watcher->subscribe("probesense/v1/+/data", [&](const transport::Message& m) { payloads.push_back(m.payload); });
        agent::AgentConfig cfg;
        cfg.scanner_id = "s-1";
        agent::EdgeAgent a(cfg, bus);
        a.start(t0);
        for (int i = 0; i < k; ++i) {
            ProbeObservation o;
            o.mac = MacAddress::from_string("A8:9C:ED:00:00:01");
            o.rssi_dbm = -60;
            o.ie_bytes = ie;
            o.scanner_id = "s-1";
            o.captured_at = t0 + 1'000 + i;
            a.ingest(o);
        }
        a.flush(t0 + 30'000);
        if (payloads.size() != 1) return {false, "expected one published batch"};
        const auto& payload = payloads[0];
        const auto batch = agent::parse_batch(payload);
        const bool one_entry = batch.entries.size() == 1 && batch.entries[0].packet_count == k;
        const auto& fp = batch.entries.empty() ? std::string() : batch.entries[0].ie_fingerprint;
        const bool fp_ok = fp.size() == 32 && std::all_of(fp.begin(), fp.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
        const std::string raw(ie.begin(), ie.end());
        const bool no_raw = payload.find(raw.substr(0, 16)) == std::string::npos &&
                            payload.find(to_hex(Bytes(ie.begin(), ie.begin() + 16))) == std::string::npos &&
                            payload.find(base64_encode(raw.substr(0, 15))) == std::string::npos;
        // size net of the decimal width of packet_count
        const auto net = static_cast<std::ptrdiff_t>(payload.size()) - static_cast<std::ptrdiff_t>(std::to_string(k).size());
        if (!baseline) baseline = net;
        const bool size_ok = net == *baseline;
        ok &= one_entry && fp_ok && no_raw && size_ok;
        d << "k=" << k << ":" << payload.size() << "B ";
    }
    d << "(size minus packet_count digits constant, one 32-hex fingerprint, no IE bytes)";
    return {ok, d.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"probe-rate-reproduction", probe_rates},
        {"density-exactness", density_exactness},
        {"expiry-bound", expiry_bound},
        {"randomization-bias", randomization_bias},
        {"flow-oracle", flow_oracle},
        {"pipeline-integrity", pipeline_integrity},
        {"lifecycle", lifecycle},
        {"bandwidth", bandwidth},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
    return failed ? 1 : 0;
}

#include "probesense/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "probesense/core/errors.hpp"
#include "probesense/density/density_service.hpp"
#include "probesense/sim/rng.hpp"
#include "probesense/transport/in_memory_bus.hpp"

namespace probesense::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::validate() const {
    if (posting_interval_ms <= 0) throw ValidationError("posting_interval", "must be > 0");
    density.validate();
    if (gap_threshold_ms <= 0) throw ValidationError("gap_threshold", "must be > 0");
    if (!(publish_failure_rate >= 0.0 && publish_failure_rate < 1.0)) {
        throw ValidationError("publish_failure_rate", "must be in [0, 1)");
    }
}

json PipelineConfig::to_json() const {
    return {{"posting_interval_s", posting_interval_ms / 1000.0},
            {"sweep_interval_s", density.sweep_interval_ms / 1000.0},
            {"expiry_window_s", density.expiry_window_ms / 1000.0},
            {"gap_threshold_s", gap_threshold_ms / 1000.0},
            {"publish_failure_rate", publish_failure_rate},
            {"fault_seed", fault_seed},
            {"pseudonymized", pseudonym_salt.has_value()},
            {"retained_capacity", retained_capacity}};
}

namespace {

void prepare_dir(const fs::path& dir, bool overwrite) {
    std::error_code ec;
    if (fs::exists(dir, ec) && !fs::is_empty(dir, ec)) {
        if (!overwrite) throw ValidationError("out", dir.string() + " already holds data (use overwrite)");
        fs::remove_all(dir, ec);
    }
    fs::create_directories(dir, ec);
}

enum class Kind { Observation = 0, Flush = 1, Sweep = 2 };

}  // namespace

PipelineResult run_pipeline(const sim::Scenario& scenario, const PipelineConfig& config, const fs::path& out_dir) {
    config.validate();
    scenario.validate();

    PipelineResult result;
    result.output_dir = out_dir;
    result.archive_root = out_dir / "archive";
    prepare_dir(result.archive_root, config.overwrite);
    prepare_dir(out_dir / "density", config.overwrite);

    result.sim = sim::run_scenario(scenario);
    const EpochMs start = scenario.start_epoch_ms;
    const EpochMs end = scenario.end_epoch_ms();

    ManualClock clock(start);
    auto bus = transport::InMemoryBus::create();
    if (config.publish_failure_rate > 0) {
        auto rng = std::make_shared<sim::SimRng>(config.fault_seed, 0xFA17);
        const double rate = config.publish_failure_rate;
        bus->set_publish_fault([rng, rate](const std::string&, const std::string& topic) {
            return topic.size() > 5 && topic.compare(topic.size() - 5, 5, "/data") == 0 && rng->uniform01() < rate;
        });
    }

    auto observer = bus->connect("probesense-pipeline-observer");
    observer->subscribe("probesense/v1/+/data", [&](const transport::Message& m) {
        result.delivered.push_back(agent::parse_batch(m.payload));
    });
    observer->subscribe("probesense/v1/+/log", [&](const transport::Message& m) { result.log_messages.push_back(m); });

    collector::CollectorConfig ccfg;
    ccfg.store_root = result.archive_root;
    ccfg.pseudonym_salt = config.pseudonym_salt;
    collector::Collector coll(ccfg, bus, clock.as_clock());
    coll.start();

    density::CountStore counts(out_dir);
    density::DensityService dens(config.density, bus, &counts, nullptr);
    dens.start();

    std::map<std::string, std::unique_ptr<agent::EdgeAgent>> agents;
    for (const auto& sc : scenario.scanners) {
        agent::AgentConfig acfg;
        acfg.scanner_id = sc.scanner_id;
        acfg.posting_interval_ms = config.posting_interval_ms;
        acfg.local_ip = "10.0.0." + std::to_string(agents.size() + 10);
        acfg.retained_capacity = config.retained_capacity;
        auto a = std::make_unique<agent::EdgeAgent>(acfg, bus);
        a->start(start);
        agents.emplace(sc.scanner_id, std::move(a));
    }

    // Timeline: (time, kind) ordered; observations keep simulator order.
    std::vector<std::pair<EpochMs, Kind>> control;
    for (EpochMs t = start + config.posting_interval_ms; t < end; t += config.posting_interval_ms) {
        control.emplace_back(t, Kind::Flush);
    }
    for (EpochMs t = align_up(start, config.density.sweep_interval_ms); t < end; t += config.density.sweep_interval_ms) {
        control.emplace_back(t, Kind::Sweep);
    }
    std::stable_sort(control.begin(), control.end());

    auto record_sweep = [&](EpochMs t) {
        for (auto& s : dens.sweep(t)) result.samples.push_back(std::move(s));
    };

    const auto& obs = result.sim.observations;
    std::size_t oi = 0;
    for (const auto& [t, kind] : control) {
        for (; oi < obs.size() && obs[oi].captured_at <= t; ++oi) {
            clock.set(obs[oi].captured_at);
            if (auto it = agents.find(obs[oi].scanner_id); it != agents.end()) it->second->ingest(obs[oi]);
        }
        clock.set(t);
        if (kind == Kind::Flush) {
            for (auto& [id, a] : agents) result.closed.push_back(a->flush(t));
        } else {
            record_sweep(t);
        }
    }
    for (; oi < obs.size(); ++oi) {
        clock.set(obs[oi].captured_at);
        if (auto it = agents.find(obs[oi].scanner_id); it != agents.end()) it->second->ingest(obs[oi]);
    }
    clock.set(end);
    for (auto& [id, a] : agents) {
        if (auto last = a->shutdown(end)) result.closed.push_back(std::move(*last));
        result.agent_metrics[id] = a->metrics();
    }
    if (end % config.density.sweep_interval_ms == 0) record_sweep(end);

    coll.stop();
    dens.stop();
    observer->close();
    result.collector_metrics = coll.metrics();

    std::vector<collector::ArchiveRecord> records;
    for (const auto& [sid, first] : collector::archived_scanners(result.archive_root)) {
        auto part = collector::read_all(result.archive_root, sid);
        records.insert(records.end(), part.begin(), part.end());
    }
    result.flows = journey::flows(journey::build_trajectories(std::move(records), config.gap_threshold_ms), start, end);
    result.true_flows = result.sim.truth.scanner_flows(scenario, start, end);
    return result;
}

std::vector<AccuracyRow> accuracy_rows(const sim::Scenario& scenario, const PipelineResult& result) {
    std::map<std::string, std::string> zone_of;
    for (const auto& s : scenario.scanners) zone_of[s.scanner_id] = s.zone_id;
    std::vector<AccuracyRow> rows;
    rows.reserve(result.samples.size());
    for (const auto& s : result.samples) {
        const auto zone = zone_of[s.scanner_id];
        rows.push_back({s.ts, s.scanner_id, zone, s.count, result.sim.truth.occupancy_count(zone, s.ts)});
    }
    return rows;
}

json write_reports(const sim::Scenario& scenario, const PipelineConfig& config, const PipelineResult& result) {
    const auto& dir = result.output_dir;
    {
        std::ofstream out(dir / "ground_truth.json");
        out << result.sim.truth.to_json().dump() << "\n";
    }
    const auto rows = accuracy_rows(scenario, result);
    double abs_err = 0, est_sum = 0, truth_sum = 0;
    std::size_t exact = 0;
    {
        std::ofstream out(dir / "accuracy.csv");
        out << "ts,scanner_id,zone_id,estimated,truth,error\n";
        for (const auto& r : rows) {
            const auto err = static_cast<long long>(r.estimated) - static_cast<long long>(r.truth);
            out << r.ts << ',' << r.scanner_id << ',' << r.zone_id << ',' << r.estimated << ',' << r.truth << ','
                << err << '\n';
            abs_err += std::abs(static_cast<double>(err));
            est_sum += static_cast<double>(r.estimated);
            truth_sum += static_cast<double>(r.truth);
            if (err == 0) ++exact;
        }
    }
    bool flows_exact = true;
    {
        std::set<std::pair<std::string, std::string>> edges;
        for (const auto& [e, v] : result.flows.flows) edges.insert(e);
        for (const auto& [e, v] : result.true_flows) edges.insert(e);
        std::ofstream out(dir / "flows.csv");
        out << "from_scanner,to_scanner,estimated,truth\n";
        for (const auto& e : edges) {
            const auto est = result.flows.flows.contains(e) ? result.flows.flows.at(e) : 0;
            const auto tru = result.true_flows.contains(e) ? result.true_flows.at(e) : 0;
            if (est != tru) flows_exact = false;
            out << e.first << ',' << e.second << ',' << est << ',' << tru << '\n';
        }
    }
    {
        auto doc = journey::sankey_export(result.flows);
        doc["ambiguous_devices"] = result.flows.ambiguous_devices;
        std::ofstream out(dir / "sankey.json");
        out << doc.dump(2) << "\n";
    }
    json agents = json::object();
    for (const auto& [id, m] : result.agent_metrics) {
        agents[id] = {{"ingested", m.ingested},
                      {"dropped_vendor", m.dropped_vendor},
                      {"dropped_rssi", m.dropped_rssi},
                      {"dropped_malformed", m.dropped_malformed},
                      {"batches_published", m.batches_published},
                      {"publish_failures", m.publish_failures},
                      {"retained_discarded", m.retained_discarded},
                      {"fingerprint_changes", m.fingerprint_changes}};
    }
    const json summary = {
        {"observations", result.sim.observations.size()},
        {"probe_events", result.sim.truth.events().size()},
        {"samples", rows.size()},
        {"samples_exact", exact},
        {"mean_abs_error", rows.empty() ? 0.0 : abs_err / static_cast<double>(rows.size())},
        {"overcount_factor", truth_sum > 0 ? est_sum / truth_sum : 0.0},
        {"flows_exact", flows_exact},
        {"flow_total", result.flows.total()},
        {"ambiguous_devices", result.flows.ambiguous_devices},
        {"collector",
         {{"messages", result.collector_metrics.messages},
          {"records", result.collector_metrics.records},
          {"dead_letters", result.collector_metrics.dead_letters}}},
        {"agents", agents}};
    {
        std::ofstream out(dir / "summary.json");
        out << summary.dump(2) << "\n";
    }
    {
        const json run = {{"seed", scenario.seed},
                          {"start_epoch_ms", scenario.start_epoch_ms},
                          {"duration_s", scenario.duration_ms / 1000.0},
                          {"config", config.to_json()}};
        std::ofstream out(dir / "run.json");
        out << run.dump(2) << "\n";
    }
    return summary;
}

}  // namespace probesense::pipeline

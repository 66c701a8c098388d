#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "probesense/agent/edge_agent.hpp"
#include "probesense/collector/collector.hpp"
#include "probesense/density/presence.hpp"
#include "probesense/journey/journey.hpp"
#include "probesense/sim/simulator.hpp"
#include "probesense/transport/broker.hpp"

namespace probesense::pipeline {

struct PipelineConfig {
    EpochMs posting_interval_ms = 30'000;
    density::DensityConfig density;
    EpochMs gap_threshold_ms = journey::kDefaultGapThresholdMs;
    /// Probability that a data-topic publish fails.
    double publish_failure_rate = 0.0;
    std::uint64_t fault_seed = 0;
    std::optional<std::string> pseudonym_salt;
    std::size_t retained_capacity = 16;
    /// Replace existing `archive/` and `density/` under the output directory.
    bool overwrite = false;

    void validate() const;
    nlohmann::json to_json() const;
};

struct PipelineResult {
    sim::SimulationOutput sim;
    std::vector<density::DensitySample> samples;     ///< live samples in emission order
    std::vector<agent::ObservationBatch> closed;     ///< every batch an agent closed
    std::vector<agent::ObservationBatch> delivered;  ///< every batch that reached the bus
    std::vector<transport::Message> log_messages;
    std::map<std::string, agent::AgentMetrics> agent_metrics;
    collector::CollectorMetrics collector_metrics;
    journey::FlowMatrix flows;
    std::map<std::pair<std::string, std::string>, std::uint64_t> true_flows;
    std::filesystem::path archive_root;
    std::filesystem::path output_dir;
};

/// Runs the scenario end to end on virtual time: simulator, one edge agent
/// per scanner, in-memory bus, collector and density service. At equal
/// timestamps observations come first, then agent flushes (every posting
/// interval from the scenario start), then density sweeps (ticks aligned to
/// the sweep interval inside [start, end]). Agents shut down cleanly at the
/// end, before the final sweep. Writes `archive/` and `density/` under
/// `out_dir`.
PipelineResult run_pipeline(const sim::Scenario& scenario, const PipelineConfig& config,
                            const std::filesystem::path& out_dir);

/// Estimated vs. true occupancy at each sample.
struct AccuracyRow {
    EpochMs ts = 0;
    std::string scanner_id;
    std::string zone_id;
    std::size_t estimated = 0;
    std::size_t truth = 0;
};
std::vector<AccuracyRow> accuracy_rows(const sim::Scenario& scenario, const PipelineResult& result);

/// ground_truth.json, accuracy.csv, flows.csv, sankey.json, summary.json and
/// run.json in the output directory. Returns the summary document.
nlohmann::json write_reports(const sim::Scenario& scenario, const PipelineConfig& config,
                             const PipelineResult& result);

}  // namespace probesense::pipeline

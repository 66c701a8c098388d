#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "probesense/agent/batch.hpp"
#include "probesense/core/observation.hpp"
#include "probesense/core/oui_database.hpp"
#include "probesense/transport/broker.hpp"

namespace probesense::agent {

struct AgentConfig {
    std::string scanner_id;
    EpochMs posting_interval_ms = 30'000;
    std::string sw_version = "1.0.0";
    std::string local_ip = "127.0.0.1";
    std::optional<int> rssi_floor_dbm;
    /// Failed batches kept for re-publish; the oldest is discarded beyond this.
    std::size_t retained_capacity = 16;
    EpochMs backoff_base_ms = 1'000;
    EpochMs backoff_cap_ms = 60'000;

    void validate() const;
};

enum class AgentStatus { Stopped, Backoff, Running, ShutDown };
const char* to_string(AgentStatus s);

struct AgentMetrics {
    std::uint64_t ingested = 0;
    std::uint64_t dropped_vendor = 0;
    std::uint64_t dropped_rssi = 0;
    std::uint64_t dropped_malformed = 0;
    std::uint64_t dropped_not_running = 0;
    std::uint64_t batches_published = 0;
    std::uint64_t publish_failures = 0;
    std::uint64_t retained_discarded = 0;
    std::uint64_t connect_attempts = 0;
    std::uint64_t fingerprint_changes = 0;
};

/// Scanner-side pipeline: filter, aggregate per MAC, publish one batch per
/// posting interval. All members are serialized on an internal mutex.
class EdgeAgent {
public:
    EdgeAgent(AgentConfig config, std::shared_ptr<transport::Broker> broker,
              const OuiDatabase& oui = OuiDatabase::builtin());
    ~EdgeAgent();

    EdgeAgent(const EdgeAgent&) = delete;
    EdgeAgent& operator=(const EdgeAgent&) = delete;

    /// Connects with the offline will and publishes the birth message.
    /// Returns false when the broker is unreachable; tick() retries with
    /// exponential backoff.
    bool start(EpochMs now);
    /// Retries a pending connect and flushes when the interval has elapsed.
    void tick(EpochMs now);

    void ingest(const ProbeObservation& obs);
    /// Closes the current batch at `now` and publishes it after any retained
    /// batches. Returns the closed batch.
    ObservationBatch flush(EpochMs now);

    /// Final flush and retained-batch drain, then a clean disconnect (no
    /// offline message). Returns the final batch.
    std::optional<ObservationBatch> shutdown(EpochMs now);
    /// Simulates a crash: the broker publishes the offline will.
    void kill();

    AgentStatus status() const;
    AgentMetrics metrics() const;
    std::size_t retained() const;
    std::size_t pending_entries() const;
    EpochMs next_flush_at() const;
    EpochMs next_connect_at() const;
    const AgentConfig& config() const { return config_; }

private:
    bool try_connect(EpochMs now);
    bool publish_batch(const ObservationBatch& batch);
    void drain_retained();

    AgentConfig config_;
    std::shared_ptr<transport::Broker> broker_;
    const OuiDatabase& oui_;

    mutable std::mutex mu_;
    std::shared_ptr<transport::Session> session_;
    AgentStatus status_ = AgentStatus::Stopped;
    AgentMetrics metrics_;
    int failed_connects_ = 0;
    EpochMs next_connect_at_ = 0;
    EpochMs batch_start_ = 0;
    EpochMs next_flush_at_ = 0;
    std::vector<BatchEntry> entries_;
    std::unordered_map<MacAddress, std::size_t> index_;
    std::deque<ObservationBatch> retained_;
};

}  // namespace probesense::agent

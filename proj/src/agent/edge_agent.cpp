#include "probesense/agent/edge_agent.hpp"

#include <algorithm>

#include "probesense/core/errors.hpp"
#include "probesense/core/fingerprint.hpp"

namespace probesense::agent {

namespace {
constexpr int kShutdownDrainAttempts = 64;
}  // namespace

void AgentConfig::validate() const {
    if (scanner_id.empty() || scanner_id.find_first_of("/+#") != std::string::npos) {
        throw ValidationError("scanner_id", "must be non-empty without '/', '+', '#'");
    }
    if (posting_interval_ms <= 0) throw ValidationError("posting_interval", "must be > 0");
    if (backoff_base_ms <= 0 || backoff_cap_ms < backoff_base_ms) {
        throw ValidationError("backoff", "need 0 < base <= cap");
    }
}

const char* to_string(AgentStatus s) {
    switch (s) {
        case AgentStatus::Stopped: return "stopped";
        case AgentStatus::Backoff: return "backoff";
        case AgentStatus::Running: return "running";
        case AgentStatus::ShutDown: return "shut_down";
    }
    return "?";
}

EdgeAgent::EdgeAgent(AgentConfig config, std::shared_ptr<transport::Broker> broker, const OuiDatabase& oui)
    : config_(std::move(config)), broker_(std::move(broker)), oui_(oui) {
    config_.validate();
}

EdgeAgent::~EdgeAgent() {
    std::lock_guard lock(mu_);
    if (session_) session_->close();
}

bool EdgeAgent::start(EpochMs now) {
    std::lock_guard lock(mu_);
    if (status_ != AgentStatus::Stopped) return status_ == AgentStatus::Running;
    batch_start_ = now;
    next_flush_at_ = now + config_.posting_interval_ms;
    return try_connect(now);
}

bool EdgeAgent::try_connect(EpochMs now) {
    ++metrics_.connect_attempts;
    const LifecycleMessage offline{LifecycleMessage::Kind::Offline, config_.scanner_id, {}, {}, now};
    try {
        session_ = broker_->connect(config_.scanner_id,
                                    transport::LastWill{log_topic(config_.scanner_id), serialize_lifecycle(offline)});
    } catch (const transport::ConnectError&) {
        session_.reset();
        ++failed_connects_;
        const int shift = std::min(failed_connects_ - 1, 30);
        const EpochMs delay = std::min(config_.backoff_cap_ms, config_.backoff_base_ms << shift);
        next_connect_at_ = now + delay;
        status_ = AgentStatus::Backoff;
        return false;
    }
    failed_connects_ = 0;
    status_ = AgentStatus::Running;
    const LifecycleMessage birth{LifecycleMessage::Kind::Birth, config_.scanner_id, config_.sw_version,
                                 config_.local_ip, now};
    try {
        session_->publish(log_topic(config_.scanner_id), serialize_lifecycle(birth));
    } catch (const transport::PublishError&) {
        ++metrics_.publish_failures;
    }
    return true;
}

void EdgeAgent::tick(EpochMs now) {
    {
        std::lock_guard lock(mu_);
        if (status_ == AgentStatus::Stopped || status_ == AgentStatus::ShutDown) return;
        if (status_ == AgentStatus::Backoff && now >= next_connect_at_) try_connect(now);
        if (now < next_flush_at_) return;
    }
    flush(now);
}

void EdgeAgent::ingest(const ProbeObservation& obs) {
    std::lock_guard lock(mu_);
    if (status_ == AgentStatus::Stopped || status_ == AgentStatus::ShutDown) {
        ++metrics_.dropped_not_running;
        return;
    }
    if (!is_well_formed(obs) || obs.mac.is_group()) {
        ++metrics_.dropped_malformed;
        return;
    }
    if (!is_mobile_vendor(oui_, obs.mac)) {
        ++metrics_.dropped_vendor;
        return;
    }
    if (config_.rssi_floor_dbm && obs.rssi_dbm < *config_.rssi_floor_dbm) {
        ++metrics_.dropped_rssi;
        return;
    }
    ++metrics_.ingested;
    const auto fp = fingerprint(obs.ie_bytes, obs.vendor_ie_bytes).hex();
    auto it = index_.find(obs.mac);
    if (it == index_.end()) {
        BatchEntry e;
        e.mac = obs.mac;
        e.randomized = obs.mac.is_randomized();
        e.vendor = vendor_lookup(oui_, obs.mac);
        e.first_seen = e.last_seen = obs.captured_at;
        e.packet_count = 1;
        e.rssi_min = e.rssi_max = obs.rssi_dbm;
        e.ssids = dedup_ssids(obs.ssids);
        e.ie_fingerprint = fp;
        index_.emplace(obs.mac, entries_.size());
        entries_.push_back(std::move(e));
        return;
    }
    auto& e = entries_[it->second];
    ++e.packet_count;
    e.first_seen = std::min(e.first_seen, obs.captured_at);
    e.last_seen = std::max(e.last_seen, obs.captured_at);
    e.rssi_min = std::min(e.rssi_min, obs.rssi_dbm);
    e.rssi_max = std::max(e.rssi_max, obs.rssi_dbm);
    union_ssids(e.ssids, obs.ssids);
    if (e.ie_fingerprint != fp) {
        e.ie_fingerprint = fp;
        e.ie_changed = true;
        ++metrics_.fingerprint_changes;
    }
}

bool EdgeAgent::publish_batch(const ObservationBatch& batch) {
    if (!session_ || !session_->is_open()) return false;
    try {
        session_->publish(data_topic(config_.scanner_id), serialize_batch(batch));
    } catch (const transport::PublishError&) {
        ++metrics_.publish_failures;
        return false;
    }
    ++metrics_.batches_published;
    return true;
}

void EdgeAgent::drain_retained() {
    while (!retained_.empty() && publish_batch(retained_.front())) retained_.pop_front();
}

ObservationBatch EdgeAgent::flush(EpochMs now) {
    std::lock_guard lock(mu_);
    ObservationBatch batch;
    batch.scanner_id = config_.scanner_id;
    batch.batch_start = batch_start_;
    batch.batch_end = std::max(now, batch_start_);
    batch.entries = std::move(entries_);
    for (const auto& e : batch.entries) batch.batch_end = std::max(batch.batch_end, e.last_seen);
    entries_.clear();
    index_.clear();
    batch_start_ = batch.batch_end;
    next_flush_at_ = batch.batch_end + config_.posting_interval_ms;

    drain_retained();
    if (!retained_.empty() || !publish_batch(batch)) {
        if (!session_ || !session_->is_open()) ++metrics_.publish_failures;
        retained_.push_back(batch);
        while (retained_.size() > config_.retained_capacity) {
            retained_.pop_front();
            ++metrics_.retained_discarded;
        }
    }
    return batch;
}

std::optional<ObservationBatch> EdgeAgent::shutdown(EpochMs now) {
    if (status() == AgentStatus::Stopped || status() == AgentStatus::ShutDown) return std::nullopt;
    auto last = flush(now);
    std::lock_guard lock(mu_);
    for (int attempt = 0; attempt < kShutdownDrainAttempts && !retained_.empty(); ++attempt) drain_retained();
    if (session_) session_->close();
    session_.reset();
    status_ = AgentStatus::ShutDown;
    return last;
}

void EdgeAgent::kill() {
    std::lock_guard lock(mu_);
    if (session_) session_->drop_unclean();
    session_.reset();
    status_ = AgentStatus::ShutDown;
}

AgentStatus EdgeAgent::status() const {
    std::lock_guard lock(mu_);
    return status_;
}

AgentMetrics EdgeAgent::metrics() const {
    std::lock_guard lock(mu_);
    return metrics_;
}

std::size_t EdgeAgent::retained() const {
    std::lock_guard lock(mu_);
    return retained_.size();
}

std::size_t EdgeAgent::pending_entries() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

EpochMs EdgeAgent::next_flush_at() const {
    std::lock_guard lock(mu_);
    return next_flush_at_;
}

EpochMs EdgeAgent::next_connect_at() const {
    std::lock_guard lock(mu_);
    return next_connect_at_;
}

}  // namespace probesense::agent

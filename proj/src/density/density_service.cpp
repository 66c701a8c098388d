#include "probesense/density/density_service.hpp"

#include <algorithm>

#include "probesense/collector/archive.hpp"
#include "probesense/core/errors.hpp"

namespace probesense::density {

DensityService::DensityService(DensityConfig config, std::shared_ptr<transport::Broker> broker, CountStore* store,
                               RealtimeChannel* realtime)
    : config_(config), broker_(std::move(broker)), store_(store), realtime_(realtime) {
    config_.validate();
}

DensityService::~DensityService() { stop(); }

void DensityService::start() {
    if (session_ || !broker_) return;
    session_ = broker_->connect("probesense-density");
    session_->subscribe("probesense/v1/+/data", [this](const transport::Message& m) { handle(m); });
}

void DensityService::stop() {
    {
        std::lock_guard lock(timer_mu_);
        timer_stop_ = true;
    }
    timer_cv_.notify_all();
    if (timer_.joinable()) timer_.join();
    if (session_) session_->close();
    session_.reset();
}

void DensityService::track(const std::string& scanner_id) {
    std::lock_guard lock(mu_);
    tables_.try_emplace(scanner_id, scanner_id);
}

void DensityService::handle(const transport::Message& msg) {
    const auto scanner = agent::scanner_from_topic(msg.topic);
    agent::ObservationBatch batch;
    try {
        batch = agent::parse_batch(msg.payload);
        if (scanner.empty() || batch.scanner_id != scanner) throw ValidationError("scanner_id", "topic mismatch");
    } catch (const ValidationError&) {
        std::lock_guard lock(mu_);
        ++metrics_.malformed;
        return;
    }
    apply(batch);
}

void DensityService::apply(const agent::ObservationBatch& batch) {
    std::lock_guard lock(mu_);
    auto [it, inserted] = tables_.try_emplace(batch.scanner_id, batch.scanner_id);
    it->second.apply_batch(batch);
    ++metrics_.batches;
}

std::vector<DensitySample> DensityService::sweep(EpochMs now) {
    std::vector<DensitySample> samples;
    {
        std::lock_guard lock(mu_);
        for (auto& [id, table] : tables_) samples.push_back(table.sweep(now, config_.expiry_window_ms));
        metrics_.samples += samples.size();
    }
    for (const auto& s : samples) {
        if (store_) store_->append(s);
        if (realtime_) realtime_->publish(s);
    }
    return samples;
}

void DensityService::run_timer(Clock clock) {
    if (timer_.joinable()) return;
    timer_stop_ = false;
    const EpochMs first = align_up(clock() + 1, config_.sweep_interval_ms);
    timer_ = std::thread([this, clock = std::move(clock), next = first]() mutable {
        std::unique_lock lock(timer_mu_);
        while (!timer_stop_) {
            const EpochMs now = clock();
            if (now >= next) {
                lock.unlock();
                sweep(next);
                lock.lock();
                next += config_.sweep_interval_ms;
                continue;
            }
            timer_cv_.wait_for(lock, std::chrono::milliseconds(std::min<EpochMs>(next - now, 1000)));
        }
    });
}

std::map<std::string, std::size_t> DensityService::current_counts() const {
    std::lock_guard lock(mu_);
    std::map<std::string, std::size_t> out;
    for (const auto& [id, table] : tables_) out[id] = table.size();
    return out;
}

DensityMetrics DensityService::metrics() const {
    std::lock_guard lock(mu_);
    return metrics_;
}

std::vector<DensitySample> replay_archive(const std::filesystem::path& archive_root, const DensityConfig& config,
                                          EpochMs from, EpochMs to) {
    config.validate();
    const auto scanners = collector::archived_scanners(archive_root);
    std::map<std::string, PresenceTable> tables;
    // received_at -> records, across all scanners
    std::map<EpochMs, std::vector<collector::ArchiveRecord>> arrivals;
    for (const auto& [id, first] : scanners) {
        for (auto& r : collector::read_all(archive_root, id)) arrivals[r.received_at].push_back(std::move(r));
    }

    std::vector<DensitySample> out;
    auto next_arrival = arrivals.begin();
    for (EpochMs tick = align_up(from, config.sweep_interval_ms); tick <= to; tick += config.sweep_interval_ms) {
        for (; next_arrival != arrivals.end() && next_arrival->first <= tick; ++next_arrival) {
            for (const auto& r : next_arrival->second) {
                tables.try_emplace(r.scanner_id, r.scanner_id).first->second.touch(r.entry.mac.to_string(),
                                                                                    r.entry.last_seen);
            }
        }
        for (const auto& [id, first] : scanners) {
            if (first > tick) continue;
            auto& table = tables.try_emplace(id, id).first->second;
            out.push_back(table.sweep(tick, config.expiry_window_ms));
        }
    }
    return out;
}

}  // namespace probesense::density

#pragma once

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "probesense/density/count_store.hpp"
#include "probesense/density/presence.hpp"
#include "probesense/transport/broker.hpp"

namespace probesense::density {

struct DensityMetrics {
    std::uint64_t batches = 0;
    std::uint64_t malformed = 0;
    std::uint64_t samples = 0;
};

/// Live density estimation over every scanner seen on the data topics.
/// Sweeps happen on ticks aligned to multiples of the sweep interval.
class DensityService {
public:
    DensityService(DensityConfig config, std::shared_ptr<transport::Broker> broker, CountStore* store,
                   RealtimeChannel* realtime);
    ~DensityService();

    /// Subscribes to all scanner data topics.
    void start();
    void stop();

    /// Applies one data-topic message; malformed payloads are counted and skipped.
    void handle(const transport::Message& msg);
    /// Registers a scanner so it is sampled even before its first entry.
    void track(const std::string& scanner_id);
    /// Applies a batch without going through the broker.
    void apply(const agent::ObservationBatch& batch);
    /// Sweeps every table at `now`, persists and publishes the samples.
    std::vector<DensitySample> sweep(EpochMs now);

    /// Background sweeps on the wall clock until stop().
    void run_timer(Clock clock);

    std::map<std::string, std::size_t> current_counts() const;
    DensityMetrics metrics() const;
    const DensityConfig& config() const { return config_; }

private:
    DensityConfig config_;
    std::shared_ptr<transport::Broker> broker_;
    CountStore* store_;
    RealtimeChannel* realtime_;
    std::shared_ptr<transport::Session> session_;

    mutable std::mutex mu_;
    std::map<std::string, PresenceTable> tables_;
    DensityMetrics metrics_;

    std::mutex timer_mu_;
    std::condition_variable timer_cv_;
    bool timer_stop_ = false;
    std::thread timer_;
};

/// Recomputes the sample series of an archive: batches grouped by receive
/// time are applied in order, and sweeps run on aligned ticks in [from, to].
/// A scanner is sampled from its first receive time on. Samples are ordered
/// by (ts, scanner_id).
std::vector<DensitySample> replay_archive(const std::filesystem::path& archive_root, const DensityConfig& config,
                                          EpochMs from, EpochMs to);

}  // namespace probesense::density

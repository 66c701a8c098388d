#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <vector>

#include "probesense/core/bounded_queue.hpp"
#include "probesense/density/presence.hpp"

namespace probesense::density {

/// Sample series on disk: `{root}/density/{scanner}.ndjson`.
class CountStore {
public:
    explicit CountStore(std::filesystem::path root) : root_(std::move(root)) {}

    void append(const DensitySample& sample);
    std::vector<DensitySample> read(const std::string& scanner_id) const;
    /// Samples with ts in [from, to).
    std::vector<DensitySample> read_range(const std::string& scanner_id, EpochMs from, EpochMs to) const;
    std::vector<std::string> scanners() const;
    std::filesystem::path file(const std::string& scanner_id) const;

private:
    std::filesystem::path root_;
    mutable std::mutex mu_;
};

/// Fan-out of live samples. Each subscriber has its own bounded queue; a
/// slow subscriber loses its oldest samples, never blocking the publisher.
class RealtimeChannel {
public:
    using Queue = BoundedQueue<DensitySample>;

    explicit RealtimeChannel(std::size_t per_subscriber_capacity = 256) : capacity_(per_subscriber_capacity) {}

    std::shared_ptr<Queue> subscribe();
    void unsubscribe(const std::shared_ptr<Queue>& q);
    void publish(const DensitySample& sample);

    std::size_t subscribers() const;
    /// Samples discarded across all subscribers so far.
    std::uint64_t dropped() const;

private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::vector<std::shared_ptr<Queue>> queues_;
    std::uint64_t dropped_ = 0;
};

}  // namespace probesense::density

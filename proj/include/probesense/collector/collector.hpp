#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "probesense/collector/archive.hpp"
#include "probesense/core/time.hpp"
#include "probesense/transport/broker.hpp"

namespace probesense::collector {

struct CollectorConfig {
    std::filesystem::path store_root;
    /// When set, MACs are replaced by a salted SHA-256 pseudonym before writing.
    std::optional<std::string> pseudonym_salt;
    EpochMs clock_skew_ms = 5'000;
    int write_attempts = 3;
};

struct CollectorMetrics {
    std::uint64_t messages = 0;
    std::uint64_t records = 0;
    std::uint64_t dead_letters = 0;
};

/// Keyed pseudonym with the same U/L bit as the input and the group bit clear.
MacAddress pseudonymize(const MacAddress& mac, const std::string& salt);

/// Archives every batch published on any scanner data topic.
class Collector {
public:
    Collector(CollectorConfig config, std::shared_ptr<transport::Broker> broker, Clock clock);
    ~Collector();

    void start();
    void stop();

    /// Processes one message as if delivered by the broker.
    void handle(const transport::Message& msg);

    CollectorMetrics metrics() const;
    /// Set once storage failed for good; the collector stops consuming.
    std::optional<std::string> halted() const;
    ArchiveStore& store() { return store_; }

private:
    CollectorConfig config_;
    std::shared_ptr<transport::Broker> broker_;
    Clock clock_;
    ArchiveStore store_;
    std::shared_ptr<transport::Session> session_;

    mutable std::mutex mu_;
    CollectorMetrics metrics_;
    std::set<std::string> known_scanners_;
    std::optional<std::string> halted_;
};

}  // namespace probesense::collector

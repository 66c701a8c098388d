#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "probesense/agent/batch.hpp"
#include "probesense/density/count_store.hpp"
#include "probesense/gateway/config_store.hpp"
#include "probesense/transport/broker.hpp"

namespace probesense::gateway {

/// Outgoing frames for one live client. When the client falls behind by
/// more than the capacity the stream is closed as overflowed.
class FrameStream {
public:
    FrameStream(std::string floor_id, std::size_t capacity) : floor_id_(std::move(floor_id)), capacity_(capacity) {}

    const std::string& floor_id() const { return floor_id_; }

    void push(std::string frame);
    std::optional<std::string> pop_for(std::chrono::milliseconds timeout);
    void close();
    bool closed() const;
    bool overflowed() const;

private:
    std::string floor_id_;
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::string> frames_;
    bool closed_ = false;
    bool overflowed_ = false;
};

/// Per-floor fan-out of density samples and scanner status.
///
/// Density frame: `{"type":"density","floor_id","scanner_id","ts","count",
/// "floor_total","max_density","breach"}` with breach = floor_total >
/// max_density, floor_total summing the latest count of each scanner on the
/// floor. Status frame: `{"type":"status","floor_id","scanner_id","status",
/// "ts"}` plus sw_version and local_ip when online.
class RealtimeHub {
public:
    explicit RealtimeHub(const ConfigStore& config, std::size_t stream_capacity = 256);
    ~RealtimeHub();

    /// Throws NotFoundError for an unknown floor.
    std::shared_ptr<FrameStream> open(const std::string& floor_id);
    void close(const std::shared_ptr<FrameStream>& stream);

    void on_sample(const density::DensitySample& sample);
    void on_lifecycle(const agent::LifecycleMessage& msg);

    /// Pumps samples from a density channel on a background thread.
    void attach(density::RealtimeChannel& channel);
    /// Subscribes to every scanner log topic.
    void attach(transport::Broker& broker);
    void stop();

    /// scanner_id -> last lifecycle status ("online"/"offline").
    std::map<std::string, nlohmann::json> scanner_status() const;
    std::size_t open_streams() const;

private:
    void deliver(const std::string& floor_id, const std::string& frame);

    const ConfigStore& config_;
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::vector<std::shared_ptr<FrameStream>> streams_;
    std::map<std::string, std::size_t> latest_;
    std::map<std::string, nlohmann::json> status_;

    density::RealtimeChannel* channel_ = nullptr;
    std::shared_ptr<density::RealtimeChannel::Queue> queue_;
    std::shared_ptr<transport::Session> session_;
    std::thread pump_;
    std::atomic<bool> stopping_{false};
};

}  // namespace probesense::gateway

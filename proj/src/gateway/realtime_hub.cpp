#include "probesense/gateway/realtime_hub.hpp"

#include "probesense/core/errors.hpp"

namespace probesense::gateway {

using nlohmann::json;

void FrameStream::push(std::string frame) {
    {
        std::lock_guard lock(mu_);
        if (closed_) return;
        if (frames_.size() >= capacity_) {
            overflowed_ = true;
            closed_ = true;
        } else {
            frames_.push_back(std::move(frame));
        }
    }
    cv_.notify_all();
}

std::optional<std::string> FrameStream::pop_for(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !frames_.empty() || closed_; });
    if (frames_.empty() || overflowed_) return std::nullopt;
    auto f = std::move(frames_.front());
    frames_.pop_front();
    return f;
}

void FrameStream::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool FrameStream::closed() const {
    std::lock_guard lock(mu_);
    return closed_;
}

bool FrameStream::overflowed() const {
    std::lock_guard lock(mu_);
    return overflowed_;
}

RealtimeHub::RealtimeHub(const ConfigStore& config, std::size_t stream_capacity)
    : config_(config), capacity_(stream_capacity) {}

RealtimeHub::~RealtimeHub() { stop(); }

std::shared_ptr<FrameStream> RealtimeHub::open(const std::string& floor_id) {
    config_.floor(floor_id);
    auto s = std::make_shared<FrameStream>(floor_id, capacity_);
    std::lock_guard lock(mu_);
    streams_.push_back(s);
    return s;
}

void RealtimeHub::close(const std::shared_ptr<FrameStream>& stream) {
    stream->close();
    std::lock_guard lock(mu_);
    std::erase(streams_, stream);
}

void RealtimeHub::deliver(const std::string& floor_id, const std::string& frame) {
    std::vector<std::shared_ptr<FrameStream>> targets;
    {
        std::lock_guard lock(mu_);
        std::erase_if(streams_, [](const auto& s) { return s->closed(); });
        for (const auto& s : streams_) {
            if (s->floor_id() == floor_id) targets.push_back(s);
        }
    }
    for (const auto& s : targets) s->push(frame);
}

void RealtimeHub::on_sample(const density::DensitySample& sample) {
    const auto floor_id = config_.floor_of_scanner(sample.scanner_id);
    if (!floor_id) return;
    Floor floor;
    std::vector<ScannerPlacement> placed;
    try {
        floor = config_.floor(*floor_id);
        placed = config_.placements(*floor_id);
    } catch (const NotFoundError&) {
        return;
    }
    std::uint64_t total = 0;
    {
        std::lock_guard lock(mu_);
        latest_[sample.scanner_id] = sample.count;
        for (const auto& p : placed) {
            if (auto it = latest_.find(p.scanner_id); it != latest_.end()) total += it->second;
        }
    }
    const json frame = {{"type", "density"},
                        {"floor_id", *floor_id},
                        {"scanner_id", sample.scanner_id},
                        {"ts", sample.ts},
                        {"count", sample.count},
                        {"floor_total", total},
                        {"max_density", floor.max_density},
                        {"breach", total > floor.max_density}};
    deliver(*floor_id, frame.dump());
}

void RealtimeHub::on_lifecycle(const agent::LifecycleMessage& msg) {
    json status = {{"type", "status"},
                   {"scanner_id", msg.scanner_id},
                   {"status", msg.kind == agent::LifecycleMessage::Kind::Birth ? "online" : "offline"},
                   {"ts", msg.ts}};
    if (msg.kind == agent::LifecycleMessage::Kind::Birth) {
        status["sw_version"] = msg.sw_version;
        status["local_ip"] = msg.local_ip;
    }
    {
        std::lock_guard lock(mu_);
        status_[msg.scanner_id] = status;
    }
    const auto floor_id = config_.floor_of_scanner(msg.scanner_id);
    if (!floor_id) return;
    status["floor_id"] = *floor_id;
    deliver(*floor_id, status.dump());
}

void RealtimeHub::attach(density::RealtimeChannel& channel) {
    if (pump_.joinable()) return;
    channel_ = &channel;
    queue_ = channel.subscribe();
    pump_ = std::thread([this] {
        while (!stopping_) {
            if (auto s = queue_->pop_for(std::chrono::milliseconds(200))) on_sample(*s);
            else if (queue_->closed()) break;
        }
    });
}

void RealtimeHub::attach(transport::Broker& broker) {
    if (session_) return;
    session_ = broker.connect("probesense-gateway");
    session_->subscribe("probesense/v1/+/log", [this](const transport::Message& m) {
        try {
            on_lifecycle(agent::parse_lifecycle(m.payload));
        } catch (const ValidationError&) {
        }
    });
}

void RealtimeHub::stop() {
    stopping_ = true;
    if (channel_ && queue_) channel_->unsubscribe(queue_);
    if (pump_.joinable()) pump_.join();
    channel_ = nullptr;
    if (session_) session_->close();
    session_.reset();
    std::lock_guard lock(mu_);
    for (const auto& s : streams_) s->close();
    streams_.clear();
}

std::map<std::string, json> RealtimeHub::scanner_status() const {
    std::lock_guard lock(mu_);
    return status_;
}

std::size_t RealtimeHub::open_streams() const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(std::count_if(streams_.begin(), streams_.end(), [](const auto& s) { return !s->closed(); }));
}

}  // namespace probesense::gateway

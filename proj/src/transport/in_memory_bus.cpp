#include "probesense/transport/in_memory_bus.hpp"

#include <algorithm>

namespace probesense::transport {

struct InMemoryBus::Subscription {
    SubscriptionId id = 0;
    std::string pattern;
    Handler handler;
    BusSession* owner = nullptr;
    std::recursive_mutex delivery_mu;
    bool active = true;
};

class InMemoryBus::BusSession : public Session {
public:
    BusSession(std::shared_ptr<InMemoryBus> bus, std::string id, std::optional<LastWill> will)
        : bus_(std::move(bus)), id_(std::move(id)), will_(std::move(will)) {}

    ~BusSession() override {
        if (open_) bus_->detach(*this, true);
    }

    const std::string& client_id() const override { return id_; }
    bool is_open() const override { return open_; }

    void publish(const std::string& topic, std::string payload) override {
        if (!open_) throw PublishError("session '" + id_ + "' is closed");
        if (!is_valid_topic(topic)) throw PublishError("invalid topic '" + topic + "'");
        if (bus_->should_fail(id_, topic)) throw PublishError("injected publish failure on '" + topic + "'");
        bus_->route(topic, payload);
    }

    SubscriptionId subscribe(const std::string& pattern, Handler handler) override {
        if (!open_) throw PublishError("session '" + id_ + "' is closed");
        if (!is_valid_pattern(pattern)) throw std::invalid_argument("invalid pattern '" + pattern + "'");
        return bus_->add_subscription(*this, pattern, std::move(handler));
    }

    void unsubscribe(SubscriptionId id) override { bus_->remove_subscription(id); }

    void close() override {
        if (open_) bus_->detach(*this, false);
    }
    void drop_unclean() override {
        if (open_) bus_->detach(*this, true);
    }

private:
    friend class InMemoryBus;
    std::shared_ptr<InMemoryBus> bus_;
    std::string id_;
    std::optional<LastWill> will_;
    std::atomic<bool> open_{true};
};

std::shared_ptr<InMemoryBus> InMemoryBus::create() { return std::shared_ptr<InMemoryBus>(new InMemoryBus()); }

std::shared_ptr<Session> InMemoryBus::connect(const std::string& client_id, std::optional<LastWill> will) {
    if (client_id.empty()) throw ConnectError("empty client id");
    if (will && !is_valid_topic(will->topic)) throw ConnectError("invalid will topic '" + will->topic + "'");
    std::shared_ptr<BusSession> previous;
    {
        std::lock_guard lock(mu_);
        if (!reachable_) throw ConnectError("broker unreachable");
        if (auto it = sessions_.find(client_id); it != sessions_.end()) previous = it->second.lock();
    }
    // Takeover: the old session ends without its will.
    if (previous) previous->close();
    auto session = std::make_shared<BusSession>(shared_from_this(), client_id, std::move(will));
    std::lock_guard lock(mu_);
    sessions_[client_id] = session;
    return session;
}

void InMemoryBus::set_reachable(bool reachable) {
    std::lock_guard lock(mu_);
    reachable_ = reachable;
}

void InMemoryBus::set_publish_fault(FaultPredicate predicate) {
    std::lock_guard lock(mu_);
    fault_ = std::move(predicate);
}

std::size_t InMemoryBus::open_sessions() const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(
        std::count_if(sessions_.begin(), sessions_.end(), [](const auto& kv) { return !kv.second.expired(); }));
}

std::uint64_t InMemoryBus::delivered() const {
    std::lock_guard lock(mu_);
    return delivered_;
}

bool InMemoryBus::should_fail(const std::string& client_id, const std::string& topic) const {
    FaultPredicate fault;
    {
        std::lock_guard lock(mu_);
        fault = fault_;
    }
    return fault && fault(client_id, topic);
}

void InMemoryBus::route(const std::string& topic, const std::string& payload) {
    std::vector<std::shared_ptr<Subscription>> targets;
    {
        std::lock_guard lock(mu_);
        for (const auto& [id, sub] : subscriptions_) {
            if (topic_matches(sub->pattern, topic)) targets.push_back(sub);
        }
    }
    const Message msg{topic, payload};
    std::uint64_t n = 0;
    for (const auto& sub : targets) {
        std::lock_guard lock(sub->delivery_mu);
        if (!sub->active) continue;
        sub->handler(msg);
        ++n;
    }
    std::lock_guard lock(mu_);
    delivered_ += n;
}

SubscriptionId InMemoryBus::add_subscription(BusSession& owner, const std::string& pattern, Handler handler) {
    auto sub = std::make_shared<Subscription>();
    sub->pattern = pattern;
    sub->handler = std::move(handler);
    sub->owner = &owner;
    std::lock_guard lock(mu_);
    sub->id = next_id_++;
    subscriptions_[sub->id] = sub;
    return sub->id;
}

void InMemoryBus::remove_subscription(SubscriptionId id) {
    std::shared_ptr<Subscription> sub;
    {
        std::lock_guard lock(mu_);
        auto it = subscriptions_.find(id);
        if (it == subscriptions_.end()) return;
        sub = it->second;
        subscriptions_.erase(it);
    }
    std::lock_guard lock(sub->delivery_mu);
    sub->active = false;
}

void InMemoryBus::detach(BusSession& session, bool publish_will) {
    if (!session.open_.exchange(false)) return;
    std::vector<std::shared_ptr<Subscription>> removed;
    {
        std::lock_guard lock(mu_);
        for (auto it = subscriptions_.begin(); it != subscriptions_.end();) {
            if (it->second->owner == &session) {
                removed.push_back(it->second);
                it = subscriptions_.erase(it);
            } else {
                ++it;
            }
        }
        if (auto it = sessions_.find(session.id_); it != sessions_.end()) {
            auto current = it->second.lock();
            if (!current || current.get() == &session) sessions_.erase(it);
        }
    }
    for (const auto& sub : removed) {
        std::lock_guard lock(sub->delivery_mu);
        sub->active = false;
    }
    if (publish_will && session.will_) route(session.will_->topic, session.will_->payload);
}

}  // namespace probesense::transport

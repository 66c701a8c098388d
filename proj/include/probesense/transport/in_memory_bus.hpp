#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "probesense/transport/broker.hpp"

namespace probesense::transport {

/// In-process broker. publish() delivers synchronously on the caller's
/// thread, so a publisher's messages reach each subscriber in publish order.
class InMemoryBus : public Broker, public std::enable_shared_from_this<InMemoryBus> {
public:
    /// Returns true to make a publish fail.
    using FaultPredicate = std::function<bool(const std::string& client_id, const std::string& topic)>;

    static std::shared_ptr<InMemoryBus> create();

    std::shared_ptr<Session> connect(const std::string& client_id, std::optional<LastWill> will = std::nullopt) override;

    void set_reachable(bool reachable);
    void set_publish_fault(FaultPredicate predicate);

    std::size_t open_sessions() const;
    std::uint64_t delivered() const;

private:
    InMemoryBus() = default;
    class BusSession;
    struct Subscription;

    void route(const std::string& topic, const std::string& payload);
    void detach(BusSession& session, bool publish_will);
    bool should_fail(const std::string& client_id, const std::string& topic) const;
    SubscriptionId add_subscription(BusSession& owner, const std::string& pattern, Handler handler);
    void remove_subscription(SubscriptionId id);

    mutable std::mutex mu_;
    bool reachable_ = true;
    FaultPredicate fault_;
    std::map<std::string, std::weak_ptr<BusSession>> sessions_;
    std::map<SubscriptionId, std::shared_ptr<Subscription>> subscriptions_;
    SubscriptionId next_id_ = 1;
    std::uint64_t delivered_ = 0;
};

}  // namespace probesense::transport

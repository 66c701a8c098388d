#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "probesense/core/bounded_queue.hpp"

namespace probesense::transport {

struct Message {
    std::string topic;
    std::string payload;

    friend bool operator==(const Message&, const Message&) = default;
};

struct LastWill {
    std::string topic;
    std::string payload;
};

/// Broker not reachable at connect time.
class ConnectError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Publish on a closed session, or a delivery failure reported by the broker.
class PublishError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-empty, `/`-separated, no wildcard characters.
bool is_valid_topic(std::string_view topic);
/// Like a topic, but `+` may stand for one whole segment and a single `#` may
/// be the last segment.
bool is_valid_pattern(std::string_view pattern);
bool topic_matches(std::string_view pattern, std::string_view topic);

using Handler = std::function<void(const Message&)>;
using SubscriptionId = std::uint64_t;

/// One client connection. Delivery to a handler is serialized.
class Session {
public:
    virtual ~Session() = default;

    virtual const std::string& client_id() const = 0;
    virtual bool is_open() const = 0;

    /// Throws PublishError when closed or when the broker rejects the message.
    virtual void publish(const std::string& topic, std::string payload) = 0;
    virtual SubscriptionId subscribe(const std::string& pattern, Handler handler) = 0;
    virtual void unsubscribe(SubscriptionId id) = 0;

    /// Graceful disconnect: the last will is discarded.
    virtual void close() = 0;
    /// Connection lost: the broker publishes the last will, if any.
    virtual void drop_unclean() = 0;
};

/// Connection factory. A real MQTT 3.1.1 client maps onto this contract with
/// QoS 1 publishes and the will registered at CONNECT.
class Broker {
public:
    virtual ~Broker() = default;
    /// Throws ConnectError when unreachable. A second connect with the same
    /// client id supersedes the first session.
    virtual std::shared_ptr<Session> connect(const std::string& client_id,
                                             std::optional<LastWill> will = std::nullopt) = 0;
};

/// Subscribes and buffers deliveries for polling consumers.
std::shared_ptr<BoundedQueue<Message>> subscribe_queue(Session& session, const std::string& pattern,
                                                       std::size_t capacity = 4096);

}  // namespace probesense::transport

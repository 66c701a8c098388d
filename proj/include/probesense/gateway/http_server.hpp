#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "probesense/gateway/gateway_app.hpp"

namespace probesense::gateway {

/// HTTP/1.1 and WebSocket front end for a GatewayApp, one thread per
/// connection.
class HttpServer {
public:
    HttpServer(const GatewayApp& app, std::string address, std::uint16_t port);
    ~HttpServer();

    /// Binds and starts accepting. Returns the bound port (useful with port 0).
    std::uint16_t start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace probesense::gateway

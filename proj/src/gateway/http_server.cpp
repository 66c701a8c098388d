#include "probesense/gateway/http_server.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <algorithm>
#include <condition_variable>
#include <cctype>
#include <iostream>

namespace probesense::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxBodyBytes = 32 * 1024 * 1024;

HttpRequest to_request(const http::request<http::string_body>& in) {
    auto req = HttpRequest::make(std::string(in.method_string()), std::string(in.target()), in.body());
    for (const auto& field : in) {
        std::string name(field.name_string());
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        req.headers[name] = std::string(field.value());
    }
    return req;
}

http::response<http::string_body> to_beast(const HttpResponse& r, unsigned version, bool keep_alive) {
    http::response<http::string_body> out{static_cast<http::status>(r.status), version};
    out.set(http::field::server, "probesense");
    if (!r.content_type.empty()) out.set(http::field::content_type, r.content_type);
    out.set(http::field::access_control_allow_origin, "*");
    out.keep_alive(keep_alive);
    out.body() = r.body;
    out.prepare_payload();
    return out;
}

}  // namespace

struct HttpServer::Impl {
    const GatewayApp& app;
    std::string address;
    std::uint16_t port;
    asio::io_context ioc;
    std::unique_ptr<tcp::acceptor> acceptor;
    std::thread accept_thread;
    std::atomic<bool> stopping{false};

    std::mutex mu;
    std::condition_variable idle;
    std::set<std::shared_ptr<tcp::socket>> sockets;
    std::size_t active = 0;

    Impl(const GatewayApp& a, std::string addr, std::uint16_t p) : app(a), address(std::move(addr)), port(p) {}

    void serve_websocket(const std::shared_ptr<tcp::socket>& sock, http::request<http::string_body>& raw,
                         const std::shared_ptr<FrameStream>& stream) {
        websocket::stream<tcp::socket&> ws(*sock);
        ws.accept(raw);
        ws.text(true);
        while (!stopping) {
            beast::error_code ec;
            if (sock->available(ec) > 0) {
                beast::flat_buffer incoming;
                ws.read(incoming, ec);
                if (ec) break;
                continue;
            }
            auto frame = stream->pop_for(std::chrono::milliseconds(250));
            if (frame) {
                ws.write(asio::buffer(*frame));
                continue;
            }
            if (stream->overflowed()) {
                ws.close(websocket::close_reason(websocket::close_code::policy_error, "client too slow"));
                break;
            }
            if (stream->closed()) {
                ws.close(websocket::close_code::going_away);
                break;
            }
        }
        app.hub().close(stream);
    }

    void session(std::shared_ptr<tcp::socket> sock) {
        beast::error_code ec;
        beast::flat_buffer buffer;
        while (!stopping) {
            http::request_parser<http::string_body> parser;
            parser.body_limit(kMaxBodyBytes);
            http::read(*sock, buffer, parser, ec);
            if (ec) break;
            auto raw = parser.release();
            const auto req = to_request(raw);
            if (websocket::is_upgrade(raw)) {
                HttpResponse error;
                auto stream = app.open_realtime(req, error);
                if (!stream) {
                    http::write(*sock, to_beast(error, raw.version(), false), ec);
                    break;
                }
                try {
                    serve_websocket(sock, raw, stream);
                } catch (const std::exception&) {
                    app.hub().close(stream);
                }
                break;
            }
            HttpResponse resp;
            if (req.method == "OPTIONS") {
                resp = {204, "", ""};
            } else {
                resp = app.handle(req);
            }
            auto out = to_beast(resp, raw.version(), raw.keep_alive());
            if (req.method == "OPTIONS") {
                out.set(http::field::access_control_allow_methods, "GET, POST, PUT, DELETE, OPTIONS");
                out.set(http::field::access_control_allow_headers, "Authorization, Content-Type");
            }
            http::write(*sock, out, ec);
            if (ec || !raw.keep_alive()) break;
        }
        sock->shutdown(tcp::socket::shutdown_both, ec);
        std::lock_guard lock(mu);
        sockets.erase(sock);
        if (--active == 0) idle.notify_all();
    }

    void accept_loop() {
        while (!stopping) {
            auto sock = std::make_shared<tcp::socket>(ioc);
            beast::error_code ec;
            acceptor->accept(*sock, ec);
            if (ec) {
                if (stopping) break;
                continue;
            }
            std::lock_guard lock(mu);
            sockets.insert(sock);
            ++active;
            std::thread([this, sock] { session(sock); }).detach();
        }
    }
};

HttpServer::HttpServer(const GatewayApp& app, std::string address, std::uint16_t port)
    : impl_(std::make_unique<Impl>(app, std::move(address), port)) {}

HttpServer::~HttpServer() { stop(); }

std::uint16_t HttpServer::start() {
    auto& i = *impl_;
    const tcp::endpoint ep{asio::ip::make_address(i.address), i.port};
    i.acceptor = std::make_unique<tcp::acceptor>(i.ioc);
    i.acceptor->open(ep.protocol());
    i.acceptor->set_option(asio::socket_base::reuse_address(true));
    i.acceptor->bind(ep);
    i.acceptor->listen();
    const auto bound = i.acceptor->local_endpoint().port();
    i.port = bound;
    i.accept_thread = std::thread([&i] { i.accept_loop(); });
    return bound;
}

void HttpServer::stop() {
    if (!impl_ || impl_->stopping.exchange(true)) return;
    auto& i = *impl_;
    beast::error_code ec;
    if (i.acceptor) {
        i.acceptor->cancel(ec);
        i.acceptor->close(ec);
    }
    // A blocking accept() may not notice close(); poke it with a connection.
    if (i.accept_thread.joinable()) {
        try {
            asio::io_context tmp;
            tcp::socket poke(tmp);
            poke.connect({asio::ip::make_address(i.address == "0.0.0.0" ? "127.0.0.1" : i.address), i.port}, ec);
        } catch (const std::exception&) {
        }
        i.accept_thread.join();
    }
    std::unique_lock lock(i.mu);
    for (const auto& s : i.sockets) s->shutdown(tcp::socket::shutdown_both, ec);
    i.idle.wait(lock, [&] { return i.active == 0; });
}

}  // namespace probesense::gateway

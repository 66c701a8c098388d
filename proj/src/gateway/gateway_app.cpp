#include "probesense/gateway/gateway_app.hpp"

#include <limits>

#include "probesense/core/errors.hpp"

namespace probesense::gateway {

using nlohmann::json;

namespace {

class Unauthorized : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MethodNotAllowed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> segments(const std::string& path) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < path.size()) {
        while (pos < path.size() && path[pos] == '/') ++pos;
        if (pos >= path.size()) break;
        const auto slash = path.find('/', pos);
        out.push_back(path.substr(pos, slash == std::string::npos ? std::string::npos : slash - pos));
        pos = slash == std::string::npos ? path.size() : slash;
    }
    return out;
}

json body_json(const HttpRequest& req) {
    try {
        auto j = json::parse(req.body);
        if (!j.is_object()) throw ValidationError("body", "must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ValidationError("body", std::string("not valid JSON: ") + e.what());
    }
}

template <typename T>
T required(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(key, "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(key, "wrong type");
    }
}

std::uint64_t positive_integer(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<std::int64_t>() <= 0) {
        throw ValidationError(key, "must be a positive integer");
    }
    return j.at(key).get<std::uint64_t>();
}

EpochMs query_time(const HttpRequest& req, const char* key, EpochMs fallback) {
    const auto it = req.query.find(key);
    if (it == req.query.end() || it->second.empty()) return fallback;
    try {
        std::size_t used = 0;
        const auto v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(key, "must be an integer");
    }
}

void require_method(const HttpRequest& req, std::initializer_list<const char*> allowed) {
    for (const auto* m : allowed) {
        if (req.method == m) return;
    }
    throw MethodNotAllowed("method " + req.method + " not allowed on " + req.path);
}

json list(const auto& items) {
    json out = json::array();
    for (const auto& i : items) out.push_back(to_json(i));
    return out;
}

}  // namespace

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
    return json_response(status, {{"code", status}, {"message", message}});
}

json density_history(const ConfigStore& config, const density::CountStore& counts, const std::string& floor_id,
                     EpochMs from, EpochMs to, EpochMs bucket_ms) {
    if (bucket_ms < 0) throw ValidationError("bucket", "must be >= 0");
    if (to < from) throw ValidationError("to", "must not precede from");
    config.floor(floor_id);
    json series = json::object();
    for (const auto& p : config.placements(floor_id)) {
        json points = json::array();
        const auto samples = counts.read_range(p.scanner_id, from, to);
        if (bucket_ms == 0) {
            for (const auto& s : samples) points.push_back({{"ts", s.ts}, {"count", s.count}});
        } else {
            std::map<EpochMs, std::size_t> buckets;
            for (const auto& s : samples) {
                auto [it, inserted] = buckets.try_emplace(align_down(s.ts, bucket_ms), s.count);
                if (!inserted) it->second = std::max(it->second, s.count);
            }
            for (const auto& [ts, count] : buckets) points.push_back({{"ts", ts}, {"count", count}});
        }
        series[p.scanner_id] = std::move(points);
    }
    return {{"floor_id", floor_id}, {"from", from}, {"to", to}, {"bucket", bucket_ms / 1000}, {"series", series}};
}

json building_journeys(const ConfigStore& config, const std::filesystem::path& archive_root,
                       const std::string& building_id, EpochMs from, EpochMs to, EpochMs gap_threshold_ms) {
    if (to < from) throw ValidationError("to", "must not precede from");
    std::vector<collector::ArchiveRecord> records;
    for (const auto& scanner : config.building_scanners(building_id)) {
        auto part = collector::read_range(archive_root, scanner, from, to);
        records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    const auto matrix = journey::flows(journey::build_trajectories(std::move(records), gap_threshold_ms), from, to);
    auto doc = journey::sankey_export(matrix);
    doc["ambiguous_devices"] = matrix.ambiguous_devices;
    return doc;
}

GatewayApp::GatewayApp(ConfigStore& config, const density::CountStore& counts, RealtimeHub& hub,
                       GatewayOptions options)
    : config_(config), counts_(counts), hub_(hub), options_(std::move(options)) {}

Principal GatewayApp::authenticate(const HttpRequest& req) const {
    std::string token;
    if (const auto h = req.header("authorization")) {
        const std::string prefix = "Bearer ";
        if (h->rfind(prefix, 0) != 0) throw Unauthorized("expected a Bearer token");
        token = h->substr(prefix.size());
    } else if (const auto it = req.query.find("token"); it != req.query.end()) {
        token = it->second;
    }
    if (token.empty()) throw Unauthorized("missing bearer token");
    const auto p = config_.authenticate(token);
    if (!p) throw Unauthorized("unknown token");
    return *p;
}

HttpResponse GatewayApp::handle(const HttpRequest& req) const {
    try {
        if (req.path == "/healthz") return json_response(200, {{"status", "ok"}});
        const auto caller = authenticate(req);
        return route(req, caller);
    } catch (const Unauthorized& e) {
        return error_response(401, e.what());
    } catch (const ForbiddenError& e) {
        return error_response(403, e.what());
    } catch (const NotFoundError& e) {
        return error_response(404, e.what());
    } catch (const MethodNotAllowed& e) {
        return error_response(405, e.what());
    } catch (const ConflictError& e) {
        return error_response(409, e.what());
    } catch (const ValidationError& e) {
        return error_response(400, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

bool GatewayApp::is_realtime_path(const std::string& path) {
    const auto s = segments(path);
    return s.size() == 2 && s[0] == "realtime";
}

std::shared_ptr<FrameStream> GatewayApp::open_realtime(const HttpRequest& req, HttpResponse& error) const {
    try {
        authenticate(req);
        const auto s = segments(req.path);
        if (s.size() != 2 || s[0] != "realtime") throw NotFoundError("no route for " + req.path);
        return hub_.open(s[1]);
    } catch (const Unauthorized& e) {
        error = error_response(401, e.what());
    } catch (const NotFoundError& e) {
        error = error_response(404, e.what());
    }
    return nullptr;
}

HttpResponse GatewayApp::route(const HttpRequest& req, const Principal& caller) const {
    const auto s = segments(req.path);
    const auto& m = req.method;
    const auto n = s.size();
    constexpr EpochMs kMaxTime = std::numeric_limits<EpochMs>::max();

    if (n >= 1 && s[0] == "entities") {
        if (n == 1) {
            require_method(req, {"GET", "POST"});
            if (m == "GET") return json_response(200, list(config_.entities()));
            const auto body = body_json(req);
            return json_response(201, to_json(config_.create_entity(caller, required<std::string>(body, "name"))));
        }
        if (n == 2) {
            require_method(req, {"GET", "PUT", "DELETE"});
            if (m == "GET") return json_response(200, to_json(config_.entity(s[1])));
            if (m == "PUT") {
                const auto body = body_json(req);
                return json_response(200, to_json(config_.rename_entity(caller, s[1], required<std::string>(body, "name"))));
            }
            config_.delete_entity(caller, s[1]);
            return {204, "application/json", ""};
        }
        if (n == 3 && s[2] == "users") {
            require_method(req, {"GET", "POST"});
            if (m == "GET") return json_response(200, to_json(config_.entity(s[1]))["users"]);
            const auto body = body_json(req);
            const auto role = parse_role(required<std::string>(body, "role"));
            if (!role) throw ValidationError("role", "expected SuperAdmin, Admin or User");
            return json_response(
                201, to_json(config_.add_entity_user(caller, s[1], {required<std::string>(body, "user_id"), *role})));
        }
    }

    if (n >= 1 && s[0] == "buildings") {
        if (n == 1) {
            require_method(req, {"GET", "POST"});
            if (m == "GET") return json_response(200, list(config_.buildings()));
            const auto body = body_json(req);
            return json_response(201, to_json(config_.create_building(caller, required<std::string>(body, "entity_id"),
                                                                      required<std::string>(body, "name"))));
        }
        if (n == 2) {
            require_method(req, {"GET", "PUT", "DELETE"});
            if (m == "GET") return json_response(200, to_json(config_.building(s[1])));
            if (m == "PUT") {
                const auto body = body_json(req);
                return json_response(200,
                                     to_json(config_.rename_building(caller, s[1], required<std::string>(body, "name"))));
            }
            config_.delete_building(caller, s[1]);
            return {204, "application/json", ""};
        }
        if (n == 3 && s[2] == "floors") {
            require_method(req, {"GET", "POST"});
            if (m == "GET") return json_response(200, list(config_.floors(s[1])));
            std::string name, media_type, image;
            std::uint64_t max_density = 0;
            const auto ct = req.header("content-type").value_or("");
            if (ct.rfind("multipart/", 0) == 0) {
                bool have_density = false;
                for (const auto& part : parse_multipart(ct, req.body)) {
                    if (part.name == "name") {
                        name = part.data;
                    } else if (part.name == "max_density") {
                        try {
                            std::size_t used = 0;
                            const auto v = std::stoll(part.data, &used);
                            if (used != part.data.size() || v <= 0) throw std::invalid_argument("max_density");
                            max_density = static_cast<std::uint64_t>(v);
                            have_density = true;
                        } catch (const std::exception&) {
                            throw ValidationError("max_density", "must be a positive integer");
                        }
                    } else if (part.name == "map") {
                        image = part.data;
                        media_type = part.content_type.empty() ? "application/octet-stream" : part.content_type;
                    }
                }
                if (!have_density) throw ValidationError("max_density", "missing");
            } else {
                const auto body = body_json(req);
                name = required<std::string>(body, "name");
                max_density = positive_integer(body, "max_density");
            }
            return json_response(201, to_json(config_.create_floor(caller, s[1], name, max_density, media_type, image)));
        }
        if (n == 3 && s[2] == "journeys") {
            require_method(req, {"GET"});
            config_.building(s[1]);
            return json_response(200, building_journeys(config_, options_.archive_root, s[1], query_time(req, "from", 0),
                                                        query_time(req, "to", kMaxTime), options_.gap_threshold_ms));
        }
    }

    if (n >= 2 && s[0] == "floors") {
        if (n == 2) {
            require_method(req, {"GET", "PUT", "DELETE"});
            if (m == "GET") return json_response(200, to_json(config_.floor(s[1])));
            if (m == "PUT") {
                const auto body = body_json(req);
                return json_response(200, to_json(config_.rename_floor(caller, s[1], required<std::string>(body, "name"))));
            }
            config_.delete_floor(caller, s[1]);
            return {204, "application/json", ""};
        }
        if (n == 3 && s[2] == "map") {
            require_method(req, {"GET"});
            const auto f = config_.floor(s[1]);
            return {200, f.map_media_type, config_.floor_map(s[1])};
        }
        if (n == 3 && s[2] == "max_density") {
            require_method(req, {"PUT"});
            const auto body = body_json(req);
            return json_response(200, to_json(config_.set_max_density(caller, s[1], positive_integer(body, "max_density"))));
        }
        if (n == 3 && s[2] == "scanners") {
            require_method(req, {"GET", "POST"});
            if (m == "GET") return json_response(200, list(config_.placements(s[1])));
            const auto body = body_json(req);
            return json_response(201, to_json(config_.place_scanner(caller, s[1], required<std::string>(body, "scanner_id"),
                                                                    required<double>(body, "x"), required<double>(body, "y"))));
        }
        if (n == 4 && s[2] == "scanners") {
            require_method(req, {"PUT", "DELETE"});
            if (m == "PUT") {
                const auto body = body_json(req);
                return json_response(200, to_json(config_.move_scanner(caller, s[1], s[3], required<double>(body, "x"),
                                                                       required<double>(body, "y"))));
            }
            config_.remove_scanner(caller, s[1], s[3]);
            return {204, "application/json", ""};
        }
        if (n == 3 && s[2] == "density") {
            require_method(req, {"GET"});
            const EpochMs bucket_s = query_time(req, "bucket", 0);
            return json_response(200, density_history(config_, counts_, s[1], query_time(req, "from", 0),
                                                      query_time(req, "to", kMaxTime), bucket_s * 1000));
        }
    }

    if (n == 2 && s[0] == "scanners" && s[1] == "status") {
        require_method(req, {"GET"});
        json out = json::object();
        for (const auto& [id, st] : hub_.scanner_status()) out[id] = st;
        return json_response(200, out);
    }

    throw NotFoundError("no route for " + req.method + " " + req.path);
}

}  // namespace probesense::gateway

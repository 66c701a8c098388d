#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "probesense/density/count_store.hpp"
#include "probesense/gateway/config_store.hpp"
#include "probesense/gateway/http.hpp"
#include "probesense/gateway/realtime_hub.hpp"
#include "probesense/journey/journey.hpp"

namespace probesense::gateway {

struct GatewayOptions {
    std::filesystem::path archive_root;
    EpochMs gap_threshold_ms = journey::kDefaultGapThresholdMs;
};

/// Per-scanner series for a floor over [from, to). With bucket > 0 each
/// point is the maximum count among samples in an epoch-aligned bucket,
/// stamped with the bucket start. Throws NotFoundError for unknown floors.
nlohmann::json density_history(const ConfigStore& config, const density::CountStore& counts,
                               const std::string& floor_id, EpochMs from, EpochMs to, EpochMs bucket_ms);

/// Sankey document over the archive, restricted to the building's scanners.
nlohmann::json building_journeys(const ConfigStore& config, const std::filesystem::path& archive_root,
                                 const std::string& building_id, EpochMs from, EpochMs to, EpochMs gap_threshold_ms);

/// Request router independent of the network layer. Every route needs a
/// bearer token (`Authorization: Bearer ...` or `?token=`). Errors carry
/// `{"code": <status>, "message": ...}`.
class GatewayApp {
public:
    GatewayApp(ConfigStore& config, const density::CountStore& counts, RealtimeHub& hub, GatewayOptions options);

    HttpResponse handle(const HttpRequest& req) const;

    /// WebSocket route `/realtime/{floor_id}`: on success returns the stream;
    /// otherwise fills `error` and returns null.
    std::shared_ptr<FrameStream> open_realtime(const HttpRequest& req, HttpResponse& error) const;
    static bool is_realtime_path(const std::string& path);

    RealtimeHub& hub() const { return hub_; }

private:
    Principal authenticate(const HttpRequest& req) const;
    HttpResponse route(const HttpRequest& req, const Principal& caller) const;

    ConfigStore& config_;
    const density::CountStore& counts_;
    RealtimeHub& hub_;
    GatewayOptions options_;
};

HttpResponse json_response(int status, const nlohmann::json& body);
HttpResponse error_response(int status, const std::string& message);

}  // namespace probesense::gateway

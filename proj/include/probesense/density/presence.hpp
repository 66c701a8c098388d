#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "probesense/agent/batch.hpp"

namespace probesense::density {

struct DensityConfig {
    EpochMs sweep_interval_ms = 60'000;
    EpochMs expiry_window_ms = 240'000;

    /// Requires expiry_window > sweep_interval > 0.
    void validate() const;
};

struct DensitySample {
    std::string scanner_id;
    EpochMs ts = 0;
    std::size_t count = 0;

    friend bool operator==(const DensitySample&, const DensitySample&) = default;
};

nlohmann::json sample_to_json(const DensitySample& s);
DensitySample sample_from_json(const nlohmann::json& j);

/// Last time each MAC was heard by one scanner.
class PresenceTable {
public:
    explicit PresenceTable(std::string scanner_id) : scanner_id_(std::move(scanner_id)) {}

    const std::string& scanner_id() const { return scanner_id_; }

    /// Keeps the latest last_seen per MAC. Throws ValidationError when the
    /// batch belongs to another scanner.
    void apply_batch(const agent::ObservationBatch& batch);
    void touch(const std::string& key, EpochMs ts);

    /// Drops keys with now - ts > expiry_window and returns the remaining count.
    DensitySample sweep(EpochMs now, EpochMs expiry_window_ms);

    std::size_t size() const { return last_seen_.size(); }
    std::optional<EpochMs> last_seen(const std::string& key) const;

private:
    std::string scanner_id_;
    std::map<std::string, EpochMs> last_seen_;
};

}  // namespace probesense::density

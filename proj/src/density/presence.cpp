#include "probesense/density/presence.hpp"

#include "probesense/core/errors.hpp"

namespace probesense::density {

void DensityConfig::validate() const {
    if (sweep_interval_ms <= 0) throw ValidationError("sweep_interval", "must be > 0");
    if (expiry_window_ms <= sweep_interval_ms) throw ValidationError("expiry_window", "must exceed sweep_interval");
}

nlohmann::json sample_to_json(const DensitySample& s) {
    return {{"scanner_id", s.scanner_id}, {"ts", s.ts}, {"count", s.count}};
}

DensitySample sample_from_json(const nlohmann::json& j) {
    try {
        return {j.at("scanner_id").get<std::string>(), j.at("ts").get<EpochMs>(), j.at("count").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("sample", e.what());
    }
}

void PresenceTable::apply_batch(const agent::ObservationBatch& batch) {
    if (batch.scanner_id != scanner_id_) {
        throw ValidationError("scanner_id", "batch for '" + batch.scanner_id + "' applied to '" + scanner_id_ + "'");
    }
    for (const auto& e : batch.entries) touch(e.mac.to_string(), e.last_seen);
}

void PresenceTable::touch(const std::string& key, EpochMs ts) {
    auto [it, inserted] = last_seen_.try_emplace(key, ts);
    if (!inserted && ts > it->second) it->second = ts;
}

DensitySample PresenceTable::sweep(EpochMs now, EpochMs expiry_window_ms) {
    std::erase_if(last_seen_, [&](const auto& kv) { return now - kv.second > expiry_window_ms; });
    return {scanner_id_, now, last_seen_.size()};
}

std::optional<EpochMs> PresenceTable::last_seen(const std::string& key) const {
    const auto it = last_seen_.find(key);
    if (it == last_seen_.end()) return std::nullopt;
    return it->second;
}

}  // namespace probesense::density

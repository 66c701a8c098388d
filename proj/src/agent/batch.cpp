#include "probesense/agent/batch.hpp"

#include "probesense/core/errors.hpp"
#include "probesense/core/fingerprint.hpp"

namespace probesense::agent {

using nlohmann::json;

namespace {

constexpr const char* kTopicPrefix = "probesense/v1/";

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError(where + "." + key, "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + "." + key, "wrong type");
    }
}

EpochMs timestamp(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
        throw ValidationError(where + "." + key, "missing or not an integer");
    }
    return j.at(key).get<EpochMs>();
}

}  // namespace

json entry_to_json(const BatchEntry& e) {
    return {{"mac", e.mac.to_string()},
            {"randomized", e.randomized},
            {"vendor", e.vendor},
            {"first_seen", e.first_seen},
            {"last_seen", e.last_seen},
            {"packet_count", e.packet_count},
            {"rssi_min", e.rssi_min},
            {"rssi_max", e.rssi_max},
            {"ssids", e.ssids},
            {"ie_fingerprint", e.ie_fingerprint},
            {"ie_changed", e.ie_changed}};
}

BatchEntry entry_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where, "must be an object");
    BatchEntry e;
    e.mac = MacAddress::from_string(field<std::string>(j, "mac", where));
    e.randomized = field<bool>(j, "randomized", where);
    e.vendor = field<std::string>(j, "vendor", where);
    e.first_seen = timestamp(j, "first_seen", where);
    e.last_seen = timestamp(j, "last_seen", where);
    e.packet_count = field<int>(j, "packet_count", where);
    e.rssi_min = field<int>(j, "rssi_min", where);
    e.rssi_max = field<int>(j, "rssi_max", where);
    e.ssids = field<std::vector<std::string>>(j, "ssids", where);
    e.ie_fingerprint = IeFingerprint::from_hex(field<std::string>(j, "ie_fingerprint", where)).hex();
    e.ie_changed = field<bool>(j, "ie_changed", where);
    if (e.packet_count < 1) throw ValidationError(where + ".packet_count", "must be >= 1");
    if (e.first_seen > e.last_seen) throw ValidationError(where + ".first_seen", "after last_seen");
    if (e.rssi_min > e.rssi_max) throw ValidationError(where + ".rssi_min", "above rssi_max");
    return e;
}

json batch_to_json(const ObservationBatch& b) {
    json entries = json::array();
    for (const auto& e : b.entries) entries.push_back(entry_to_json(e));
    return {{"scanner_id", b.scanner_id},
            {"batch_start", b.batch_start},
            {"batch_end", b.batch_end},
            {"entries", std::move(entries)}};
}

ObservationBatch batch_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("batch", "must be an object");
    ObservationBatch b;
    b.scanner_id = field<std::string>(j, "scanner_id", "batch");
    if (b.scanner_id.empty()) throw ValidationError("batch.scanner_id", "must not be empty");
    b.batch_start = timestamp(j, "batch_start", "batch");
    b.batch_end = timestamp(j, "batch_end", "batch");
    if (!j.contains("entries") || !j["entries"].is_array()) throw ValidationError("batch.entries", "must be an array");
    for (std::size_t i = 0; i < j["entries"].size(); ++i) {
        const auto where = "batch.entries[" + std::to_string(i) + "]";
        auto e = entry_from_json(j["entries"][i], where);
        if (e.last_seen > b.batch_end) throw ValidationError(where + ".last_seen", "after batch_end");
        b.entries.push_back(std::move(e));
    }
    return b;
}

std::string serialize_batch(const ObservationBatch& b) { return batch_to_json(b).dump(); }

ObservationBatch parse_batch(std::string_view payload) {
    json j;
    try {
        j = json::parse(payload);
    } catch (const json::parse_error& e) {
        throw ValidationError("batch", std::string("not valid JSON: ") + e.what());
    }
    return batch_from_json(j);
}

std::string serialize_lifecycle(const LifecycleMessage& m) {
    if (m.kind == LifecycleMessage::Kind::Birth) {
        return json{{"type", "birth"},
                    {"scanner_id", m.scanner_id},
                    {"sw_version", m.sw_version},
                    {"local_ip", m.local_ip},
                    {"ts", m.ts}}
            .dump();
    }
    return json{{"type", "offline"}, {"scanner_id", m.scanner_id}, {"ts", m.ts}}.dump();
}

LifecycleMessage parse_lifecycle(std::string_view payload) {
    json j;
    try {
        j = json::parse(payload);
    } catch (const json::parse_error& e) {
        throw ValidationError("lifecycle", std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("lifecycle", "must be an object");
    LifecycleMessage m;
    const auto type = field<std::string>(j, "type", "lifecycle");
    if (type == "birth") {
        m.kind = LifecycleMessage::Kind::Birth;
        m.sw_version = field<std::string>(j, "sw_version", "lifecycle");
        m.local_ip = field<std::string>(j, "local_ip", "lifecycle");
    } else if (type == "offline") {
        m.kind = LifecycleMessage::Kind::Offline;
    } else {
        throw ValidationError("lifecycle.type", "expected 'birth' or 'offline'");
    }
    m.scanner_id = field<std::string>(j, "scanner_id", "lifecycle");
    m.ts = timestamp(j, "ts", "lifecycle");
    return m;
}

std::string data_topic(const std::string& scanner_id) { return kTopicPrefix + scanner_id + "/data"; }
std::string log_topic(const std::string& scanner_id) { return kTopicPrefix + scanner_id + "/log"; }

std::string scanner_from_topic(const std::string& topic) {
    const std::string prefix = kTopicPrefix;
    if (topic.rfind(prefix, 0) != 0) return {};
    const auto rest = topic.substr(prefix.size());
    const auto slash = rest.find('/');
    if (slash == std::string::npos || slash == 0) return {};
    const auto kind = rest.substr(slash + 1);
    if (kind != "data" && kind != "log") return {};
    return rest.substr(0, slash);
}

}  // namespace probesense::agent

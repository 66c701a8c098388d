#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "probesense/core/mac_address.hpp"
#include "probesense/core/time.hpp"

namespace probesense::agent {

/// Aggregate of every packet one MAC sent within a posting interval.
struct BatchEntry {
    MacAddress mac;
    bool randomized = false;
    std::string vendor;
    EpochMs first_seen = 0;
    EpochMs last_seen = 0;
    int packet_count = 0;
    int rssi_min = 0;
    int rssi_max = 0;
    std::vector<std::string> ssids;
    std::string ie_fingerprint;
    bool ie_changed = false;  ///< fingerprint was replaced during the interval

    friend bool operator==(const BatchEntry&, const BatchEntry&) = default;
};

struct ObservationBatch {
    std::string scanner_id;
    EpochMs batch_start = 0;
    EpochMs batch_end = 0;
    std::vector<BatchEntry> entries;

    friend bool operator==(const ObservationBatch&, const ObservationBatch&) = default;
};

nlohmann::json entry_to_json(const BatchEntry& e);
/// Throws ValidationError naming the bad field; `where` prefixes field names.
BatchEntry entry_from_json(const nlohmann::json& j, const std::string& where = "entry");

nlohmann::json batch_to_json(const ObservationBatch& b);
ObservationBatch batch_from_json(const nlohmann::json& j);
/// Compact JSON text as published on the data topic.
std::string serialize_batch(const ObservationBatch& b);
/// Throws ValidationError on malformed text or fields.
ObservationBatch parse_batch(std::string_view payload);

struct LifecycleMessage {
    enum class Kind { Birth, Offline };
    Kind kind = Kind::Birth;
    std::string scanner_id;
    std::string sw_version;  ///< Birth only
    std::string local_ip;    ///< Birth only
    EpochMs ts = 0;
};

std::string serialize_lifecycle(const LifecycleMessage& m);
LifecycleMessage parse_lifecycle(std::string_view payload);

std::string data_topic(const std::string& scanner_id);
std::string log_topic(const std::string& scanner_id);
/// Scanner id segment of `probesense/v1/{id}/{kind}`, or empty if the topic
/// has a different shape.
std::string scanner_from_topic(const std::string& topic);

}  // namespace probesense::agent

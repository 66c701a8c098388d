#include "probesense/journey/journey.hpp"

#include <algorithm>
#include <set>

#include "probesense/core/errors.hpp"

namespace probesense::journey {

using collector::ArchiveRecord;

std::string DeviceKey::to_string() const { return (kind == Kind::Mac ? "mac:" : "ie:") + value; }

namespace {

struct Span {
    EpochMs first = 0;
    EpochMs last = 0;
};

// Per-scanner activity spans, records joined when closer than the threshold.
std::map<std::string, std::vector<Span>> scanner_spans(const std::vector<const ArchiveRecord*>& group, EpochMs gap) {
    std::map<std::string, std::vector<Span>> out;
    for (const auto* r : group) {
        auto& spans = out[r->scanner_id];
        if (!spans.empty() && r->entry.first_seen - spans.back().last <= gap) {
            spans.back().last = std::max(spans.back().last, r->entry.last_seen);
        } else {
            spans.push_back({r->entry.first_seen, r->entry.last_seen});
        }
    }
    return out;
}

bool contains_record_of(const Span& span, const std::vector<const ArchiveRecord*>& group, const std::string& scanner) {
    return std::any_of(group.begin(), group.end(), [&](const ArchiveRecord* r) {
        return r->scanner_id == scanner && r->entry.first_seen >= span.first && r->entry.first_seen <= span.last;
    });
}

// Two scanners whose overlapping spans each hold the other's detections:
// one device cannot be in both places, so the key stands for several.
bool is_ambiguous(const std::vector<const ArchiveRecord*>& group, EpochMs gap) {
    const auto spans = scanner_spans(group, gap);
    for (auto a = spans.begin(); a != spans.end(); ++a) {
        for (auto b = std::next(a); b != spans.end(); ++b) {
            for (const auto& sa : a->second) {
                for (const auto& sb : b->second) {
                    if (sa.last < sb.first || sb.last < sa.first) continue;
                    if (contains_record_of(sa, group, b->first) && contains_record_of(sb, group, a->first)) return true;
                }
            }
        }
    }
    return false;
}

}  // namespace

std::vector<Trajectory> build_trajectories(std::vector<ArchiveRecord> records, EpochMs gap_threshold_ms) {
    std::map<DeviceKey, std::vector<const ArchiveRecord*>> groups;
    for (const auto& r : records) {
        DeviceKey key = r.entry.randomized ? DeviceKey{DeviceKey::Kind::Fingerprint, r.entry.ie_fingerprint}
                                           : DeviceKey{DeviceKey::Kind::Mac, r.entry.mac.to_string()};
        groups[std::move(key)].push_back(&r);
    }

    std::vector<Trajectory> out;
    for (auto& [key, group] : groups) {
        std::stable_sort(group.begin(), group.end(), [](const ArchiveRecord* a, const ArchiveRecord* b) {
            if (a->entry.first_seen != b->entry.first_seen) return a->entry.first_seen < b->entry.first_seen;
            return a->entry.last_seen < b->entry.last_seen;
        });
        const bool ambiguous = key.kind == DeviceKey::Kind::Fingerprint && is_ambiguous(group, gap_threshold_ms);

        Trajectory current{key, {}, ambiguous};
        for (const auto* r : group) {
            if (!current.visits.empty()) {
                auto& v = current.visits.back();
                if (v.scanner_id == r->scanner_id) {
                    if (r->entry.first_seen - v.last_seen <= gap_threshold_ms) {
                        v.last_seen = std::max(v.last_seen, r->entry.last_seen);
                        continue;
                    }
                    out.push_back(std::move(current));
                    current = Trajectory{key, {}, ambiguous};
                }
            }
            current.visits.push_back({r->scanner_id, r->entry.first_seen, r->entry.last_seen});
        }
        if (!current.visits.empty()) out.push_back(std::move(current));
    }
    return out;
}

std::uint64_t FlowMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& [k, v] : flows) n += v;
    return n;
}

FlowMatrix flows(const std::vector<Trajectory>& trajectories, EpochMs from, EpochMs to) {
    FlowMatrix m;
    m.from = from;
    m.to = to;
    std::set<DeviceKey> ambiguous;
    for (const auto& t : trajectories) {
        if (t.ambiguous) {
            const bool in_window = std::any_of(t.visits.begin(), t.visits.end(), [&](const Visit& v) {
                return v.last_seen >= from && v.first_seen < to;
            });
            if (in_window) ambiguous.insert(t.key);
            continue;
        }
        for (std::size_t i = 1; i < t.visits.size(); ++i) {
            const auto& next = t.visits[i];
            if (next.first_seen < from || next.first_seen >= to) continue;
            ++m.flows[{t.visits[i - 1].scanner_id, next.scanner_id}];
        }
    }
    m.ambiguous_devices = ambiguous.size();
    return m;
}

nlohmann::json sankey_export(const FlowMatrix& m) {
    nlohmann::json doc = {{"nodes", nlohmann::json::array()}, {"links", nlohmann::json::array()}};
    std::set<std::string> nodes;
    for (const auto& [edge, value] : m.flows) {
        if (value == 0) continue;
        nodes.insert(edge.first);
        nodes.insert(edge.second);
        doc["links"].push_back({{"source", edge.first}, {"target", edge.second}, {"value", value}});
    }
    for (const auto& n : nodes) doc["nodes"].push_back({{"id", n}});
    return doc;
}

FlowMatrix sankey_import(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("links") || !doc["links"].is_array()) {
        throw ValidationError("sankey.links", "missing or not an array");
    }
    FlowMatrix m;
    for (std::size_t i = 0; i < doc["links"].size(); ++i) {
        const auto& l = doc["links"][i];
        const auto where = "sankey.links[" + std::to_string(i) + "]";
        try {
            const auto source = l.at("source").get<std::string>();
            const auto target = l.at("target").get<std::string>();
            const auto value = l.at("value").get<std::uint64_t>();
            if (source == target) throw ValidationError(where, "self loop");
            m.flows[{source, target}] += value;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where, e.what());
        }
    }
    return m;
}

}  // namespace probesense::journey

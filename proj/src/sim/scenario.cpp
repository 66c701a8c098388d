#include "probesense/sim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "probesense/core/errors.hpp"
#include "probesense/core/observation.hpp"
#include "probesense/core/oui_database.hpp"
#include "probesense/sim/rng.hpp"

namespace probesense::sim {

using nlohmann::json;

namespace {

std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

double number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ValidationError(where + "." + key, "missing");
    if (!obj[key].is_number()) throw ValidationError(where + "." + key, "must be a number");
    return obj[key].get<double>();
}

std::string text(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ValidationError(where + "." + key, "missing");
    if (!obj[key].is_string()) throw ValidationError(where + "." + key, "must be a string");
    return obj[key].get<std::string>();
}

ScreenBehavior behavior_from_json(const json& j, const std::string& where) {
    ScreenBehavior b;
    b.events_per_hour = number(j, "events_per_hour", where);
    b.packets_per_event = static_cast<int>(number(j, "packets_per_event", where));
    b.interval_min_s = number(j, "interval_min_s", where);
    b.interval_max_s = number(j, "interval_max_s", where);
    if (j.contains("interval_mode_s") && !j["interval_mode_s"].is_null()) {
        b.interval_mode_s = number(j, "interval_mode_s", where);
    }
    return b;
}

json behavior_to_json(const ScreenBehavior& b) {
    json j = {{"events_per_hour", b.events_per_hour},
              {"packets_per_event", b.packets_per_event},
              {"interval_min_s", b.interval_min_s},
              {"interval_max_s", b.interval_max_s}};
    if (b.interval_mode_s) j["interval_mode_s"] = *b.interval_mode_s;
    return j;
}

DeviceProfile profile_from_json(const json& j, const std::string& where) {
    if (j.is_string()) return builtin_profile(j.get<std::string>());
    if (!j.is_object()) throw ValidationError(where, "must be a model name or a profile object");
    DeviceProfile p;
    p.name = text(j, "name", where);
    const auto r = parse_randomization(j.value("randomization", "none"));
    if (!r) throw ValidationError(where + ".randomization", "expected 'none' or 'per_event'");
    p.randomization = *r;
    p.vendor = j.value("vendor", std::string(kUnknownVendor));
    if (j.contains("oui")) {
        const auto mac = MacAddress::parse(text(j, "oui", where) + ":00:00:00");
        if (!mac) throw ValidationError(where + ".oui", "expected XX:YY:ZZ");
        p.oui = mac->oui();
    }
    if (j.contains("display_off")) {
        p.screen_states[ScreenState::DisplayOff] = behavior_from_json(j["display_off"], where + ".display_off");
    }
    if (j.contains("display_on")) {
        p.screen_states[ScreenState::DisplayOn] = behavior_from_json(j["display_on"], where + ".display_on");
    }
    p.validate(where);
    return p;
}

Bytes hex_field(const json& d, const char* key, const std::string& where) {
    try {
        return from_hex(text(d, key, where));
    } catch (const std::invalid_argument& e) {
        if (dynamic_cast<const ValidationError*>(&e)) throw;
        throw ValidationError(where + "." + key, e.what());
    }
}

}  // namespace

ScreenState SimulatedDevice::screen_at(EpochMs offset_ms) const {
    ScreenState s = ScreenState::DisplayOff;
    for (const auto& c : screen_schedule) {
        if (c.at_ms > offset_ms) break;
        s = c.state;
    }
    return s;
}

const ItineraryStop* SimulatedDevice::stop_at(EpochMs offset_ms) const {
    for (const auto& stop : itinerary) {
        if (offset_ms >= stop.enter_ms && offset_ms < stop.exit_ms) return &stop;
        if (stop.enter_ms > offset_ms) break;
    }
    return nullptr;
}

std::string Scenario::scanner_for_zone(const std::string& zone_id) const {
    for (const auto& s : scanners) {
        if (s.zone_id == zone_id) return s.scanner_id;
    }
    return {};
}

void Scenario::validate() const {
    if (start_epoch_ms <= 0) throw ValidationError("start_epoch_ms", "must be > 0");
    if (duration_ms < 0) throw ValidationError("duration_s", "must be >= 0");
    std::set<std::string> scanner_ids, zones;
    for (std::size_t i = 0; i < scanners.size(); ++i) {
        const auto& s = scanners[i];
        const auto where = at("scanners", i);
        if (s.scanner_id.empty() || s.scanner_id.find_first_of("/+#") != std::string::npos) {
            throw ValidationError(where + ".scanner_id", "must be non-empty without '/', '+', '#'");
        }
        if (s.zone_id.empty()) throw ValidationError(where + ".zone_id", "must not be empty");
        if (!scanner_ids.insert(s.scanner_id).second) throw ValidationError(where + ".scanner_id", "duplicate");
        if (!zones.insert(s.zone_id).second) {
            throw ValidationError(where + ".zone_id", "zone already covered by another scanner");
        }
    }
    std::set<std::string> device_ids;
    for (std::size_t i = 0; i < devices.size(); ++i) {
        const auto& d = devices[i];
        const auto where = at("devices", i);
        if (d.device_id.empty()) throw ValidationError(where + ".device_id", "must not be empty");
        if (!device_ids.insert(d.device_id).second) throw ValidationError(where + ".device_id", "duplicate");
        d.profile.validate(where + ".profile");
        if (d.burned_in_mac.is_group()) throw ValidationError(where + ".mac", "must be a unicast address");
        for (std::size_t k = 0; k < d.screen_schedule.size(); ++k) {
            if (d.screen_schedule[k].at_ms < 0 || (k > 0 && d.screen_schedule[k].at_ms < d.screen_schedule[k - 1].at_ms)) {
                throw ValidationError(at(where + ".screen", k) + ".at_s", "must be >= 0 and non-decreasing");
            }
            if (!d.profile.screen_states.contains(d.screen_schedule[k].state)) {
                throw ValidationError(at(where + ".screen", k) + ".state", "profile has no behavior for this state");
            }
        }
        if (d.screen_schedule.empty() || d.screen_schedule.front().at_ms > 0) {
            if (!d.profile.screen_states.contains(ScreenState::DisplayOff)) {
                throw ValidationError(where + ".screen", "initial state is display off but profile lacks it");
            }
        }
        for (std::size_t k = 0; k < d.itinerary.size(); ++k) {
            const auto& stop = d.itinerary[k];
            const auto w = at(where + ".itinerary", k);
            if (stop.zone_id.empty()) throw ValidationError(w + ".zone_id", "must not be empty");
            if (stop.enter_ms < 0) throw ValidationError(w + ".enter_s", "must be >= 0");
            if (stop.exit_ms <= stop.enter_ms) throw ValidationError(w + ".exit_s", "must be after enter_s");
            if (k > 0 && stop.enter_ms < d.itinerary[k - 1].exit_ms) {
                throw ValidationError(w + ".enter_s", "overlaps or precedes the previous stop");
            }
        }
        for (std::size_t k = 0; k < d.power_cycles_ms.size(); ++k) {
            if (d.power_cycles_ms[k] < 0 || (k > 0 && d.power_cycles_ms[k] < d.power_cycles_ms[k - 1])) {
                throw ValidationError(at(where + ".power_cycles_s", k), "must be >= 0 and non-decreasing");
            }
        }
    }
}

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("scenario", "must be an object");
    Scenario s;
    if (!doc.contains("seed") || !doc["seed"].is_number_integer()) {
        throw ValidationError("seed", "missing or not an integer");
    }
    s.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("start_epoch_ms")) {
        if (!doc["start_epoch_ms"].is_number_integer()) throw ValidationError("start_epoch_ms", "must be an integer");
        s.start_epoch_ms = doc["start_epoch_ms"].get<EpochMs>();
    }
    s.duration_ms = seconds_to_ms(number(doc, "duration_s", "scenario"));

    for (std::size_t i = 0; i < doc.value("scanners", json::array()).size(); ++i) {
        const auto& sj = doc["scanners"][i];
        const auto where = at("scanners", i);
        s.scanners.push_back({text(sj, "scanner_id", where), text(sj, "zone_id", where)});
    }

    SimRng rng(s.seed, 0);
    const auto devices = doc.value("devices", json::array());
    for (std::size_t i = 0; i < devices.size(); ++i) {
        const auto& dj = devices[i];
        const auto where = at("devices", i);
        SimulatedDevice d;
        d.device_id = text(dj, "device_id", where);
        if (!dj.contains("profile")) throw ValidationError(where + ".profile", "missing");
        try {
            d.profile = profile_from_json(dj["profile"], where + ".profile");
        } catch (const ValidationError& e) {
            if (e.field() == "profile") {
                throw ValidationError(where + ".profile", std::string(e.what()).substr(e.field().size() + 2));
            }
            throw;
        }
        if (dj.contains("randomization")) {
            const auto r = parse_randomization(text(dj, "randomization", where));
            if (!r) throw ValidationError(where + ".randomization", "expected 'none' or 'per_event'");
            d.profile.randomization = *r;
        }
        // Draw defaults unconditionally so the stream does not depend on which
        // fields a document pins.
        const auto drawn_mac = rng.random_mac_with_oui(d.profile.oui);
        const auto drawn_ie = rng.bytes(static_cast<std::size_t>(rng.uniform_int(24, 48)));
        const auto drawn_vendor = rng.bytes(static_cast<std::size_t>(rng.uniform_int(7, 12)));
        if (dj.contains("mac")) {
            const auto mac = MacAddress::parse(text(dj, "mac", where));
            if (!mac) throw ValidationError(where + ".mac", "not a MAC address");
            d.burned_in_mac = *mac;
        } else {
            d.burned_in_mac = drawn_mac;
        }
        if (dj.contains("ie_hex")) {
            d.session_ie = hex_field(dj, "ie_hex", where);
            d.fixed_session_ie = dj.value("ie_fixed", true);
        } else {
            d.session_ie = drawn_ie;
        }
        d.vendor_ie = dj.contains("vendor_ie_hex") ? hex_field(dj, "vendor_ie_hex", where) : drawn_vendor;
        if (dj.contains("ssids")) {
            for (const auto& ssid : dj["ssids"]) d.ssids.push_back(ssid.get<std::string>());
            d.ssids = dedup_ssids(std::move(d.ssids));
        }
        const auto screen = dj.value("screen", json::array());
        for (std::size_t k = 0; k < screen.size(); ++k) {
            const auto w = at(where + ".screen", k);
            const auto state = parse_screen_state(text(screen[k], "state", w));
            if (!state) throw ValidationError(w + ".state", "expected 'off' or 'on'");
            d.screen_schedule.push_back({seconds_to_ms(number(screen[k], "at_s", w)), *state});
        }
        const auto itinerary = dj.value("itinerary", json::array());
        for (std::size_t k = 0; k < itinerary.size(); ++k) {
            const auto w = at(where + ".itinerary", k);
            d.itinerary.push_back({text(itinerary[k], "zone_id", w), seconds_to_ms(number(itinerary[k], "enter_s", w)),
                                   seconds_to_ms(number(itinerary[k], "exit_s", w))});
        }
        for (const auto& pc : dj.value("power_cycles_s", json::array())) {
            d.power_cycles_ms.push_back(seconds_to_ms(pc.get<double>()));
        }
        s.devices.push_back(std::move(d));
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("scenario", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("scenario", std::string("not valid JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

json scenario_to_json(const Scenario& s) {
    json doc = {{"seed", s.seed},
                {"start_epoch_ms", s.start_epoch_ms},
                {"duration_s", s.duration_ms / 1000.0},
                {"scanners", json::array()},
                {"devices", json::array()}};
    for (const auto& sc : s.scanners) doc["scanners"].push_back({{"scanner_id", sc.scanner_id}, {"zone_id", sc.zone_id}});
    for (const auto& d : s.devices) {
        json profile = {{"name", d.profile.name},
                        {"randomization", to_string(d.profile.randomization)},
                        {"vendor", d.profile.vendor}};
        const auto oui = MacAddress({std::uint8_t(d.profile.oui >> 16), std::uint8_t(d.profile.oui >> 8),
                                     std::uint8_t(d.profile.oui), 0, 0, 0})
                             .to_string()
                             .substr(0, 8);
        profile["oui"] = oui;
        for (const auto& [state, b] : d.profile.screen_states) {
            profile[state == ScreenState::DisplayOn ? "display_on" : "display_off"] = behavior_to_json(b);
        }
        json dj = {{"device_id", d.device_id},
                   {"profile", profile},
                   {"mac", d.burned_in_mac.to_string()},
                   {"vendor_ie_hex", to_hex(d.vendor_ie)},
                   {"ssids", d.ssids},
                   {"screen", json::array()},
                   {"itinerary", json::array()},
                   {"power_cycles_s", json::array()}};
        dj["ie_hex"] = to_hex(d.session_ie);
        if (!d.fixed_session_ie) dj["ie_fixed"] = false;
        for (const auto& c : d.screen_schedule) dj["screen"].push_back({{"at_s", c.at_ms / 1000.0}, {"state", to_string(c.state)}});
        for (const auto& st : d.itinerary) {
            dj["itinerary"].push_back({{"zone_id", st.zone_id}, {"enter_s", st.enter_ms / 1000.0}, {"exit_s", st.exit_ms / 1000.0}});
        }
        for (auto pc : d.power_cycles_ms) dj["power_cycles_s"].push_back(pc / 1000.0);
        doc["devices"].push_back(std::move(dj));
    }
    return doc;
}

}  // namespace probesense::sim

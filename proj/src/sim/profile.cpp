#include "probesense/sim/profile.hpp"

#include <algorithm>
#include <cctype>

#include "probesense/core/errors.hpp"

namespace probesense::sim {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

constexpr double minutes(int m, int s = 0) { return m * 60.0 + s; }

DeviceProfile make(std::string name, Randomization r, std::string vendor, std::uint32_t oui,
                   ScreenBehavior off, ScreenBehavior on) {
    DeviceProfile p;
    p.name = std::move(name);
    p.randomization = r;
    p.vendor = std::move(vendor);
    p.oui = oui;
    p.screen_states[ScreenState::DisplayOff] = off;
    p.screen_states[ScreenState::DisplayOn] = on;
    return p;
}

// Measured per-phone probing behavior: events/hr, avg packets per event,
// min / max / mode inter-event interval.
const std::vector<DeviceProfile>& builtin_profiles() {
    static const std::vector<DeviceProfile> profiles = {
        make("iPhone6S", Randomization::PerEvent, "Apple", 0x28CFE9,
             {10, 1, 33, minutes(11, 15), minutes(9)},
             {54, 2, 3, minutes(3), 45}),
        make("SamsungS7", Randomization::PerEvent, "Samsung", 0x5CF8A1,
             {13, 6, minutes(2, 9), minutes(7, 46), minutes(2, 10)},
             {18, 9, 6, minutes(6, 5), minutes(3)}),
        make("SamsungJ5", Randomization::None, "Samsung", 0x8425DB,
             {4, 10, minutes(9, 12), minutes(15, 22), std::nullopt},
             {19, 10, minutes(2, 8), minutes(8, 36), minutes(2, 8)}),
        make("XiaomiMiNote3", Randomization::None, "Xiaomi", 0xA89CED,
             {89, 5, 1, minutes(9, 29), minutes(1)},
             {24, 5, minutes(1), minutes(9, 2), minutes(1)}),
    };
    return profiles;
}

}  // namespace

const char* to_string(Randomization r) { return r == Randomization::PerEvent ? "per_event" : "none"; }

const char* to_string(ScreenState s) { return s == ScreenState::DisplayOn ? "on" : "off"; }

std::optional<ScreenState> parse_screen_state(std::string_view text) {
    const auto t = lower(text);
    if (t == "off" || t == "displayoff" || t == "display_off") return ScreenState::DisplayOff;
    if (t == "on" || t == "displayon" || t == "display_on") return ScreenState::DisplayOn;
    return std::nullopt;
}

std::optional<Randomization> parse_randomization(std::string_view text) {
    const auto t = lower(text);
    if (t == "none") return Randomization::None;
    if (t == "per_event" || t == "perevent") return Randomization::PerEvent;
    return std::nullopt;
}

void DeviceProfile::validate(const std::string& where) const {
    if (name.empty()) throw ValidationError(where + ".name", "must not be empty");
    if (screen_states.empty()) throw ValidationError(where + ".screen_states", "at least one state required");
    for (const auto& [state, b] : screen_states) {
        const std::string f = where + "." + (state == ScreenState::DisplayOn ? "display_on" : "display_off");
        if (!(b.events_per_hour > 0)) throw ValidationError(f + ".events_per_hour", "must be > 0");
        if (b.packets_per_event < 1) throw ValidationError(f + ".packets_per_event", "must be >= 1");
        if (!(b.interval_min_s >= 0) || b.interval_max_s < b.interval_min_s) {
            throw ValidationError(f + ".interval_min_s", "need 0 <= interval_min <= interval_max");
        }
        if (b.interval_mode_s && (*b.interval_mode_s < b.interval_min_s || *b.interval_mode_s > b.interval_max_s)) {
            throw ValidationError(f + ".interval_mode_s", "need interval_min <= interval_mode <= interval_max");
        }
    }
}

const ScreenBehavior& DeviceProfile::behavior(ScreenState s) const {
    auto it = screen_states.find(s);
    if (it == screen_states.end()) {
        throw ValidationError("profile." + name, std::string("no behavior for display ") + to_string(s));
    }
    return it->second;
}

DeviceProfile builtin_profile(std::string_view model_name) {
    for (const auto& p : builtin_profiles()) {
        if (p.name == model_name) return p;
    }
    std::string known;
    for (const auto& n : builtin_models()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("profile", "unknown model '" + std::string(model_name) + "' (available: " + known + ")");
}

std::vector<std::string> builtin_models() {
    std::vector<std::string> names;
    for (const auto& p : builtin_profiles()) names.push_back(p.name);
    return names;
}

}  // namespace probesense::sim

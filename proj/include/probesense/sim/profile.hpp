#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace probesense::sim {

enum class Randomization { None, PerEvent };
enum class ScreenState { DisplayOff, DisplayOn };

const char* to_string(Randomization r);
const char* to_string(ScreenState s);
/// Accepts "off"/"on"/"DisplayOff"/"DisplayOn" (case-insensitive).
std::optional<ScreenState> parse_screen_state(std::string_view text);
std::optional<Randomization> parse_randomization(std::string_view text);

/// Probing behavior of one phone in one screen state.
struct ScreenBehavior {
    double events_per_hour = 0;
    int packets_per_event = 1;
    double interval_min_s = 0;
    double interval_max_s = 0;
    std::optional<double> interval_mode_s;
};

/// Generative model of one phone model.
struct DeviceProfile {
    std::string name;
    Randomization randomization = Randomization::None;
    std::map<ScreenState, ScreenBehavior> screen_states;
    /// Vendor and OUI used for burned-in addresses.
    std::string vendor;
    std::uint32_t oui = 0;

    /// Throws ValidationError (field prefixed with `where`).
    void validate(const std::string& where = "profile") const;
    const ScreenBehavior& behavior(ScreenState s) const;
};

/// Built-in models: iPhone6S, SamsungS7, SamsungJ5, XiaomiMiNote3.
DeviceProfile builtin_profile(std::string_view model_name);
std::vector<std::string> builtin_models();

}  // namespace probesense::sim

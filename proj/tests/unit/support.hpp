#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "probesense/sim/scenario.hpp"

namespace probesense::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("probesense-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::size_t count_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty();
    return n;
}

inline sim::SimulatedDevice make_device(const std::string& id, const std::string& model,
                                        std::vector<sim::ItineraryStop> itinerary, std::uint8_t tag,
                                        sim::ScreenState screen = sim::ScreenState::DisplayOn) {
    sim::SimulatedDevice d;
    d.device_id = id;
    d.profile = sim::builtin_profile(model);
    const auto oui = d.profile.oui;
    d.burned_in_mac = MacAddress({std::uint8_t(oui >> 16), std::uint8_t(oui >> 8), std::uint8_t(oui), 0x10, 0x00, tag});
    d.session_ie = {0x00, 0x04, 't', 'e', 's', 't', 0x01, 0x02, tag};
    d.vendor_ie = {0xdd, 0x03, 0x00, 0x50, 0xf2};
    d.screen_schedule = {{0, screen}};
    d.itinerary = std::move(itinerary);
    return d;
}

}  // namespace probesense::testing

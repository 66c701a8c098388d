#include <doctest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "probesense/sim/scenario.hpp"
#include "support.hpp"

using probesense::testing::make_device;
using probesense::testing::read_file;
using probesense::testing::TempDir;

namespace {

struct Run {
    int exit_code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(PROBESENSE_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::size_t rows(const std::string& csv) {
    std::size_t n = 0;
    for (char c : csv) n += c == '\n';
    return n == 0 ? 0 : n - 1;
}

void write_scenario(const std::filesystem::path& path) {
    using namespace probesense::sim;
    Scenario s;
    s.seed = 4;
    s.duration_ms = 45 * 60'000;
    s.scanners = {{"s-a", "A"}, {"s-b", "B"}};
    s.devices.push_back(make_device("x", "XiaomiMiNote3", {{"A", 0, 20 * 60'000}, {"B", 22 * 60'000, 45 * 60'000}}, 1));
    s.devices.push_back(make_device("i", "iPhone6S", {{"B", 0, 45 * 60'000}}, 2));
    std::ofstream(path) << scenario_to_json(s).dump(2);
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("phone experiment for Xiaomi display off") {
        const auto r = run("phone-experiment --model XiaomiMiNote3 --screen off --duration 3600 --seed 2");
        CHECK(r.exit_code == 0);
        CHECK(r.out.rfind("event_time_ms,packets,gap_s\n", 0) == 0);
        CHECK(rows(r.out) >= 76);
        CHECK(rows(r.out) <= 102);
    }

    TEST_CASE("phone experiment for J5 display off") {
        const auto r = run("phone-experiment --model SamsungJ5 --screen off --duration 3600 --seed 1");
        CHECK(r.exit_code == 0);
        CHECK(rows(r.out) >= 3);
        CHECK(rows(r.out) <= 5);
        CHECK(r.out.find(",10,") != std::string::npos);
    }

    TEST_CASE("zero duration prints only the header") {
        const auto r = run("phone-experiment --model SamsungJ5 --duration 0");
        CHECK(r.exit_code == 0);
        CHECK(r.out == "event_time_ms,packets,gap_s\n");
    }

    TEST_CASE("unknown model is a validation error naming the choices") {
        const auto r = run("phone-experiment --model NokiaBrick");
        CHECK(r.exit_code == 1);
        CHECK(r.out.find("XiaomiMiNote3") != std::string::npos);
    }

    TEST_CASE("sweep interval must be shorter than the expiry window") {
        TempDir dir;
        write_scenario(dir / "s.json");
        const auto r = run("simulate --scenario " + (dir / "s.json").string() + " --out " + (dir / "out").string() +
                           " --sweep-interval 300 --expiry-window 240");
        CHECK(r.exit_code == 1);
        CHECK_FALSE(std::filesystem::exists(dir / "out" / "archive"));
    }

    TEST_CASE("missing required option") {
        CHECK(run("simulate --out /tmp/x").exit_code == 1);
        CHECK(run("").exit_code == 1);
    }

    TEST_CASE("simulate then replay with verification") {
        TempDir dir;
        write_scenario(dir / "s.json");
        const auto out = dir / "out";
        const auto sim = run("simulate --scenario " + (dir / "s.json").string() + " --out " + out.string());
        REQUIRE_MESSAGE(sim.exit_code == 0, sim.out);
        for (const char* f : {"summary.json", "accuracy.csv", "flows.csv", "sankey.json", "run.json", "ground_truth.json"}) {
            CAPTURE(f);
            CHECK(std::filesystem::exists(out / f));
        }
        const auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
        CHECK(summary["flow_total"] == 1);

        const auto again = run("simulate --scenario " + (dir / "s.json").string() + " --out " + out.string());
        CHECK(again.exit_code == 1);

        const auto replay = run("replay --archive " + (out / "archive").string() + " --out " + (dir / "replay").string() +
                                " --verify " + out.string());
        CHECK_MESSAGE(replay.exit_code == 0, replay.out);
        CHECK(replay.out.find("verify: identical") != std::string::npos);
        CHECK(read_file(dir / "replay" / "sankey.json") == read_file(out / "sankey.json"));
    }

    TEST_CASE("the same seed reproduces the outputs") {
        TempDir dir;
        write_scenario(dir / "s.json");
        const std::string base = "simulate --scenario " + (dir / "s.json").string() + " --seed 9 --out ";
        REQUIRE(run(base + (dir / "a").string()).exit_code == 0);
        REQUIRE(run(base + (dir / "b").string()).exit_code == 0);
        for (const char* f : {"summary.json", "accuracy.csv", "flows.csv", "ground_truth.json"}) {
            CAPTURE(f);
            CHECK(read_file(dir / "a" / f) == read_file(dir / "b" / f));
        }
        REQUIRE(run(base.substr(0, base.find("--seed")) + "--seed 10 --out " + (dir / "c").string()).exit_code == 0);
        CHECK(read_file(dir / "a" / "ground_truth.json") != read_file(dir / "c" / "ground_truth.json"));
    }

    TEST_CASE("serve answers health checks and exits on its own") {
        TempDir dir;
        const auto r = run("serve --gateway-config " + (dir / "gw.json").string() + " --data " + (dir / "data").string() +
                           " --port 0 --run-for 0.5");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("listening on") != std::string::npos);
    }
}

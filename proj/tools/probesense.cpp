// probesense command line: simulate, phone-experiment, serve, replay.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "probesense/agent/edge_agent.hpp"
#include "probesense/collector/collector.hpp"
#include "probesense/core/errors.hpp"
#include "probesense/density/density_service.hpp"
#include "probesense/gateway/http_server.hpp"
#include "probesense/journey/journey.hpp"
#include "probesense/pipeline/pipeline.hpp"
#include "probesense/sim/experiment_report.hpp"
#include "probesense/sim/simulator.hpp"
#include "probesense/transport/in_memory_bus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace probesense;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

/// Tunables shared by the subcommands. Values come from, in rising
/// priority: defaults, the --config file, command-line flags.
struct Tunables {
    double posting_interval_s = 30;
    double sweep_interval_s = 60;
    double expiry_window_s = 240;
    double gap_threshold_s = 300;
    double failure_rate = 0;
    std::uint64_t fault_seed = 0;
    std::optional<std::uint64_t> seed;
    std::string pseudonym_salt;
};

void load_config_file(const std::string& path, Tunables& t) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config", std::string("not valid JSON: ") + e.what());
    }
    auto num = [&](const char* key, double& dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw ValidationError(std::string("config.") + key, "must be a number");
        dst = j[key].get<double>();
    };
    num("posting_interval_s", t.posting_interval_s);
    num("sweep_interval_s", t.sweep_interval_s);
    num("expiry_window_s", t.expiry_window_s);
    num("gap_threshold_s", t.gap_threshold_s);
    num("failure_rate", t.failure_rate);
    if (j.contains("fault_seed")) t.fault_seed = j["fault_seed"].get<std::uint64_t>();
    if (j.contains("seed")) t.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("pseudonym_salt")) t.pseudonym_salt = j["pseudonym_salt"].get<std::string>();
}

/// Flag values for one subcommand, merged over the config file in resolve().
struct TunableFlags {
    Tunables values;
    std::string config_path;

    void add(CLI::App& cmd, bool with_agent) {
        cmd.add_option("--config", config_path, "JSON file with tunables (overridden by flags)");
        if (with_agent) {
            cmd.add_option("--posting-interval", values.posting_interval_s, "Agent posting interval [s]");
            cmd.add_option("--failure-rate", values.failure_rate, "Injected publish failure probability");
            cmd.add_option("--fault-seed", values.fault_seed, "Seed for injected failures");
            cmd.add_option("--pseudonym-salt", values.pseudonym_salt, "Pseudonymize archived MACs with this salt");
        }
        cmd.add_option("--sweep-interval", values.sweep_interval_s, "Density sweep interval [s]");
        cmd.add_option("--expiry-window", values.expiry_window_s, "Presence expiry window [s]");
        cmd.add_option("--gap-threshold", values.gap_threshold_s, "Journey visit gap threshold [s]");
    }

    /// Defaults, then file, then flags that were actually given.
    Tunables resolve(CLI::App& cmd) const {
        Tunables t;
        if (!config_path.empty()) load_config_file(config_path, t);
        auto given = [&](const char* name) { return cmd.get_option_no_throw(name) && cmd.count(name) > 0; };
        if (given("--posting-interval")) t.posting_interval_s = values.posting_interval_s;
        if (given("--failure-rate")) t.failure_rate = values.failure_rate;
        if (given("--fault-seed")) t.fault_seed = values.fault_seed;
        if (given("--pseudonym-salt")) t.pseudonym_salt = values.pseudonym_salt;
        if (given("--sweep-interval")) t.sweep_interval_s = values.sweep_interval_s;
        if (given("--expiry-window")) t.expiry_window_s = values.expiry_window_s;
        if (given("--gap-threshold")) t.gap_threshold_s = values.gap_threshold_s;
        return t;
    }
};

pipeline::PipelineConfig to_pipeline_config(const Tunables& t) {
    pipeline::PipelineConfig c;
    c.posting_interval_ms = seconds_to_ms(t.posting_interval_s);
    c.density.sweep_interval_ms = seconds_to_ms(t.sweep_interval_s);
    c.density.expiry_window_ms = seconds_to_ms(t.expiry_window_s);
    c.gap_threshold_ms = seconds_to_ms(t.gap_threshold_s);
    c.publish_failure_rate = t.failure_rate;
    c.fault_seed = t.fault_seed;
    if (!t.pseudonym_salt.empty()) c.pseudonym_salt = t.pseudonym_salt;
    c.validate();
    return c;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out, std::optional<std::uint64_t> seed,
                 bool overwrite, const Tunables& t) {
    auto config = to_pipeline_config(t);
    config.overwrite = overwrite;
    auto scenario = sim::load_scenario(scenario_path);
    if (const auto override_seed = seed ? seed : t.seed) {
        // Seed-drawn defaults (MACs, IEs) must follow the new seed too.
        auto doc = json::parse(std::ifstream(scenario_path));
        doc["seed"] = *override_seed;
        scenario = sim::scenario_from_json(doc);
    }
    fs::create_directories(out);
    const auto result = pipeline::run_pipeline(scenario, config, out);
    const auto summary = pipeline::write_reports(scenario, config, result);
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_phone_experiment(const std::string& model, const std::string& screen, double duration_s, std::uint64_t seed,
                         const std::string& out) {
    const auto state = sim::parse_screen_state(screen);
    if (!state) throw ValidationError("screen", "expected 'off' or 'on'");
    if (duration_s < 0) throw ValidationError("duration", "must be >= 0");
    const auto report = sim::run_phone_experiment(model, *state, seconds_to_ms(duration_s), seed);
    if (out.empty() || out == "-") {
        report.write_csv(std::cout);
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write " + out);
        report.write_csv(f);
    }
    return kExitOk;
}

int cmd_replay(const std::string& archive, const std::string& out, std::optional<EpochMs> from,
               std::optional<EpochMs> to, const std::string& verify, const Tunables& t) {
    density::DensityConfig dcfg;
    dcfg.sweep_interval_ms = seconds_to_ms(t.sweep_interval_s);
    dcfg.expiry_window_ms = seconds_to_ms(t.expiry_window_s);
    dcfg.validate();
    const EpochMs gap = seconds_to_ms(t.gap_threshold_s);
    if (gap <= 0) throw ValidationError("gap_threshold", "must be > 0");
    if (!fs::is_directory(archive)) throw ValidationError("archive", archive + " is not a directory");

    const auto scanners = collector::archived_scanners(archive);
    std::vector<collector::ArchiveRecord> records;
    EpochMs first = std::numeric_limits<EpochMs>::max(), last = 0;
    for (const auto& [id, first_received] : scanners) {
        first = std::min(first, first_received);
        for (auto& r : collector::read_all(archive, id)) {
            last = std::max(last, r.received_at);
            records.push_back(std::move(r));
        }
    }
    if (scanners.empty()) first = 0;
    // A simulate run records its time range next to the archive; heartbeat
    // batches are not archived, so the last record may precede the true end.
    const auto run_file = fs::absolute(archive).lexically_normal().parent_path() / "run.json";
    if (std::ifstream rf(run_file); rf) {
        const auto run = json::parse(rf);
        first = run.at("start_epoch_ms").get<EpochMs>();
        last = first + seconds_to_ms(run.at("duration_s").get<double>());
    }
    const EpochMs range_from = from.value_or(first);
    const EpochMs range_to = to.value_or(last);

    const auto samples = density::replay_archive(archive, dcfg, range_from, range_to);
    const auto matrix = journey::flows(journey::build_trajectories(std::move(records), gap), range_from, range_to + 1);

    fs::create_directories(out);
    const auto density_dir = fs::path(out) / "density";
    std::error_code ec;
    fs::remove_all(density_dir, ec);
    density::CountStore store(out);
    for (const auto& s : samples) store.append(s);
    {
        std::ofstream f(fs::path(out) / "flows.csv");
        f << "from_scanner,to_scanner,estimated\n";
        for (const auto& [edge, v] : matrix.flows) f << edge.first << ',' << edge.second << ',' << v << '\n';
    }
    {
        auto doc = journey::sankey_export(matrix);
        doc["ambiguous_devices"] = matrix.ambiguous_devices;
        std::ofstream f(fs::path(out) / "sankey.json");
        f << doc.dump(2) << "\n";
    }
    std::cout << "replayed " << samples.size() << " samples for " << scanners.size() << " scanners\n";

    if (!verify.empty()) {
        density::CountStore reference(verify);
        bool same = true;
        for (const auto& [id, f] : scanners) {
            if (reference.read(id) != store.read(id)) {
                std::cout << "mismatch: " << id << "\n";
                same = false;
            }
        }
        std::cout << (same ? "verify: identical\n" : "verify: DIFFERENT\n");
        if (!same) return kExitRuntime;
    }
    return kExitOk;
}

/// Feeds a scenario's observations to live agents at wall-clock pace.
void demo_feed(const sim::Scenario& scenario, std::shared_ptr<transport::Broker> bus, double speed) {
    const auto out = sim::run_scenario(scenario);
    const EpochMs real_start = system_clock()();
    auto shift = [&](EpochMs t) {
        return real_start + static_cast<EpochMs>(static_cast<double>(t - scenario.start_epoch_ms) / speed);
    };
    std::map<std::string, std::unique_ptr<agent::EdgeAgent>> agents;
    for (const auto& sc : scenario.scanners) {
        agent::AgentConfig cfg;
        cfg.scanner_id = sc.scanner_id;
        agents[sc.scanner_id] = std::make_unique<agent::EdgeAgent>(cfg, bus);
        agents[sc.scanner_id]->start(real_start);
    }
    for (const auto& o : out.observations) {
        const EpochMs due = shift(o.captured_at);
        while (!g_interrupted && system_clock()() < due) {
            const EpochMs now = system_clock()();
            for (auto& [id, a] : agents) a->tick(now);
            std::this_thread::sleep_for(std::chrono::milliseconds(std::clamp<EpochMs>(due - now, 1, 200)));
        }
        if (g_interrupted) break;
        auto shifted = o;
        shifted.captured_at = due;
        agents[o.scanner_id]->ingest(shifted);
    }
    const EpochMs now = system_clock()();
    for (auto& [id, a] : agents) a->shutdown(now);
}

int cmd_serve(const std::string& config_path, const std::string& data_dir, const std::string& host,
              std::uint16_t port, const std::string& bootstrap_token, const std::string& demo_scenario,
              double demo_speed, double run_for_s, const Tunables& t) {
    density::DensityConfig dcfg;
    dcfg.sweep_interval_ms = seconds_to_ms(t.sweep_interval_s);
    dcfg.expiry_window_ms = seconds_to_ms(t.expiry_window_s);
    dcfg.validate();
    if (demo_speed <= 0) throw ValidationError("demo-speed", "must be > 0");

    gateway::ConfigStore config(config_path);
    if (!bootstrap_token.empty() && !config.authenticate(bootstrap_token)) {
        config.add_token(bootstrap_token, {"bootstrap", gateway::Role::SuperAdmin});
    }
    auto bus = transport::InMemoryBus::create();
    collector::CollectorConfig ccfg;
    ccfg.store_root = fs::path(data_dir) / "archive";
    collector::Collector coll(ccfg, bus, system_clock());
    coll.start();
    density::CountStore counts(data_dir);
    density::RealtimeChannel channel;
    density::DensityService dens(dcfg, bus, &counts, &channel);
    dens.start();
    dens.run_timer(system_clock());
    gateway::RealtimeHub hub(config);
    hub.attach(channel);
    hub.attach(*bus);
    gateway::GatewayOptions opts;
    opts.archive_root = ccfg.store_root;
    opts.gap_threshold_ms = seconds_to_ms(t.gap_threshold_s);
    gateway::GatewayApp app(config, counts, hub, opts);
    gateway::HttpServer server(app, host, port);
    const auto bound = server.start();
    std::cout << "listening on " << host << ":" << bound << std::endl;

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread feeder;
    if (!demo_scenario.empty()) {
        auto scenario = sim::load_scenario(demo_scenario);
        feeder = std::thread([scenario, bus, demo_speed] { demo_feed(scenario, bus, demo_speed); });
    }
    const auto started = std::chrono::steady_clock::now();
    while (!g_interrupted) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        if (run_for_s > 0 && std::chrono::steady_clock::now() - started > std::chrono::duration<double>(run_for_s)) break;
    }
    g_interrupted = true;
    if (feeder.joinable()) feeder.join();
    server.stop();
    hub.stop();
    dens.stop();
    coll.stop();
    if (const auto h = coll.halted()) {
        std::cerr << "collector halted: " << *h << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive Wi-Fi probe sensing: simulation, services and replay"};
    app.require_subcommand(1);

    auto* sim_cmd = app.add_subcommand("simulate", "Run a scenario through the full pipeline");
    std::string scenario_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool overwrite = false;
    TunableFlags sim_flags;
    sim_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    sim_cmd->add_option("--out", out_dir, "Output directory")->required();
    sim_cmd->add_option("--seed", seed, "Override the scenario seed");
    sim_cmd->add_flag("--overwrite", overwrite, "Replace archive/ and density/ in the output directory");
    sim_flags.add(*sim_cmd, true);

    auto* phone_cmd = app.add_subcommand("phone-experiment", "Single-phone probe cadence report (CSV)");
    std::string model, screen = "off", csv_out;
    double duration_s = 3600;
    std::uint64_t phone_seed = 1;
    phone_cmd->add_option("--model", model, "Device model")->required();
    phone_cmd->add_option("--screen", screen, "Display state: off or on");
    phone_cmd->add_option("--duration", duration_s, "Duration [s]");
    phone_cmd->add_option("--seed", phone_seed, "Random seed");
    phone_cmd->add_option("--out", csv_out, "CSV path (default stdout)");

    auto* serve_cmd = app.add_subcommand("serve", "Run bus, collector, density service and HTTP gateway");
    std::string gw_config = "gateway.json", data_dir = "data-live", host = "127.0.0.1", token, demo;
    std::uint16_t port = 8080;
    double demo_speed = 1.0, run_for = 0;
    TunableFlags serve_flags;
    serve_cmd->add_option("--gateway-config", gw_config, "Gateway configuration document");
    serve_cmd->add_option("--data", data_dir, "Directory for archive and count series");
    serve_cmd->add_option("--host", host, "Listen address");
    serve_cmd->add_option("--port", port, "Listen port (0 picks one)");
    serve_cmd->add_option("--bootstrap-token", token, "Add a SuperAdmin token if missing");
    serve_cmd->add_option("--demo-scenario", demo, "Feed live traffic from this scenario");
    serve_cmd->add_option("--demo-speed", demo_speed, "Time compression for the demo feed");
    serve_cmd->add_option("--run-for", run_for, "Exit after this many seconds (0 = until signal)");
    serve_flags.add(*serve_cmd, false);

    auto* replay_cmd = app.add_subcommand("replay", "Recompute counts and flows from an archive");
    std::string archive, replay_out, verify;
    std::optional<EpochMs> from, to;
    TunableFlags replay_flags;
    replay_cmd->add_option("--archive", archive, "Archive directory")->required();
    replay_cmd->add_option("--out", replay_out, "Output directory")->required();
    replay_cmd->add_option("--from", from, "Range start, epoch ms (default: run.json beside the archive, else first receipt)");
    replay_cmd->add_option("--to", to, "Range end, epoch ms inclusive (default: run.json beside the archive, else last receipt)");
    replay_cmd->add_option("--verify", verify, "Compare against the count series under this directory");
    replay_flags.add(*replay_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*sim_cmd) return cmd_simulate(scenario_path, out_dir, seed, overwrite, sim_flags.resolve(*sim_cmd));
        if (*phone_cmd) return cmd_phone_experiment(model, screen, duration_s, phone_seed, csv_out);
        if (*serve_cmd) {
            return cmd_serve(gw_config, data_dir, host, port, token, demo, demo_speed, run_for,
                             serve_flags.resolve(*serve_cmd));
        }
        if (*replay_cmd) return cmd_replay(archive, replay_out, from, to, verify, replay_flags.resolve(*replay_cmd));
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}

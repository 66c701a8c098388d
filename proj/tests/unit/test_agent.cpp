#include <doctest.h>

#include <set>

#include "probesense/agent/edge_agent.hpp"
#include "probesense/core/errors.hpp"
#include "probesense/core/fingerprint.hpp"
#include "probesense/transport/in_memory_bus.hpp"

using namespace probesense;
using namespace probesense::agent;
using nlohmann::json;

namespace {

constexpr EpochMs T0 = 1'600'000'000'000;
const MacAddress kXiaomi = MacAddress::from_string("A8:9C:ED:00:00:01");
const MacAddress kRandom = MacAddress::from_string("DA:A1:19:00:00:01");
const MacAddress kVmware = MacAddress::from_string("00:0C:29:00:00:01");

ProbeObservation probe(const MacAddress& mac, EpochMs at, int rssi = -60, std::string ie = "ie-bytes") {
    ProbeObservation o;
    o.mac = mac;
    o.rssi_dbm = rssi;
    o.ie_bytes = Bytes(ie.begin(), ie.end());
    o.captured_at = at;
    o.scanner_id = "s1";
    return o;
}

struct Harness {
    std::shared_ptr<transport::InMemoryBus> bus = transport::InMemoryBus::create();
    std::shared_ptr<transport::Session> watcher = bus->connect("watcher");
    std::vector<transport::Message> data, log;

    Harness() {
        watcher->subscribe("probesense/v1/+/data", [this](const transport::Message& m) { data.push_back(m); });
        watcher->subscribe("probesense/v1/+/log", [this](const transport::Message& m) { log.push_back(m); });
    }

    AgentConfig config() const {
        AgentConfig c;
        c.scanner_id = "s1";
        c.sw_version = "2.3.4";
        c.local_ip = "10.0.0.7";
        return c;
    }

    std::vector<ObservationBatch> batches() const {
        std::vector<ObservationBatch> out;
        for (const auto& m : data) out.push_back(parse_batch(m.payload));
        return out;
    }
};

}  // namespace

TEST_SUITE("batch_format") {
    TEST_CASE("field names and round trip") {
        ObservationBatch b;
        b.scanner_id = "s1";
        b.batch_start = T0;
        b.batch_end = T0 + 30'000;
        BatchEntry e;
        e.mac = kXiaomi;
        e.vendor = "Xiaomi";
        e.first_seen = T0 + 1;
        e.last_seen = T0 + 2;
        e.packet_count = 3;
        e.rssi_min = -64;
        e.rssi_max = -58;
        e.ssids = {"home", "work"};
        e.ie_fingerprint = fingerprint({}, {}).hex();
        b.entries.push_back(e);

        const auto j = json::parse(serialize_batch(b));
        std::set<std::string> keys;
        for (const auto& [k, v] : j.items()) keys.insert(k);
        CHECK(keys == std::set<std::string>{"scanner_id", "batch_start", "batch_end", "entries"});
        keys.clear();
        for (const auto& [k, v] : j["entries"][0].items()) keys.insert(k);
        CHECK(keys == std::set<std::string>{"mac", "randomized", "vendor", "first_seen", "last_seen", "packet_count",
                                            "rssi_min", "rssi_max", "ssids", "ie_fingerprint", "ie_changed"});
        CHECK(j["entries"][0]["mac"] == "A8:9C:ED:00:00:01");
        CHECK(j["batch_end"] == T0 + 30'000);
        CHECK(parse_batch(serialize_batch(b)) == b);
    }

    TEST_CASE("parser rejects malformed batches") {
        CHECK_THROWS_AS(parse_batch("{\"scanner_id\":\"s1\""), ValidationError);
        CHECK_THROWS_AS(parse_batch("[]"), ValidationError);
        CHECK_THROWS_AS(parse_batch(R"({"scanner_id":"s1","batch_start":0,"batch_end":10})"), ValidationError);
        const auto bad_entry = R"({"scanner_id":"s1","batch_start":0,"batch_end":10,"entries":[{"mac":"zz"}]})";
        CHECK_THROWS_AS(parse_batch(bad_entry), ValidationError);
    }

    TEST_CASE("lifecycle payloads") {
        const auto birth = json::parse(serialize_lifecycle({LifecycleMessage::Kind::Birth, "s1", "1.0", "10.0.0.1", 5}));
        CHECK(birth == json{{"type", "birth"}, {"scanner_id", "s1"}, {"sw_version", "1.0"}, {"local_ip", "10.0.0.1"}, {"ts", 5}});
        const auto off = json::parse(serialize_lifecycle({LifecycleMessage::Kind::Offline, "s1", "1.0", "10.0.0.1", 6}));
        CHECK(off == json{{"type", "offline"}, {"scanner_id", "s1"}, {"ts", 6}});
        const auto parsed = parse_lifecycle(off.dump());
        CHECK(parsed.kind == LifecycleMessage::Kind::Offline);
        CHECK(parsed.ts == 6);
        CHECK_THROWS_AS(parse_lifecycle(R"({"type":"zombie","scanner_id":"s1","ts":1})"), ValidationError);
    }

    TEST_CASE("topics") {
        CHECK(data_topic("s1") == "probesense/v1/s1/data");
        CHECK(log_topic("s1") == "probesense/v1/s1/log");
        CHECK(scanner_from_topic("probesense/v1/s9/data") == "s9");
        CHECK(scanner_from_topic("probesense/v2/s9/data").empty());
        CHECK(scanner_from_topic("probesense/v1/s9").empty());
    }
}

TEST_SUITE("edge_agent") {
    TEST_CASE("start publishes exactly one birth with version and address") {
        Harness h;
        EdgeAgent agent(h.config(), h.bus);
        CHECK(agent.start(T0));
        CHECK(agent.status() == AgentStatus::Running);
        REQUIRE(h.log.size() == 1);
        CHECK(h.log[0].topic == "probesense/v1/s1/log");
        const auto birth = parse_lifecycle(h.log[0].payload);
        CHECK(birth.kind == LifecycleMessage::Kind::Birth);
        CHECK(birth.sw_version == "2.3.4");
        CHECK(birth.local_ip == "10.0.0.7");
        CHECK(agent.start(T0));
        CHECK(h.log.size() == 1);
    }

    TEST_CASE("kill delivers offline, clean shutdown does not") {
        Harness h;
        {
            EdgeAgent agent(h.config(), h.bus);
            agent.start(T0);
            agent.shutdown(T0 + 1000);
            CHECK(agent.status() == AgentStatus::ShutDown);
        }
        CHECK(h.log.size() == 1);
        EdgeAgent agent(h.config(), h.bus);
        agent.start(T0 + 2000);
        agent.kill();
        REQUIRE(h.log.size() == 3);
        const auto offline = parse_lifecycle(h.log[2].payload);
        CHECK(offline.kind == LifecycleMessage::Kind::Offline);
        CHECK(offline.scanner_id == "s1");
    }

    TEST_CASE("six packets from one MAC become one entry") {
        Harness h;
        EdgeAgent agent(h.config(), h.bus);
        agent.start(T0);
        for (int i = 0; i < 6; ++i) agent.ingest(probe(kXiaomi, T0 + 1000 + i * 100, -60 - i));
        const auto batch = agent.flush(T0 + 30'000);
        REQUIRE(batch.entries.size() == 1);
        const auto& e = batch.entries[0];
        CHECK(e.packet_count == 6);
        CHECK(e.first_seen == T0 + 1000);
        CHECK(e.last_seen == T0 + 1500);
        CHECK(e.rssi_min == -65);
        CHECK(e.rssi_max == -60);
        CHECK(e.vendor == "Xiaomi");
        CHECK_FALSE(e.randomized);
        CHECK_FALSE(e.ie_changed);
        CHECK(e.ie_fingerprint == fingerprint(as_bytes("ie-bytes"), {}).hex());
        REQUIRE(h.data.size() == 1);
        CHECK(parse_batch(h.data[0].payload) == batch);
    }

    TEST_CASE("vendor filter, randomized bypass and rssi floor") {
        Harness h;
        auto cfg = h.config();
        cfg.rssi_floor_dbm = -70;
        EdgeAgent agent(cfg, h.bus);
        agent.start(T0);
        agent.ingest(probe(kVmware, T0 + 1));
        agent.ingest(probe(kRandom, T0 + 2));
        agent.ingest(probe(kXiaomi, T0 + 3, -80));
        agent.ingest(probe(kXiaomi, T0 + 4, -70));
        auto bad = probe(kXiaomi, 0);
        agent.ingest(bad);
        const auto m = agent.metrics();
        CHECK(m.dropped_vendor == 1);
        CHECK(m.dropped_rssi == 1);
        CHECK(m.dropped_malformed == 1);
        CHECK(m.ingested == 2);
        CHECK(m.ingested + m.dropped_vendor + m.dropped_rssi + m.dropped_malformed == 5);
        const auto batch = agent.flush(T0 + 30'000);
        REQUIRE(batch.entries.size() == 2);
        CHECK(batch.entries[0].mac == kRandom);
        CHECK(batch.entries[0].randomized);
        CHECK(batch.entries[0].vendor == "unknown");
        CHECK(batch.entries[1].mac == kXiaomi);
    }

    TEST_CASE("fingerprint change replaces the stored value and is flagged") {
        Harness h;
        EdgeAgent agent(h.config(), h.bus);
        agent.start(T0);
        agent.ingest(probe(kXiaomi, T0 + 1, -60, "first"));
        agent.ingest(probe(kXiaomi, T0 + 2, -60, "second"));
        const auto batch = agent.flush(T0 + 30'000);
        REQUIRE(batch.entries.size() == 1);
        CHECK(batch.entries[0].ie_changed);
        CHECK(batch.entries[0].ie_fingerprint == fingerprint(as_bytes("second"), {}).hex());
        CHECK(agent.metrics().fingerprint_changes == 1);
    }

    TEST_CASE("empty intervals still publish heartbeats") {
        Harness h;
        EdgeAgent agent(h.config(), h.bus);
        agent.start(T0);
        agent.tick(T0 + 29'999);
        CHECK(h.data.empty());
        agent.tick(T0 + 30'000);
        agent.tick(T0 + 60'000);
        const auto batches = h.batches();
        REQUIRE(batches.size() == 2);
        CHECK(batches[0].entries.empty());
        CHECK(batches[1].entries.empty());
        CHECK(batches[0].batch_start == T0);
        CHECK(batches[0].batch_end == T0 + 30'000);
        CHECK(batches[1].batch_start == T0 + 30'000);
    }

    TEST_CASE("batch end is the flush time, last_seen the packet time") {
        Harness h;
        EdgeAgent agent(h.config(), h.bus);
        agent.start(T0);
        agent.ingest(probe(kXiaomi, T0 + 1'000));
        agent.tick(T0 + 30'000);
        const auto batches = h.batches();
        REQUIRE(batches.size() == 1);
        CHECK(batches[0].batch_end == T0 + 30'000);
        CHECK(batches[0].entries.at(0).last_seen == T0 + 1'000);
        CHECK(agent.pending_entries() == 0);
    }

    TEST_CASE("a failed publish is delivered exactly once later") {
        Harness h;
        int remaining_failures = 1;
        h.bus->set_publish_fault([&](const std::string& client, const std::string& topic) {
            if (client != "s1" || topic.find("/data") == std::string::npos) return false;
            return remaining_failures-- > 0;
        });
        EdgeAgent agent(h.config(), h.bus);
        agent.start(T0);
        agent.ingest(probe(kXiaomi, T0 + 1'000));
        agent.flush(T0 + 30'000);
        CHECK(h.data.empty());
        CHECK(agent.retained() == 1);
        agent.ingest(probe(kRandom, T0 + 40'000));
        agent.flush(T0 + 60'000);
        CHECK(agent.retained() == 0);

        std::multiset<std::string> seen;
        for (const auto& b : h.batches()) {
            for (const auto& e : b.entries) seen.insert(e.mac.to_string());
        }
        CHECK(seen.count(kXiaomi.to_string()) == 1);
        CHECK(seen.count(kRandom.to_string()) == 1);
        CHECK(agent.metrics().publish_failures == 1);
    }

    TEST_CASE("retained batches are bounded, oldest discarded") {
        Harness h;
        h.bus->set_publish_fault([](const std::string&, const std::string& topic) {
            return topic.find("/data") != std::string::npos;
        });
        auto cfg = h.config();
        cfg.retained_capacity = 3;
        EdgeAgent agent(cfg, h.bus);
        agent.start(T0);
        for (int i = 1; i <= 5; ++i) agent.flush(T0 + i * 30'000);
        CHECK(agent.retained() == 3);
        CHECK(agent.metrics().retained_discarded == 2);
        h.bus->set_publish_fault({});
        agent.flush(T0 + 6 * 30'000);
        const auto batches = h.batches();
        REQUIRE(batches.size() == 4);
        CHECK(batches[0].batch_end == T0 + 3 * 30'000);
        CHECK(batches[3].batch_end == T0 + 6 * 30'000);
    }

    TEST_CASE("unreachable broker backs off exponentially up to the cap") {
        Harness h;
        h.bus->set_reachable(false);
        EdgeAgent agent(h.config(), h.bus);
        CHECK_FALSE(agent.start(T0));
        CHECK(agent.status() == AgentStatus::Backoff);
        EpochMs now = T0;
        std::vector<EpochMs> delays;
        for (int i = 0; i < 8; ++i) {
            delays.push_back(agent.next_connect_at() - now);
            now = agent.next_connect_at();
            agent.tick(now);
        }
        CHECK(delays == std::vector<EpochMs>{1'000, 2'000, 4'000, 8'000, 16'000, 32'000, 60'000, 60'000});
        h.bus->set_reachable(true);
        agent.tick(agent.next_connect_at());
        CHECK(agent.status() == AgentStatus::Running);
        CHECK(h.log.size() == 1);
    }

    TEST_CASE("shutdown flushes the last batch and stops ingesting") {
        Harness h;
        EdgeAgent agent(h.config(), h.bus);
        agent.start(T0);
        agent.ingest(probe(kXiaomi, T0 + 5'000));
        const auto last = agent.shutdown(T0 + 10'000);
        REQUIRE(last.has_value());
        CHECK(last->entries.size() == 1);
        CHECK(h.data.size() == 1);
        agent.ingest(probe(kXiaomi, T0 + 11'000));
        CHECK(agent.metrics().dropped_not_running == 1);
        CHECK_FALSE(agent.shutdown(T0 + 12'000).has_value());
    }

    TEST_CASE("serialized size does not grow with packets per event") {
        std::vector<std::size_t> sizes;
        for (int k : {1, 10, 100}) {
            Harness h;
            EdgeAgent agent(h.config(), h.bus);
            agent.start(T0);
            for (int i = 0; i < k; ++i) agent.ingest(probe(kXiaomi, T0 + 1'000 + i * 10, -60, std::string(200, 'x')));
            agent.flush(T0 + 30'000);
            REQUIRE(h.data.size() == 1);
            const auto& payload = h.data[0].payload;
            CHECK(payload.find(std::string(20, 'x')) == std::string::npos);
            CHECK(payload.find(to_hex(as_bytes(std::string(20, 'x')))) == std::string::npos);
            sizes.push_back(payload.size());
        }
        // only the decimal width of packet_count and last_seen may differ
        CHECK(sizes[1] - sizes[0] <= 2);
        CHECK(sizes[2] - sizes[1] <= 2);
    }

    TEST_CASE("invalid configuration") {
        auto bus = transport::InMemoryBus::create();
        AgentConfig c;
        c.scanner_id = "a/b";
        CHECK_THROWS_AS(EdgeAgent(c, bus), ValidationError);
        c.scanner_id = "s1";
        c.posting_interval_ms = 0;
        CHECK_THROWS_AS(EdgeAgent(c, bus), ValidationError);
    }
}

#include <doctest.h>

#include <random>
#include <sstream>

#include "probesense/core/bounded_queue.hpp"
#include "probesense/core/bytes.hpp"
#include "probesense/core/errors.hpp"
#include "probesense/core/fingerprint.hpp"
#include "probesense/core/mac_address.hpp"
#include "probesense/core/observation.hpp"
#include "probesense/core/oui_database.hpp"
#include "probesense/core/time.hpp"

using namespace probesense;

namespace {

MacAddress mac(const char* s) { return MacAddress::from_string(s); }

OuiDatabase acme_db(bool mobile) {
    std::istringstream csv("AA:BB:CC,AcmePhones\nA8:BB:CC,AcmePhones\n");
    auto db = OuiDatabase::from_csv(csv);
    if (mobile) db.add_mobile_vendor("AcmePhones");
    return db;
}

}  // namespace

TEST_SUITE("mac") {
    TEST_CASE("classification examples") {
        CHECK(classify_mac(mac("DA:A1:19:00:00:01")) == MacClass::Randomized);
        CHECK(classify_mac(mac("A8:9C:ED:00:00:01")) == MacClass::BurnedIn);
        CHECK(classify_mac(mac("02:00:00:00:00:00")) == MacClass::Randomized);
        CHECK(classify_mac(mac("03:00:00:00:00:00")) == MacClass::BurnedIn);  // local but group
        CHECK(classify_mac(mac("01:00:5E:00:00:01")) == MacClass::BurnedIn);
    }

    TEST_CASE("classification matches bit arithmetic on random octets") {
        std::mt19937_64 rng(7);
        for (int i = 0; i < 100'000; ++i) {
            MacAddress::Octets o{};
            for (auto& b : o) b = static_cast<std::uint8_t>(rng());
            const MacAddress m(o);
            const bool expected = ((o[0] >> 1) & 1) == 1 && (o[0] & 1) == 0;
            REQUIRE((classify_mac(m) == MacClass::Randomized) == expected);
        }
    }

    TEST_CASE("canonical text form") {
        CHECK(mac("aa:bb:cc:11:22:33").to_string() == "AA:BB:CC:11:22:33");
        CHECK(mac("aa-bb-cc-11-22-33").to_string() == "AA:BB:CC:11:22:33");
        CHECK(mac("AA:BB:CC:11:22:33").oui() == 0xAABBCCu);
        CHECK_FALSE(MacAddress::parse("AA:BB:CC:11:22"));
        CHECK_FALSE(MacAddress::parse("AA:BB-CC:11:22:33"));
        CHECK_FALSE(MacAddress::parse("GG:BB:CC:11:22:33"));
        CHECK_FALSE(MacAddress::parse("AA:BB:CC:11:22:333"));
        CHECK_THROWS_AS(MacAddress::from_string("nope"), ValidationError);
    }

    TEST_CASE("round trip through text for random addresses") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 1000; ++i) {
            MacAddress::Octets o{};
            for (auto& b : o) b = static_cast<std::uint8_t>(rng());
            const MacAddress m(o);
            const auto text = m.to_string();
            REQUIRE(text.size() == 17);
            REQUIRE(MacAddress::from_string(text) == m);
        }
    }
}

TEST_SUITE("oui") {
    TEST_CASE("vendor_lookup examples") {
        const auto db = acme_db(true);
        CHECK(db.lookup_prefix(0xAABBCC) == "AcmePhones");
        CHECK(vendor_lookup(db, mac("A8:BB:CC:11:22:33")) == "AcmePhones");
        CHECK(vendor_lookup(OuiDatabase{}, mac("A8:BB:CC:11:22:33")) == kUnknownVendor);
        CHECK(vendor_lookup(db, mac("DA:BB:CC:11:22:33")) == kUnknownVendor);
        // 0xAA carries the locally administered bit, so this address is randomized
        CHECK(vendor_lookup(db, mac("AA:BB:CC:11:22:33")) == kUnknownVendor);
    }

    TEST_CASE("vendor_lookup never fails on arbitrary addresses") {
        const auto& db = OuiDatabase::builtin();
        std::mt19937_64 rng(5);
        for (int i = 0; i < 10'000; ++i) {
            MacAddress::Octets o{};
            for (auto& b : o) b = static_cast<std::uint8_t>(rng());
            CHECK_NOTHROW(vendor_lookup(db, MacAddress(o)));
        }
    }

    TEST_CASE("is_mobile_vendor examples") {
        CHECK(is_mobile_vendor(acme_db(true), mac("A8:BB:CC:11:22:33")));
        CHECK_FALSE(is_mobile_vendor(acme_db(false), mac("A8:BB:CC:11:22:33")));
        CHECK(is_mobile_vendor(OuiDatabase{}, mac("DA:A1:19:00:00:01")));
        CHECK(is_mobile_vendor(OuiDatabase{}, mac("02:00:00:00:00:00")));
    }

    TEST_CASE("csv parsing skips comments and rejects bad lines") {
        std::istringstream good("# header\n\nAA:BB:CC,Acme Phones Inc\n11-22-33,Other\n");
        const auto db = OuiDatabase::from_csv(good);
        CHECK(db.size() == 2);
        CHECK(db.lookup_prefix(0xAABBCC) == "Acme Phones Inc");
        CHECK(db.lookup_prefix(0x112233) == "Other");

        std::istringstream no_comma("AA:BB:CC Acme\n");
        CHECK_THROWS_AS(OuiDatabase::from_csv(no_comma), ValidationError);
        std::istringstream bad_prefix("# x\nZZ:BB:CC,Acme\n");
        try {
            OuiDatabase::from_csv(bad_prefix);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "oui:2");
        }
    }

    TEST_CASE("bundled data files match the builtin table") {
        const std::filesystem::path dir = PROBESENSE_DATA_DIR;
        const auto db = OuiDatabase::load(dir / "oui.csv", dir / "mobile_vendors.txt");
        const auto& builtin = OuiDatabase::builtin();
        CHECK(db.size() == builtin.size());
        CHECK(db.mobile_vendors() == builtin.mobile_vendors());
        CHECK(db.lookup_prefix(0xA89CED) == "Xiaomi");
        CHECK_FALSE(db.is_mobile("VMware"));
    }
}

TEST_SUITE("fingerprint") {
    TEST_CASE("md5 reference vectors") {
        CHECK(fingerprint({}, {}).hex() == "d41d8cd98f00b204e9800998ecf8427e");
        CHECK(fingerprint(as_bytes("abc"), {}).hex() == "900150983cd24fb0d6963f7d28e17f72");
        CHECK(fingerprint(as_bytes("The quick brown fox jumps over the lazy dog"), {}).hex() ==
              "9e107d9d372bb6826bd81d3542a419d6");
    }

    TEST_CASE("inputs are concatenated without separator") {
        const auto abc = fingerprint(as_bytes("abc"), {});
        CHECK(fingerprint({}, as_bytes("abc")) == abc);
        CHECK(fingerprint(as_bytes("ab"), as_bytes("c")) == abc);
        CHECK(fingerprint(as_bytes("a"), as_bytes("bc")) == abc);
        CHECK(fingerprint(as_bytes("abd"), {}) != abc);
    }

    TEST_CASE("deterministic over random inputs") {
        std::mt19937_64 rng(3);
        for (int i = 0; i < 10'000; ++i) {
            Bytes ie(rng() % 64), vendor(rng() % 16);
            for (auto& b : ie) b = static_cast<std::uint8_t>(rng());
            for (auto& b : vendor) b = static_cast<std::uint8_t>(rng());
            const auto a = fingerprint(ie, vendor);
            const auto b = fingerprint(ie, vendor);
            REQUIRE(a == b);
            REQUIRE(a.hex().size() == 32);
        }
    }

    TEST_CASE("from_hex validation") {
        CHECK(IeFingerprint::from_hex("d41d8cd98f00b204e9800998ecf8427e") == fingerprint({}, {}));
        CHECK_THROWS_AS(IeFingerprint::from_hex("D41D8CD98F00B204E9800998ECF8427E"), ValidationError);
        CHECK_THROWS_AS(IeFingerprint::from_hex("d41d8c"), ValidationError);
    }
}

TEST_SUITE("observation") {
    TEST_CASE("ssid dedup keeps first occurrence order") {
        CHECK(dedup_ssids({"b", "a", "b", "c", "a"}) == std::vector<std::string>{"b", "a", "c"});
        std::vector<std::string> into{"x", "y"};
        union_ssids(into, {"y", "z", "x", "w"});
        CHECK(into == std::vector<std::string>{"x", "y", "z", "w"});
    }

    TEST_CASE("well-formedness") {
        ProbeObservation o;
        o.mac = mac("02:00:00:00:00:01");
        o.captured_at = 1;
        o.scanner_id = "s1";
        CHECK(is_well_formed(o));
        o.captured_at = 0;
        CHECK_FALSE(is_well_formed(o));
        o.captured_at = 5;
        o.scanner_id.clear();
        CHECK_FALSE(is_well_formed(o));
    }
}

TEST_SUITE("bytes") {
    TEST_CASE("hex") {
        CHECK(to_hex(as_bytes("\x01\xab\xff")) == "01abff");
        CHECK(from_hex("01ABff") == Bytes{0x01, 0xab, 0xff});
        CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);
        CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
    }

    TEST_CASE("base64 reference vectors") {
        const std::pair<const char*, const char*> vectors[] = {
            {"", ""}, {"f", "Zg=="}, {"fo", "Zm8="}, {"foo", "Zm9v"}, {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="},
            {"foobar", "Zm9vYmFy"}};
        for (const auto& [plain, encoded] : vectors) {
            CHECK(base64_encode(plain) == encoded);
            CHECK(base64_decode(encoded) == plain);
        }
    }
}

TEST_SUITE("time") {
    TEST_CASE("utc day helpers") {
        CHECK(utc_date(0) == "1970-01-01");
        CHECK(utc_date(1'600'000'000'000) == "2020-09-13");
        CHECK(utc_day_start("2020-09-13") == 1'599'955'200'000);
        CHECK(utc_date(utc_day_start("2020-09-13") - 1) == "2020-09-12");
        CHECK_THROWS(utc_day_start("2020-13-45x"));
    }

    TEST_CASE("alignment") {
        CHECK(align_up(0, 60'000) == 0);
        CHECK(align_up(1, 60'000) == 60'000);
        CHECK(align_up(60'000, 60'000) == 60'000);
        CHECK(align_down(119'999, 60'000) == 60'000);
        CHECK(seconds_to_ms(1.5) == 1500);
    }
}

TEST_SUITE("bounded_queue") {
    TEST_CASE("drops oldest when full") {
        BoundedQueue<int> q(2);
        CHECK(q.push(1));
        CHECK(q.push(2));
        CHECK_FALSE(q.push(3));
        CHECK(q.dropped() == 1);
        CHECK(q.try_pop() == 2);
        CHECK(q.try_pop() == 3);
        CHECK_FALSE(q.try_pop());
    }

    TEST_CASE("pop_for returns after close") {
        BoundedQueue<int> q(4);
        q.close();
        CHECK_FALSE(q.pop_for(std::chrono::milliseconds(10)));
        CHECK(q.closed());
    }
}

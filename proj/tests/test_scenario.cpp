#include <doctest.h>

#include <string>

#include "rina/scenario.hpp"

using namespace rina;

namespace {
const std::string kDir = TEST_SCENARIO_DIR;
}

TEST_CASE("relay_ping topology parses and validates") {
    auto r = parse_scenario_file(kDir + "/relay_ping.json");
    REQUIRE(r.ok());
    const Scenario& s = *r.scenario;
    CHECK(s.name == "relay-ping");
    CHECK(s.nodes.size() == 3);
    CHECK(s.links.size() == 2);
    CHECK(s.difs.size() == 3);
    // Units are converted once, exactly.
    CHECK(s.links[0].delay == from_ms(1));
    CHECK(s.links[0].rate_bps == 1000000);
    CHECK(s.dif("top")->timers.delta_t() == from_ms(102));
    CHECK(s.dif("top")->rto == from_ms(30));
    // Defaulted stacking: hA1 sits over hA0.
    CHECK(s.nodes[0].ipcps[1].over == std::vector<std::string>{"hA0"});
    // Defaulted timeouts: 10 * delta_t.
    CHECK(s.dif("top")->allocate_timeout == 10 * from_ms(102));
}

TEST_CASE("border router with two ranks is rejected with the 3-level rule") {
    auto r = parse_scenario_file(kDir + "/invalid_border.json");
    REQUIRE_FALSE(r.ok());
    bool mentions = false;
    for (const auto& d : r.diagnostics) {
        if (d.find(">= 3 DIF ranks") != std::string::npos) mentions = true;
    }
    CHECK(mentions);
}

TEST_CASE("unknown dif reference is a validation error with a path") {
    auto r = parse_scenario(R"({
      "name": "x", "qos_cubes": [{"id": 1}],
      "difs": [{"name": "bot", "rank": 0, "mpl_ms": 1, "a_timer_ms": 1, "r_timer_ms": 1}],
      "nodes": [{"name": "n", "kind": "host", "ipcps": [
        {"name": "i0", "dif": "bot", "address": 1},
        {"name": "i1", "dif": "nosuch", "address": 2}]}]
    })");
    REQUIRE_FALSE(r.ok());
    bool found = false;
    for (const auto& d : r.diagnostics) {
        if (d.find("/nodes/0/ipcps/1/dif") != std::string::npos &&
            d.find("nosuch") != std::string::npos) {
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("syntax errors come back as ParseError diagnostics") {
    auto r = parse_scenario("{ not json");
    REQUIRE_FALSE(r.ok());
    CHECK(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].find("ParseError") != std::string::npos);
}

TEST_CASE("semantic rules: ber range, duplicate addresses, payload floor") {
    auto base = parse_scenario_file(kDir + "/twohost.json");
    REQUIRE(base.ok());

    SUBCASE("ber out of range") {
        std::string text = emit_scenario(*base.scenario);
        auto pos = text.find("\"ber\": 0.0");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 10, "\"ber\": 1.5");
        auto r = parse_scenario(text);
        CHECK_FALSE(r.ok());
    }
    SUBCASE("duplicate address within a dif") {
        Scenario s = *base.scenario;
        s.nodes[1].ipcps[1].address = s.nodes[0].ipcps[1].address;
        auto r = parse_scenario(emit_scenario(s));
        CHECK_FALSE(r.ok());
    }
    SUBCASE("ping payload below the message floor") {
        Scenario s = *base.scenario;
        s.apps[0].payload_bytes = 8;
        auto r = parse_scenario(emit_scenario(s));
        CHECK_FALSE(r.ok());
    }
}

TEST_CASE("parse(emit(s)) round-trips to an equivalent scenario") {
    for (const char* file : {"/relay_ping.json", "/relay_lossy.json", "/border.json", "/twohost.json",
                             "/deny.json", "/slow_response.json"}) {
        auto first = parse_scenario_file(kDir + file);
        REQUIRE(first.ok());
        auto second = parse_scenario(emit_scenario(*first.scenario));
        REQUIRE(second.ok());
        const Scenario &a = *first.scenario, &b = *second.scenario;
        CHECK(a.name == b.name);
        CHECK(a.seed == b.seed);
        CHECK(a.stop_time == b.stop_time);
        REQUIRE(a.difs.size() == b.difs.size());
        for (std::size_t i = 0; i < a.difs.size(); ++i) {
            CHECK(a.difs[i].name == b.difs[i].name);
            CHECK(a.difs[i].timers.mpl == b.difs[i].timers.mpl);
            CHECK(a.difs[i].timers.a_timer == b.difs[i].timers.a_timer);
            CHECK(a.difs[i].timers.r_timer == b.difs[i].timers.r_timer);
            CHECK(a.difs[i].rto == b.difs[i].rto);
            CHECK(a.difs[i].allocate_timeout == b.difs[i].allocate_timeout);
            CHECK(a.difs[i].cubes.size() == b.difs[i].cubes.size());
        }
        REQUIRE(a.links.size() == b.links.size());
        for (std::size_t i = 0; i < a.links.size(); ++i) {
            CHECK(a.links[i].delay == b.links[i].delay);
            CHECK(a.links[i].rate_bps == b.links[i].rate_bps);
            CHECK(a.links[i].ber == b.links[i].ber);
        }
        REQUIRE(a.apps.size() == b.apps.size());
        for (std::size_t i = 0; i < a.apps.size(); ++i) {
            CHECK(a.apps[i].apn == b.apps[i].apn);
            CHECK(a.apps[i].count == b.apps[i].count);
            CHECK(a.apps[i].interval == b.apps[i].interval);
            CHECK(a.apps[i].start_at == b.apps[i].start_at);
            CHECK(a.apps[i].payload_bytes == b.apps[i].payload_bytes);
        }
        CHECK(a.da_directory.size() == b.da_directory.size());
    }
}

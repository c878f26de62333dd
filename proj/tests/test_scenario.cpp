#include "doctest.h"

#include <string>

#include "ivnsim/scenario.hpp"
#include "support/scenario_builder.hpp"

using namespace ivnsim;

namespace {

bool has_error_at(const LoadResult& lr, const std::string& pointer_prefix) {
    for (const auto& e : lr.errors)
        if (e.rfind(pointer_prefix, 0) == 0) return true;
    return false;
}

const char* kFixtures[] = {
    "static_provisioning.json", "regular_8h.json", "regular_8h_jitter.json",
    "local_dos.json",           "cloud_dos.json",  "port_scan.json",
    "port_scan_open.json",
};

}  // namespace

TEST_CASE("every shipped fixture validates clean") {
    for (const char* name : kFixtures) {
        const auto lr = load_scenario_file(std::string(IVNSIM_SCENARIO_DIR) + "/" + name);
        INFO("fixture ", name);
        for (const auto& e : lr.errors) INFO(e);
        CHECK(lr.ok());
    }
}

TEST_CASE("schema violations are reported with their JSON pointer") {
    auto sc = testing::mini_scenario("bad", 1.0);

    SUBCASE("unknown NADS node in a monitor") {
        sc["monitors"] = nlohmann::json::array({{
            {"id", "m"},
            {"nads", "not-a-node"},
            {"stream", {{"ip_dst", "10.9.2.20"}}},
            {"metric_x", "frame_size"},
            {"metric_y", "bandwidth"},
            {"interval_ms", 100},
        }});
        const auto lr = load_scenario_text(sc.dump());
        CHECK(!lr.ok());
        CHECK(has_error_at(lr, "/monitors/0/nads"));
    }
    SUBCASE("overlapping monitors on one NADS are ambiguous") {
        auto monitor = nlohmann::json{
            {"id", "m0"},
            {"nads", "nads1"},
            {"stream", {{"ip_dst", "10.9.2.20"}}},
            {"metric_x", "frame_size"},
            {"metric_y", "bandwidth"},
            {"interval_ms", 100},
        };
        auto second = monitor;
        second["id"] = "m1";
        second["stream"] = {{"ip_dst", "10.9.2.20"}, {"l4_dst", 5004}};
        sc["monitors"] = nlohmann::json::array({monitor, second});
        const auto lr = load_scenario_text(sc.dump());
        CHECK(!lr.ok());
        CHECK(has_error_at(lr, "/monitors/1/stream"));
    }
    SUBCASE("non-positive duration") {
        sc["duration_s"] = 0.0;
        CHECK(has_error_at(load_scenario_text(sc.dump()), "/duration_s"));
    }
    SUBCASE("tunnel port outside the reserved set") {
        sc["tunnels"][0]["udp_port"] = 12345;
        CHECK(has_error_at(load_scenario_text(sc.dump()), "/tunnels/0/udp_port"));
    }
    SUBCASE("whitelist entries must not shadow the static matrix") {
        sc["whitelist"] = nlohmann::json::array({{
            {"src", "zc_a"},
            {"dst", "zc_b"},
            {"ip_proto", "udp"},
            {"l4_src", 30500},
            {"l4_dst", 30500},
        }});
        // Same 5-tuple as the tunneled matrix entry? The tunnel entry targets
        // the multicast group, so craft a direct shadow instead.
        sc["comm_matrix"].push_back(
            {{"src", "zc_a"}, {"dst", "zc_b"}, {"ip_proto", "udp"}, {"l4_src", 30500},
             {"l4_dst", 30500}});
        const auto lr = load_scenario_text(sc.dump());
        CHECK(!lr.ok());
        CHECK(has_error_at(lr, "/whitelist/0"));
    }
    SUBCASE("dos attacks need a fully specified target and positive duration") {
        sc["attacks"] = nlohmann::json::array({{
            {"name", "half"},
            {"kind", "dos_flood"},
            {"entry", "gw"},
            {"start_s", 1.0},
            {"duration_s", 0.0},
            {"rate_pps", 10.0},
            {"target", {{"ip_dst", "10.9.2.20"}}},
        }});
        const auto lr = load_scenario_text(sc.dump());
        CHECK(has_error_at(lr, "/attacks/0/target"));
        CHECK(has_error_at(lr, "/attacks/0/duration_s"));
    }
    SUBCASE("a FailSafe mode must shed optionals and keep criticals") {
        sc["compute_nodes"] = nlohmann::json::array({{{"id", "h1"}, {"role", "master"}}});
        sc["services"] = nlohmann::json::array({
            {{"id", "crit"}, {"criticality", "critical"}, {"node", "h1"}},
            {{"id", "opt"}, {"criticality", "optional"}, {"node", "h1"}},
        });
        sc["modes"] = nlohmann::json::array({{
            {"name", "FailSafe"},
            {"policy", {{"crit", "disabled"}, {"opt", "h1"}}},
        }});
        const auto lr = load_scenario_text(sc.dump());
        CHECK(has_error_at(lr, "/modes/0/policy/crit"));
        CHECK(has_error_at(lr, "/modes/0/policy/opt"));
    }
    SUBCASE("malformed addresses carry their location") {
        sc["topology"]["nodes"][0]["ip"] = "10.0.0";
        CHECK(has_error_at(load_scenario_text(sc.dump()), "/topology/nodes/0/ip"));
    }
    SUBCASE("links must reference known nodes") {
        sc["topology"]["links"].push_back({{"a", "sw1"}, {"b", "ghost"}});
        const auto lr = load_scenario_text(sc.dump());
        CHECK(!lr.ok());
    }
}

TEST_CASE("unreadable files surface as errors, not exceptions") {
    const auto lr = load_scenario_file("/nonexistent/path.json");
    CHECK(!lr.ok());
}

TEST_CASE("parse errors carry the origin") {
    const auto lr = load_scenario_text("{ not json", "broken.json");
    REQUIRE(!lr.ok());
    CHECK(lr.errors[0].find("broken.json") != std::string::npos);
}

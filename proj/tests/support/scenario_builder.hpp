#pragma once

// Small inline scenarios for engine-level tests: a two-switch backbone with
// one zone controller per side, a camera/infotainment pair, a gateway and
// the monitoring taps.

#include <string>

#include "nlohmann/json.hpp"

#include "ivnsim/scenario.hpp"

namespace ivnsim::testing {

inline nlohmann::json mini_topology() {
    return nlohmann::json::parse(R"({
        "nodes": [
            {"id": "sw1", "kind": "switch", "ip": "10.9.0.1"},
            {"id": "sw2", "kind": "switch", "ip": "10.9.0.2"},
            {"id": "zc_a", "kind": "zone_controller", "ip": "10.9.1.11"},
            {"id": "zc_b", "kind": "zone_controller", "ip": "10.9.2.11"},
            {"id": "cam", "kind": "camera", "ip": "10.9.1.20"},
            {"id": "ivi", "kind": "infotainment", "ip": "10.9.2.20"},
            {"id": "gw", "kind": "online_gateway", "ip": "10.9.1.30"},
            {"id": "ctl", "kind": "sdn_controller", "ip": "10.9.1.40"},
            {"id": "nads1", "kind": "nads", "ip": "10.9.1.50"},
            {"id": "nads2", "kind": "nads", "ip": "10.9.2.50"},
            {"id": "edge", "kind": "acdc_edge", "ip": "10.9.2.60"}
        ],
        "links": [
            {"a": "sw1", "b": "sw2"},
            {"a": "zc_a", "b": "sw1"}, {"a": "cam", "b": "sw1"},
            {"a": "gw", "b": "sw1"}, {"a": "ctl", "b": "sw1"}, {"a": "nads1", "b": "sw1"},
            {"a": "zc_b", "b": "sw2"}, {"a": "ivi", "b": "sw2"},
            {"a": "nads2", "b": "sw2"}, {"a": "edge", "b": "sw2"}
        ],
        "mirrors": [
            {"switch": "sw1", "nads": "nads1"},
            {"switch": "sw2", "nads": "nads2"}
        ]
    })");
}

/// Base scenario: one CAN tunnel spanning both zone controllers plus the
/// video whitelist; tests patch in streams, monitors, and attacks.
inline nlohmann::json mini_scenario(const std::string& name, double duration_s) {
    nlohmann::json sc;
    sc["name"] = name;
    sc["duration_s"] = duration_s;
    sc["seed"] = 1;
    sc["topology"] = mini_topology();
    sc["reserved_udp_ports"] = {30500};
    sc["tunnels"] = nlohmann::json::array({{
        {"domain", "drive"},
        {"multicast_ip", "239.9.0.1"},
        {"udp_port", 30500},
        {"members", {"zc_a", "zc_b"}},
    }});
    sc["comm_matrix"] = nlohmann::json::array({
        {{"src", "zc_a"}, {"tunnel", "drive"}},
        {{"src", "zc_b"}, {"tunnel", "drive"}},
    });
    return sc;
}

inline Scenario load_or_throw(const nlohmann::json& j) {
    auto lr = load_scenario_text(j.dump());
    if (!lr.ok()) {
        std::string all;
        for (const auto& e : lr.errors) all += e + "; ";
        throw std::runtime_error("test scenario invalid: " + all);
    }
    return std::move(lr.scenario);
}

}  // namespace ivnsim::testing

#include "doctest.h"

#include <sstream>

#include "ivnsim/engine.hpp"
#include "support/scenario_builder.hpp"

using namespace ivnsim;
using ivnsim::testing::load_or_throw;
using ivnsim::testing::mini_scenario;

namespace {

nlohmann::json can_stream_json() {
    return {{"id", "drive-a"}, {"domain", "drive"}, {"sender", "zc_a"},
            {"can_id", 256},   {"payload_len", 8},  {"cycle_ms", 10.0}};
}

nlohmann::json can_monitor_json() {
    return {{"id", "drive-mon"},
            {"nads", "nads1"},
            {"stream",
             {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
              {"l4_src", 30500}, {"l4_dst", 30500}}},
            {"metric_x", "frame_size"},
            {"metric_y", "cycle_deviation"},
            {"nominal_cycle_ms", 10.0},
            {"interval_ms", 1000},
            {"learning_intervals", 10},
            {"bandwidth", {{"fixed_h", 0.5}}}};
}

}  // namespace

TEST_CASE("an empty scenario runs to an empty result") {
    const Scenario sc = load_or_throw(mini_scenario("empty", 2.0));
    const RunResult r = run_scenario(sc, 1);
    CHECK(r.timings.empty());
    CHECK(r.summary["anomaly_reports_total"].get<std::uint64_t>() == 0);
}

TEST_CASE("same seed, byte-identical outputs; different seeds diverge") {
    auto j = mini_scenario("det", 12.0);
    j["can_streams"] = nlohmann::json::array({can_stream_json()});
    j["monitors"] = nlohmann::json::array({can_monitor_json()});
    j["attacks"] = nlohmann::json::array({{
        {"name", "burst"},
        {"kind", "dos_flood"},
        {"entry", "gw"},
        {"start_s", 10.5},
        {"start_jitter_ms", 100.0},
        {"duration_s", 1.0},
        {"rate_pps", 2000.0},
        {"target",
         {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
          {"l4_src", 30500}, {"l4_dst", 30500}}},
    }});
    const Scenario sc = load_or_throw(j);

    auto dump = [](const RunResult& r) {
        std::ostringstream os;
        r.log.write_jsonl(os);
        os << r.summary.dump();
        return os.str();
    };
    const std::string a = dump(run_scenario(sc, 5));
    const std::string b = dump(run_scenario(sc, 5));
    const std::string c = dump(run_scenario(sc, 6));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("ingress mirroring lets the NADS observe blocked traffic") {
    // The burst is forged onto the CAN tunnel from the gateway port: every
    // frame misses (wrong arrival port for the static rules) and is dropped,
    // yet the monitor's frame counts include it.
    auto j = mini_scenario("mirrored", 14.0);
    j["can_streams"] = nlohmann::json::array({can_stream_json()});
    j["monitors"] = nlohmann::json::array({can_monitor_json()});
    j["attacks"] = nlohmann::json::array({{
        {"name", "forged"},
        {"kind", "dos_flood"},
        {"entry", "gw"},
        {"start_s", 11.2},
        {"duration_s", 1.0},
        {"rate_pps", 5000.0},
        {"target",
         {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
          {"l4_src", 30500}, {"l4_dst", 30500}}},
    }});
    const Scenario sc = load_or_throw(j);
    const RunResult r = run_scenario(sc, 3);

    const auto& atk = r.summary["attacks"]["forged"];
    CHECK(atk["emitted"].get<std::uint64_t>() == 5000);
    CHECK(atk["dropped"].get<std::uint64_t>() == 5000);
    CHECK(atk["delivered"].get<std::uint64_t>() == 0);
    CHECK(atk["in_flight"].get<std::uint64_t>() == 0);
    // Detected purely from the mirror tap.
    CHECK(atk["detected"].get<bool>());
    CHECK(r.summary["anomaly_reports_total"].get<std::uint64_t>() >= 1);

    SUBCASE("egress mirroring hides what the data plane drops") {
        auto j2 = j;
        j2["mirror_point"] = "egress";
        j2["name"] = "egress";
        const Scenario sc2 = load_or_throw(j2);
        const RunResult r2 = run_scenario(sc2, 3);
        CHECK(!r2.summary["attacks"]["forged"]["detected"].get<bool>());
        CHECK(r2.summary["anomaly_reports_total"].get<std::uint64_t>() == 0);
    }
}

TEST_CASE("spoofed source addresses miss the arrival-port pinned static rules") {
    auto j = mini_scenario("spoof", 3.0);
    j["attacks"] = nlohmann::json::array({{
        {"name", "zc-spoof"},
        {"kind", "spoof"},
        {"entry", "gw"},
        {"forged_src", "zc_a"},
        {"start_s", 1.0},
        {"duration_s", 1.0},
        {"rate_pps", 100.0},
        {"target",
         {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
          {"l4_src", 30500}, {"l4_dst", 30500}}},
    }});
    const Scenario sc = load_or_throw(j);
    const RunResult r = run_scenario(sc, 2);
    const auto& atk = r.summary["attacks"]["zc-spoof"];
    CHECK(atk["emitted"].get<std::uint64_t>() == 100);
    CHECK(atk["dropped"].get<std::uint64_t>() == 100);
    CHECK(atk["delivered"].get<std::uint64_t>() == 0);
}

TEST_CASE("replayed tunnel traffic is dropped from the wrong port, forwarded from the right one") {
    auto base = mini_scenario("replay", 6.0);
    base["can_streams"] = nlohmann::json::array({can_stream_json()});
    nlohmann::json replay = {
        {"name", "replayed-can"},
        {"kind", "replay"},
        {"entry", "gw"},
        {"start_s", 4.0},
        {"slice_stream",
         {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
          {"l4_src", 30500}, {"l4_dst", 30500}}},
        {"record_from_s", 1.0},
        {"record_to_s", 2.0},
    };
    SUBCASE("from the online gateway every replayed frame misses") {
        auto j = base;
        j["attacks"] = nlohmann::json::array({replay});
        const RunResult r = run_scenario(load_or_throw(j), 2);
        const auto& atk = r.summary["attacks"]["replayed-can"];
        CHECK(atk["emitted"].get<std::uint64_t>() == 100);
        CHECK(atk["dropped"].get<std::uint64_t>() == 100);
    }
    SUBCASE("from the compromised zone controller the replay rides the valid flow") {
        auto j = base;
        auto inside = replay;
        inside["entry"] = "zc_a";
        inside["name"] = "replayed-can-inside";
        j["attacks"] = nlohmann::json::array({inside});
        const RunResult r = run_scenario(load_or_throw(j), 2);
        const auto& atk = r.summary["attacks"]["replayed-can-inside"];
        CHECK(atk["emitted"].get<std::uint64_t>() == 100);
        CHECK(atk["delivered"].get<std::uint64_t>() == 100);
        CHECK(atk["dropped"].get<std::uint64_t>() == 0);
    }
    SUBCASE("replaying an empty slice aborts the attack at start") {
        auto j = base;
        auto hollow = replay;
        hollow["slice_stream"] = {{"ip_dst", "1.2.3.4"}};
        hollow["name"] = "nothing";
        j["attacks"] = nlohmann::json::array({hollow});
        const RunResult r = run_scenario(load_or_throw(j), 2);
        CHECK(r.summary["attacks"]["nothing"]["emitted"].get<std::uint64_t>() == 0);
    }
}

TEST_CASE("an empty port range scans nothing") {
    auto j = mini_scenario("no-scan", 2.0);
    j["attacks"] = nlohmann::json::array({{
        {"name", "hollow"},
        {"kind", "port_scan"},
        {"entry", "gw"},
        {"start_s", 0.5},
        {"target_ips", {"10.9.2.11"}},
        {"port_from", 100},
        {"port_to", 99},  // from > to: empty range
        {"probe", "tcp_syn"},
    }});
    const RunResult r = run_scenario(load_or_throw(j), 1);
    CHECK(r.summary["attacks"]["hollow"]["probes"].get<std::uint64_t>() == 0);
    CHECK(r.summary["attacks"]["hollow"]["emitted"].get<std::uint64_t>() == 0);
}

TEST_CASE("every applied directive chains back to reports and the attack") {
    auto j = mini_scenario("causality", 16.0);
    j["can_streams"] = nlohmann::json::array({can_stream_json()});
    j["monitors"] = nlohmann::json::array({can_monitor_json()});
    j["compute_nodes"] = nlohmann::json::array({
        {{"id", "h1"}, {"role", "master"}, {"capacity", 4}},
        {{"id", "h2"}, {"role", "worker"}, {"capacity", 4}},
    });
    j["services"] = nlohmann::json::array({
        {{"id", "crit"}, {"criticality", "critical"}, {"node", "h1"}},
        {{"id", "opt"}, {"criticality", "optional"}, {"node", "h2"}},
    });
    j["modes"] = nlohmann::json::array({
        {{"name", "Normal"}, {"policy", {{"crit", "h1"}, {"opt", "h2"}}}},
        {{"name", "FailSafe"}, {"policy", {{"crit", "h2"}, {"opt", "disabled"}}}},
    });
    j["initial_mode"] = "Normal";
    j["fusion"] = {{"window_s", 60}, {"k_threshold", 1}};
    j["decision_rules"] = nlohmann::json::array(
        {{{"classification", "anomaly_report"}, {"stage", "containment"},
          {"set_mode", "FailSafe"}}});
    j["attacks"] = nlohmann::json::array({{
        {"name", "burst"},
        {"kind", "dos_flood"},
        {"entry", "gw"},
        {"start_s", 11.2},
        {"duration_s", 1.0},
        {"rate_pps", 3000.0},
        {"target",
         {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
          {"l4_src", 30500}, {"l4_dst", 30500}}},
    }});
    j["ftti_budget_ms"] = 5000.0;
    const RunResult r = run_scenario(load_or_throw(j), 3);
    CHECK(r.summary["attacks"]["burst"]["within_ftti"].get<bool>());

    // Walk the chain: applied directive -> incident -> contributing report
    // -> attack id on the report.
    std::uint64_t directive_incident = 0;
    std::uint32_t directive_attack = 0;
    for (const auto& ev : r.log.records()) {
        if (ev.type == "directive_at_actuator" &&
            ev.payload["action"] == "set_operation_mode") {
            directive_incident = ev.payload["incident_id"].get<std::uint64_t>();
            directive_attack = ev.payload["attack"].get<std::uint32_t>();
        }
    }
    REQUIRE(directive_incident != 0);
    bool incident_found = false;
    for (const auto& ev : r.log.records()) {
        if (ev.type == "incident" &&
            ev.payload["incident_id"].get<std::uint64_t>() == directive_incident) {
            incident_found = true;
            CHECK(ev.payload["contributing"].get<std::uint64_t>() >= 1);
            CHECK(ev.payload["attack"].get<std::uint32_t>() == directive_attack);
        }
    }
    CHECK(incident_found);
    bool report_found = false;
    for (const auto& ev : r.log.records()) {
        if (ev.type == "anomaly_report" &&
            ev.payload["attack"].get<std::uint32_t>() == directive_attack)
            report_found = true;
    }
    CHECK(report_found);
    CHECK(r.summary["final_mode"] == "FailSafe");
}

TEST_CASE("switch counters reconcile with ingress totals") {
    auto j = mini_scenario("counters", 5.0);
    j["can_streams"] = nlohmann::json::array({can_stream_json()});
    j["attacks"] = nlohmann::json::array({{
        {"name", "probe"},
        {"kind", "port_scan"},
        {"entry", "gw"},
        {"start_s", 1.0},
        {"target_ips", {"10.9.2.11"}},
        {"port_from", 1000},
        {"port_to", 1019},
        {"probe", "tcp_syn"},
    }});
    const Scenario sc = load_or_throw(j);
    const RunResult r = run_scenario(sc, 9);
    // can stream: 100 Hz from t=0 on sw1 and sw2; probes: 20 packet-ins.
    const auto& sw1 = r.summary["switches"]["sw1"];
    CHECK(sw1["packet_in_count"].get<std::uint64_t>() >= 20);
    CHECK(sw1["ingress_frames"].get<std::uint64_t>() > 400);
}

TEST_CASE("a 10 pps flood emits exactly ten frames in one second") {
    auto j = mini_scenario("slow-flood", 14.0);
    j["can_streams"] = nlohmann::json::array({can_stream_json()});
    j["monitors"] = nlohmann::json::array({can_monitor_json()});
    j["attacks"] = nlohmann::json::array({{
        {"name", "drip"},
        {"kind", "dos_flood"},
        {"entry", "gw"},
        {"start_s", 11.0},
        {"duration_s", 1.0},
        {"rate_pps", 10.0},
        {"target",
         {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
          {"l4_src", 30500}, {"l4_dst", 30500}}},
    }});
    const RunResult r = run_scenario(load_or_throw(j), 1);
    CHECK(r.summary["attacks"]["drip"]["emitted"].get<std::uint64_t>() == 10);
}

TEST_CASE("total-frame flood specs derive their rate from the duration") {
    auto j = mini_scenario("counted-flood", 13.0);
    j["attacks"] = nlohmann::json::array({{
        {"name", "counted"},
        {"kind", "dos_flood"},
        {"entry", "gw"},
        {"start_s", 11.0},
        {"duration_s", 2.0},
        {"total_frames", 500},
        {"target",
         {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
          {"l4_src", 30500}, {"l4_dst", 30500}}},
    }});
    const Scenario sc = load_or_throw(j);
    CHECK(sc.attacks[0].dos.rate_pps == doctest::Approx(250.0));
    const RunResult r = run_scenario(sc, 1);
    CHECK(r.summary["attacks"]["counted"]["emitted"].get<std::uint64_t>() == 500);
}

TEST_CASE("a countermeasure that outlives the ack deadline is reported, run continues") {
    auto j = mini_scenario("slow-acks", 14.0);
    j["can_streams"] = nlohmann::json::array({can_stream_json()});
    j["monitors"] = nlohmann::json::array({can_monitor_json()});
    j["controller_rules"] = nlohmann::json::array(
        {{{"on", "anomaly_report"}, {"monitor", "drive-mon"}, {"remove_reported_flow", true}}});
    j["latency"] = {{"ack_deadline_ms", 0.005}};  // well under the dispatch window
    j["attacks"] = nlohmann::json::array({{
        {"name", "burst"},
        {"kind", "dos_flood"},
        {"entry", "gw"},
        {"start_s", 11.0},
        {"duration_s", 1.0},
        {"rate_pps", 2000.0},
        {"target",
         {{"ip_src", "10.9.1.11"}, {"ip_dst", "239.9.0.1"}, {"ip_proto", "udp"},
          {"l4_src", 30500}, {"l4_dst", 30500}}},
    }});
    const RunResult r = run_scenario(load_or_throw(j), 1);
    bool partial = false, complete = false;
    for (const auto& ev : r.log.records()) {
        if (ev.type == "countermeasure_partial_ack") partial = true;
        if (ev.type == "countermeasure_complete") complete = true;
    }
    CHECK(partial);
    CHECK(complete);  // the acks still arrive after the deadline report
}

TEST_CASE("whitelisted flows come alive after the install and deliver end to end") {
    auto j = mini_scenario("video", 3.0);
    j["whitelist"] = nlohmann::json::array({{
        {"src", "cam"},
        {"dst", "ivi"},
        {"vlan", 10},
        {"ip_proto", "udp"},
        {"l4_src", 5004},
        {"l4_dst", 5004},
    }});
    j["video_streams"] = nlohmann::json::array({{
        {"id", "cam-video"},
        {"src", "cam"},
        {"dst", "ivi"},
        {"fps", 30},
        {"frame_bytes", 1500},
        {"vlan", 10},
        {"l4_src", 5004},
        {"l4_dst", 5004},
    }});
    const Scenario sc = load_or_throw(j);
    const RunResult r = run_scenario(sc, 4);
    const auto& sw2 = r.summary["switches"]["sw2"];
    CHECK(sw2["dynamic_rules"].get<std::uint64_t>() == 1);
    bool installed_logged = false;
    for (const auto& ev : r.log.records())
        if (ev.type == "whitelist_install") installed_logged = true;
    CHECK(installed_logged);
}

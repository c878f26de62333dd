#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "ivnsim/dataplane.hpp"

using namespace ivnsim;

namespace {

EthernetFrame tunneled_can_frame() {
    EthernetFrame f;
    f.src_mac = 0x020000000001;
    f.dst_mac = 0x01005E010101;
    f.ethertype = kEthertypeIpv4;
    f.ip_src = 0x0A000101;
    f.ip_dst = 0xEF010101;
    f.ip_proto = kProtoUdp;
    f.l4_src = 30501;
    f.l4_dst = 30501;
    f.payload_len = 24;
    f.payload_kind = PayloadKind::SomeIpTunnel;
    return f;
}

FlowRule exact_rule_for(const EthernetFrame& f, int in_port, std::uint32_t id, int priority,
                        std::vector<int> out) {
    FlowRule r;
    r.id = id;
    r.priority = priority;
    r.match.in_port = in_port;
    r.match.src_mac = f.src_mac;
    r.match.dst_mac = f.dst_mac;
    r.match.vlan = f.vlan;
    r.match.ethertype = f.ethertype;
    r.match.ip_src = f.ip_src;
    r.match.ip_dst = f.ip_dst;
    r.match.ip_proto = f.ip_proto;
    r.match.l4_src = f.l4_src;
    r.match.l4_dst = f.l4_dst;
    r.action = FlowAction::forward(std::move(out));
    return r;
}

void add(Switch& sw, FlowRule r) {
    FlowMod mod;
    mod.kind = FlowMod::Kind::Add;
    mod.rule = std::move(r);
    sw.apply_flow_mod(mod, 0);
}

}  // namespace

TEST_CASE("lookup matches exact static rules and misses unknown probes") {
    Switch sw(0, 4, 1);
    const EthernetFrame f = tunneled_can_frame();
    add(sw, exact_rule_for(f, 2, 1, kStaticPriority, {3}));

    CHECK(sw.lookup(f, 2) != nullptr);
    CHECK(sw.lookup(f, 1) == nullptr);  // arrival port must match

    EthernetFrame probe;
    probe.ip_src = 0x0A000909;
    probe.ip_dst = 0x0A000101;
    probe.ip_proto = kProtoTcp;
    probe.l4_src = 54321;
    probe.l4_dst = 22;
    probe.payload_kind = PayloadKind::ScanProbe;
    CHECK(sw.lookup(probe, 2) == nullptr);
}

TEST_CASE("lookup prefers priority and breaks ties by lower rule id") {
    Switch sw(0, 4, 1);
    const EthernetFrame f = tunneled_can_frame();
    FlowRule low = exact_rule_for(f, 2, 7, 50, {3});
    FlowRule high = exact_rule_for(f, 2, 9, 100, {4});
    add(sw, low);
    add(sw, high);
    CHECK(sw.lookup(f, 2)->id == 9);

    Switch sw2(0, 4, 1);
    add(sw2, exact_rule_for(f, 2, 12, 50, {3}));
    add(sw2, exact_rule_for(f, 2, 4, 50, {4}));
    CHECK(sw2.lookup(f, 2)->id == 4);

    SUBCASE("identical queries always yield identical results") {
        for (int i = 0; i < 100; ++i) CHECK(sw.lookup(f, 2)->id == 9);
    }
}

TEST_CASE("process_frame applies actions and counts") {
    Switch sw(0, 4, 1);
    const EthernetFrame f = tunneled_can_frame();
    add(sw, exact_rule_for(f, 2, 1, kStaticPriority, {3}));
    std::vector<Emission> out;

    SUBCASE("forward emits once and bumps counters") {
        const auto outcome = sw.process_frame(f, 2, out, 0);
        REQUIRE(outcome.rule != nullptr);
        CHECK(out.size() == 1);
        CHECK(out[0].port == 3);
        CHECK(outcome.rule->counters.packets == 1);
        CHECK(outcome.rule->counters.bytes == f.payload_len);
    }
    SUBCASE("miss flags a packet-in and forwards nothing") {
        const auto outcome = sw.process_frame(f, 1, out, 0);
        CHECK(outcome.rule == nullptr);
        CHECK(outcome.packet_in);
        CHECK(out.empty());
        CHECK(sw.packet_in_count() == 1);
    }
    SUBCASE("discard emits nothing and no packet-in") {
        Switch swd(0, 4, 1);
        FlowRule r = exact_rule_for(f, 2, 1, kStaticPriority, {3});
        r.action = FlowAction::discard();
        add(swd, r);
        const auto outcome = swd.process_frame(f, 2, out, 0);
        CHECK(outcome.rule != nullptr);
        CHECK(!outcome.packet_in);
        CHECK(out.empty());
    }
    SUBCASE("modify rewrites fields before forwarding") {
        Switch swm(0, 4, 1);
        FlowRule r = exact_rule_for(f, 2, 1, kStaticPriority, {});
        FieldAssignments as;
        as.ip_dst = 0x0A0000FF;
        r.action = FlowAction::modify(as, {4});
        add(swm, r);
        swm.process_frame(f, 2, out, 0);
        REQUIRE(out.size() == 1);
        CHECK(*out[0].frame.ip_dst == 0x0A0000FF);
    }
    SUBCASE("to_controller produces an explicit packet-in") {
        Switch swc(0, 4, 1);
        FlowRule r = exact_rule_for(f, 2, 1, kStaticPriority, {});
        r.action = FlowAction::to_controller();
        add(swc, r);
        const auto outcome = swc.process_frame(f, 2, out, 0);
        CHECK(outcome.packet_in);
        CHECK(out.empty());
    }
}

TEST_CASE("flow mods keep the table consistent") {
    Switch sw(0, 4, 1);
    const EthernetFrame f = tunneled_can_frame();

    SUBCASE("add then lookup reaches the new rule") {
        add(sw, exact_rule_for(f, 2, 5, kDynamicPriority, {3}));
        CHECK(sw.lookup(f, 2)->id == 5);
    }
    SUBCASE("duplicate rule ids are rejected") {
        add(sw, exact_rule_for(f, 2, 5, kDynamicPriority, {3}));
        FlowMod mod;
        mod.kind = FlowMod::Kind::Add;
        mod.rule = exact_rule_for(f, 2, 5, kStaticPriority, {3});
        CHECK_THROWS_AS(sw.apply_flow_mod(mod, 0), DuplicateRuleId);
    }
    SUBCASE("pattern removal deletes the stream's rule; later lookups miss") {
        FlowRule r = exact_rule_for(f, 2, 5, kDynamicPriority, {3});
        r.origin = RuleOrigin::Dynamic;
        add(sw, r);
        FlowMod rm;
        rm.kind = FlowMod::Kind::Remove;
        rm.remove.pattern = FlowMatch{};
        rm.remove.pattern->ip_src = f.ip_src;
        rm.remove.pattern->ip_dst = f.ip_dst;
        rm.remove.pattern->l4_dst = f.l4_dst;
        const auto ack = sw.apply_flow_mod(rm, 10);
        CHECK(ack.rules_removed == 1);
        CHECK(ack.at == 10);
        CHECK(sw.lookup(f, 2) == nullptr);
    }
    SUBCASE("removing a nonexistent rule by predicate is an acknowledged no-op") {
        FlowMod rm;
        rm.kind = FlowMod::Kind::Remove;
        rm.remove.rule_id = 99;
        const auto ack = sw.apply_flow_mod(rm, 5);
        CHECK(ack.rules_removed == 0);
    }
    SUBCASE("dynamic-filtered removals never delete static rules") {
        FlowRule st = exact_rule_for(f, 2, 1, kStaticPriority, {3});
        st.origin = RuleOrigin::Static;
        add(sw, st);
        FlowRule dy = exact_rule_for(f, 3, 2, kDynamicPriority, {4});
        dy.origin = RuleOrigin::Dynamic;
        add(sw, dy);
        for (int round = 0; round < 3; ++round) {
            FlowMod rm;
            rm.kind = FlowMod::Kind::Remove;
            rm.remove.origin_filter = RuleOrigin::Dynamic;
            sw.apply_flow_mod(rm, round);
        }
        CHECK(sw.rule_count(RuleOrigin::Static) == 1);
        CHECK(sw.rule_count(RuleOrigin::Dynamic) == 0);
        CHECK(sw.lookup(f, 2)->id == 1);
    }
    SUBCASE("invalid forward ports are rejected at apply time") {
        FlowMod mod;
        mod.kind = FlowMod::Kind::Add;
        mod.rule = exact_rule_for(f, 2, 5, kStaticPriority, {9});
        CHECK_THROWS_AS(sw.apply_flow_mod(mod, 0), InvalidPort);
    }
}

TEST_CASE("per-rule counters plus packet-ins account for every ingress frame") {
    Switch sw(0, 4, 1);
    EthernetFrame a = tunneled_can_frame();
    add(sw, exact_rule_for(a, 2, 1, kStaticPriority, {3}));
    EthernetFrame b = a;
    b.l4_dst = 4242;  // always a miss

    std::vector<Emission> out;
    for (int i = 0; i < 500; ++i) {
        sw.process_frame(i % 3 == 0 ? b : a, 2, out, i);
    }
    std::uint64_t rule_packets = 0;
    for (const auto& r : sw.table()) rule_packets += r.counters.packets;
    CHECK(rule_packets + sw.packet_in_count() == sw.ingress_count());
}

TEST_CASE("table dump is one JSON object per rule") {
    Switch sw(3, 4, 1);
    const EthernetFrame f = tunneled_can_frame();
    add(sw, exact_rule_for(f, 2, 1, kStaticPriority, {3}));
    std::ostringstream os;
    sw.dump_table_jsonl(os);
    const std::string dump = os.str();
    CHECK(dump.find("\"switch\":3") != std::string::npos);
    CHECK(dump.find("\"priority\":100") != std::string::npos);
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 1);
}

#include "doctest.h"

#include <deque>
#include <set>

#include "ivnsim/controlplane.hpp"
#include "ivnsim/rng.hpp"

using namespace ivnsim;

namespace {

struct World {
    Topology topo;
    NodeId sw1, sw2, zc_a, zc_b, cam, ivi, gw, ctl;
    std::vector<DomainTunnel> tunnels;

    World() {
        sw1 = topo.add_node("sw1", NodeKind::Switch);
        sw2 = topo.add_node("sw2", NodeKind::Switch);
        zc_a = topo.add_node("zc_a", NodeKind::ZoneController);
        zc_b = topo.add_node("zc_b", NodeKind::ZoneController);
        cam = topo.add_node("cam", NodeKind::Camera);
        ivi = topo.add_node("ivi", NodeKind::Infotainment);
        gw = topo.add_node("gw", NodeKind::OnlineGateway);
        ctl = topo.add_node("ctl", NodeKind::SdnController);
        const NodeId n1 = topo.add_node("nads1", NodeKind::Nads);
        const NodeId n2 = topo.add_node("nads2", NodeKind::Nads);
        topo.add_link(sw1, sw2, 100);
        topo.add_link(zc_a, sw1, 100);
        topo.add_link(cam, sw1, 100);
        topo.add_link(gw, sw1, 100);
        topo.add_link(ctl, sw1, 100);
        topo.add_link(n1, sw1, 100);
        topo.add_link(zc_b, sw2, 100);
        topo.add_link(ivi, sw2, 100);
        topo.add_link(n2, sw2, 100);
        topo.set_mirror(sw1, n1);
        topo.set_mirror(sw2, n2);

        DomainTunnel d;
        d.domain = "drive";
        d.multicast_ip = ip_from_string("239.2.0.1");
        d.udp_port = 30500;
        d.members = {zc_a, zc_b};
        tunnels.push_back(d);
    }

    CommMatrixEntry unicast(NodeId src, NodeId dst, std::uint16_t sport,
                            std::uint16_t dport) const {
        CommMatrixEntry e;
        e.src = src;
        e.dst = dst;
        e.src_mac = topo.node(src).mac;
        e.dst_mac = topo.node(dst).mac;
        e.vlan = 0;
        e.ip_src = topo.node(src).ip;
        e.ip_dst = topo.node(dst).ip;
        e.ip_proto = kProtoUdp;
        e.l4_src = sport;
        e.l4_dst = dport;
        return e;
    }

    CommMatrixEntry tunneled(NodeId src) const {
        CommMatrixEntry e;
        e.src = src;
        e.dst_tunnel = "drive";
        e.multicast_members = tunnels[0].members;
        e.src_mac = topo.node(src).mac;
        e.dst_mac = 0x01005E000000ULL | (tunnels[0].multicast_ip & 0x7FFFFF);
        e.vlan = 0;
        e.ip_src = topo.node(src).ip;
        e.ip_dst = tunnels[0].multicast_ip;
        e.ip_proto = kProtoUdp;
        e.l4_src = tunnels[0].udp_port;
        e.l4_dst = tunnels[0].udp_port;
        return e;
    }

    WhitelistEntry video_whitelist() const {
        WhitelistEntry w;
        w.src_node = cam;
        w.dst_node = ivi;
        w.src_mac = topo.node(cam).mac;
        w.dst_mac = topo.node(ivi).mac;
        w.vlan = 10;
        w.ip_src = topo.node(cam).ip;
        w.ip_dst = topo.node(ivi).ip;
        w.ip_proto = kProtoUdp;
        w.l4_src = 5004;
        w.l4_dst = 5004;
        return w;
    }

    EthernetFrame frame_of(const WhitelistEntry& w) const {
        EthernetFrame f;
        f.src_mac = w.src_mac;
        f.dst_mac = w.dst_mac;
        f.vlan = w.vlan;
        f.ip_src = w.ip_src;
        f.ip_dst = w.ip_dst;
        f.ip_proto = w.ip_proto;
        f.l4_src = w.l4_src;
        f.l4_dst = w.l4_dst;
        f.payload_len = 1500;
        f.payload_kind = PayloadKind::VideoChunk;
        return f;
    }
};

/// Independent oracle for the expected rule count of a unicast entry:
/// enumerate the unique shortest path by breadth-first search and count the
/// switch nodes on it.
int switches_on_path_oracle(const Topology& topo, NodeId a, NodeId b) {
    std::deque<NodeId> q{a};
    std::vector<NodeId> parent(topo.node_count(), kNoNode);
    std::vector<bool> seen(topo.node_count(), false);
    seen[static_cast<std::size_t>(a)] = true;
    while (!q.empty()) {
        NodeId cur = q.front();
        q.pop_front();
        for (NodeId nb : topo.neighbors(cur)) {
            if (!seen[static_cast<std::size_t>(nb)]) {
                seen[static_cast<std::size_t>(nb)] = true;
                parent[static_cast<std::size_t>(nb)] = cur;
                q.push_back(nb);
            }
        }
    }
    int count = 0;
    for (NodeId n = b; n != kNoNode; n = parent[static_cast<std::size_t>(n)])
        if (topo.node(n).kind == NodeKind::Switch) ++count;
    return count;
}

}  // namespace

TEST_CASE("one unicast entry yields one rule per switch on its path") {
    World w;
    const auto tables = provision_static({w.unicast(w.zc_a, w.zc_b, 40000, 9000)}, w.topo);
    const int expected = switches_on_path_oracle(w.topo, w.zc_a, w.zc_b);
    CHECK(expected == 2);
    std::size_t total = 0;
    for (const auto& [sw, rules] : tables) total += rules.size();
    CHECK(total == static_cast<std::size_t>(expected));
    CHECK(tables.at(w.sw1).size() == 1);
    CHECK(tables.at(w.sw2).size() == 1);
}

TEST_CASE("an empty matrix provisions empty tables") {
    World w;
    const auto tables = provision_static({}, w.topo);
    for (const auto& [sw, rules] : tables) CHECK(rules.empty());
}

TEST_CASE("static rules are fully exact: zero wildcard fields") {
    World w;
    const auto tables = provision_static(
        {w.unicast(w.cam, w.ivi, 41000, 9100), w.tunneled(w.zc_a), w.tunneled(w.zc_b)}, w.topo);
    for (const auto& [sw, rules] : tables)
        for (const auto& r : rules) {
            CHECK(r.match.exact());
            CHECK(r.match.wildcard_count() == 0);
            CHECK(r.origin == RuleOrigin::Static);
            CHECK(r.priority == kStaticPriority);
        }
}

TEST_CASE("multicast entries fan out along the member tree") {
    World w;
    const auto tables = provision_static({w.tunneled(w.zc_a)}, w.topo);
    REQUIRE(tables.at(w.sw1).size() == 1);
    REQUIRE(tables.at(w.sw2).size() == 1);
    // sw1 forwards toward sw2 only (no other member on the front side);
    // sw2 delivers to zc_b.
    CHECK(tables.at(w.sw1)[0].action.out_ports.size() == 1);
    CHECK(tables.at(w.sw2)[0].action.out_ports ==
          std::vector<int>{w.topo.port_toward(w.sw2, w.zc_b)});
}

TEST_CASE("unroutable entries are reported") {
    World w;
    Topology island = w.topo;
    const NodeId lost = island.add_node("lost", NodeKind::ZoneController);
    CommMatrixEntry e = w.unicast(w.zc_a, w.zc_b, 1, 2);
    e.dst = lost;
    CHECK_THROWS_AS(provision_static({e}, island), UnroutableEntry);
}

TEST_CASE("packet-in handling: deny first, then whitelist, then drop") {
    World w;
    AclRule icmp_deny;
    icmp_deny.proto = ProtoClass::Icmp;
    icmp_deny.label = "icmp";
    Controller ctl(&w.topo, {icmp_deny}, {w.video_whitelist()});

    SUBCASE("pings are filtered and logged") {
        PacketIn pin;
        pin.switch_id = w.sw1;
        pin.in_port = 3;
        pin.frame.ip_src = w.topo.node(w.gw).ip;
        pin.frame.ip_dst = w.topo.node(w.zc_a).ip;
        pin.frame.ip_proto = kProtoIcmp;
        pin.timestamp = 5;
        const auto d = ctl.handle_packet_in(pin);
        CHECK(d.kind == PacketInDecision::Kind::DropAndLog);
        REQUIRE(d.violation.has_value());
        CHECK(d.violation->acl_label == "icmp");
        CHECK(ctl.violations_logged() == 1);
    }

    SUBCASE("whitelisted flows install dynamic rules along the path") {
        PacketIn pin;
        pin.switch_id = w.sw1;
        pin.in_port = w.topo.port_toward(w.sw1, w.cam);
        pin.frame = w.frame_of(w.video_whitelist());
        const auto d = ctl.handle_packet_in(pin);
        CHECK(d.kind == PacketInDecision::Kind::InstallFlows);
        CHECK(d.mods.size() == 2);  // both backbone switches
        for (const auto& [sw, mod] : d.mods) {
            CHECK(mod.rule.origin == RuleOrigin::Dynamic);
            CHECK(mod.rule.priority == kDynamicPriority);
            CHECK(!mod.rule.match.in_port.has_value());
        }
        // A second packet-in for the same entry does not double-install.
        const auto d2 = ctl.handle_packet_in(pin);
        CHECK(d2.kind == PacketInDecision::Kind::Drop);
    }

    SUBCASE("a TCP probe to a closed service never returns a decision that answers") {
        PacketIn pin;
        pin.switch_id = w.sw1;
        pin.in_port = w.topo.port_toward(w.sw1, w.gw);
        pin.frame.ip_src = w.topo.node(w.gw).ip;
        pin.frame.ip_dst = w.topo.node(w.ivi).ip;
        pin.frame.ip_proto = kProtoTcp;
        pin.frame.l4_src = 54321;
        pin.frame.l4_dst = 445;
        const auto d = ctl.handle_packet_in(pin);
        CHECK(d.kind == PacketInDecision::Kind::Drop);
        CHECK(d.mods.empty());
    }

    SUBCASE("log_unknown flips silent drops into logged violations") {
        Controller noisy(&w.topo, {}, {}, true);
        PacketIn pin;
        pin.switch_id = w.sw1;
        pin.in_port = 1;
        pin.frame.ip_src = 1;
        pin.frame.ip_dst = 2;
        pin.frame.ip_proto = kProtoTcp;
        pin.frame.l4_src = 1;
        pin.frame.l4_dst = 2;
        const auto d = noisy.handle_packet_in(pin);
        CHECK(d.kind == PacketInDecision::Kind::DropAndLog);
        CHECK(d.violation->acl_index == -1);
    }

    SUBCASE("deny wins over a matching whitelist entry") {
        AclRule port_deny;
        port_deny.l4_port = 5004;
        port_deny.label = "video-port";
        Controller strict(&w.topo, {port_deny}, {w.video_whitelist()});
        PacketIn pin;
        pin.switch_id = w.sw1;
        pin.in_port = 1;
        pin.frame = w.frame_of(w.video_whitelist());
        CHECK(strict.handle_packet_in(pin).kind == PacketInDecision::Kind::DropAndLog);
    }
}

TEST_CASE("whitelist monotonicity: installed matches derive from whitelist entries") {
    World w;
    const WhitelistEntry entry = w.video_whitelist();
    Controller ctl(&w.topo, {}, {entry});
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
        PacketIn pin;
        pin.switch_id = w.sw1;
        pin.in_port = 1 + static_cast<int>(rng.uniform_u64(4));
        pin.frame.src_mac = rng.next_u64() & 0xFFFFFFFFFFFF;
        pin.frame.ip_src = static_cast<std::uint32_t>(rng.next_u64());
        pin.frame.ip_dst = static_cast<std::uint32_t>(rng.next_u64());
        pin.frame.ip_proto = kProtoUdp;
        pin.frame.l4_src = static_cast<std::uint16_t>(rng.next_u64());
        pin.frame.l4_dst = static_cast<std::uint16_t>(rng.next_u64());
        const auto d = ctl.handle_packet_in(pin);
        if (d.kind == PacketInDecision::Kind::InstallFlows) {
            for (const auto& [sw, mod] : d.mods) CHECK(mod.rule.match == entry.to_match());
        }
    }
}

TEST_CASE("countermeasures ban flows and preserve the static fallback") {
    World w;
    Controller ctl(&w.topo, {}, {w.video_whitelist()});
    const std::vector<NodeId> switches{w.sw1, w.sw2};

    // Install the video flow first.
    PacketIn pin;
    pin.switch_id = w.sw1;
    pin.in_port = w.topo.port_toward(w.sw1, w.cam);
    pin.frame = w.frame_of(w.video_whitelist());
    REQUIRE(ctl.handle_packet_in(pin).kind == PacketInDecision::Kind::InstallFlows);

    SUBCASE("remove_flow targets dynamic rules and bans re-installation") {
        CountermeasureSpec spec;
        spec.kind = CountermeasureSpec::Kind::RemoveFlow;
        spec.pattern.ip_src = w.topo.node(w.cam).ip;
        spec.pattern.ip_dst = w.topo.node(w.ivi).ip;
        spec.pattern.l4_dst = 5004;
        const auto plan = ctl.plan_countermeasure(spec, 1000, switches);
        CHECK(plan.mods.size() == 2);
        for (const auto& [sw, mod] : plan.mods) {
            CHECK(mod.kind == FlowMod::Kind::Remove);
            CHECK(mod.remove.origin_filter == RuleOrigin::Dynamic);
        }
        CHECK(ctl.whitelist_banned(0));
        CHECK(ctl.handle_packet_in(pin).kind == PacketInDecision::Kind::Drop);
    }

    SUBCASE("disable_dynamic with no installs completes with no mods") {
        CountermeasureSpec ban;
        ban.kind = CountermeasureSpec::Kind::RemoveFlow;
        ban.pattern.ip_dst = w.topo.node(w.ivi).ip;
        ctl.plan_countermeasure(ban, 0, switches);  // clears the install flag

        CountermeasureSpec spec;
        spec.kind = CountermeasureSpec::Kind::DisableDynamic;
        const auto plan = ctl.plan_countermeasure(spec, 0, switches);
        CHECK(plan.mods.empty());
        CHECK(ctl.dynamic_disabled());
    }

    SUBCASE("fallback latches until re-armed") {
        CountermeasureSpec spec;
        spec.kind = CountermeasureSpec::Kind::FallbackStatic;
        const auto plan = ctl.plan_countermeasure(spec, 0, switches);
        CHECK(plan.mods.size() == 2);
        CHECK(ctl.fallback_latched());
        CHECK(ctl.handle_packet_in(pin).kind == PacketInDecision::Kind::Drop);
        ctl.rearm_dynamic();
        CHECK(ctl.handle_packet_in(pin).kind == PacketInDecision::Kind::InstallFlows);
    }

    SUBCASE("block_source extends the deny list") {
        CountermeasureSpec spec;
        spec.kind = CountermeasureSpec::Kind::BlockSource;
        spec.block_ip = w.topo.node(w.gw).ip;
        const auto plan = ctl.plan_countermeasure(spec, 0, switches);
        CHECK(plan.mods.empty());
        PacketIn bad;
        bad.switch_id = w.sw1;
        bad.in_port = 1;
        bad.frame.ip_src = w.topo.node(w.gw).ip;
        bad.frame.ip_dst = w.topo.node(w.zc_a).ip;
        bad.frame.ip_proto = kProtoUdp;
        bad.frame.l4_src = 1;
        bad.frame.l4_dst = 2;
        CHECK(ctl.handle_packet_in(bad).kind == PacketInDecision::Kind::DropAndLog);
    }
}

TEST_CASE("countermeasures leave unrelated flows untouched") {
    World w;
    const auto tables =
        provision_static({w.tunneled(w.zc_a), w.unicast(w.cam, w.ivi, 41000, 9100)}, w.topo);
    Switch sw1(w.sw1, w.topo.port_count(w.sw1), 0);
    for (const auto& r : tables.at(w.sw1)) {
        FlowMod mod;
        mod.kind = FlowMod::Kind::Add;
        mod.rule = r;
        sw1.apply_flow_mod(mod, 0);
    }
    EthernetFrame can;
    can.src_mac = w.topo.node(w.zc_a).mac;
    can.dst_mac = 0x01005E000000ULL | (w.tunnels[0].multicast_ip & 0x7FFFFF);
    can.ip_src = w.topo.node(w.zc_a).ip;
    can.ip_dst = w.tunnels[0].multicast_ip;
    can.ip_proto = kProtoUdp;
    can.l4_src = 30500;
    can.l4_dst = 30500;
    can.payload_len = 24;
    const int can_port = w.topo.port_toward(w.sw1, w.zc_a);
    const FlowRule* before = sw1.lookup(can, can_port);
    REQUIRE(before != nullptr);
    const std::uint32_t before_id = before->id;

    // Remove a different stream; the CAN lookup result must be unchanged.
    FlowMod rm;
    rm.kind = FlowMod::Kind::Remove;
    rm.remove.pattern = FlowMatch{};
    rm.remove.pattern->ip_dst = w.topo.node(w.ivi).ip;
    rm.remove.origin_filter = RuleOrigin::Dynamic;
    sw1.apply_flow_mod(rm, 1);
    REQUIRE(sw1.lookup(can, can_port) != nullptr);
    CHECK(sw1.lookup(can, can_port)->id == before_id);
}

#include "ivnsim/controlplane.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ivnsim {

std::optional<ProtoClass> proto_class_of(const EthernetFrame& f) {
    if (f.ethertype == kEthertypeArp) return ProtoClass::Arp;
    if (!f.ip_proto) return std::nullopt;
    switch (*f.ip_proto) {
        case kProtoIcmp: return ProtoClass::Icmp;
        case kProtoTcp: return ProtoClass::Tcp;
        case kProtoUdp: return ProtoClass::Udp;
        default: return std::nullopt;
    }
}

std::string proto_class_name(ProtoClass c) {
    switch (c) {
        case ProtoClass::Icmp: return "icmp";
        case ProtoClass::Tcp: return "tcp";
        case ProtoClass::Udp: return "udp";
        case ProtoClass::Arp: return "arp";
    }
    return "?";
}

bool AclRule::denies(const PacketIn& pin) const {
    if (switch_id && *switch_id != pin.switch_id) return false;
    if (in_port && *in_port != pin.in_port) return false;
    const EthernetFrame& f = pin.frame;
    if (ip && !(f.ip_src == ip || f.ip_dst == ip)) return false;
    if (l4_port && !(f.l4_src == l4_port || f.l4_dst == l4_port)) return false;
    if (proto && proto_class_of(f) != proto) return false;
    return true;
}

namespace {

std::string summarize(const EthernetFrame& f) {
    std::ostringstream os;
    if (f.ip_src) os << ip_to_string(*f.ip_src);
    else os << "mac:" << f.src_mac;
    os << "->";
    if (f.ip_dst) os << ip_to_string(*f.ip_dst);
    else os << "mac:" << f.dst_mac;
    if (f.ip_proto) os << " proto=" << static_cast<int>(*f.ip_proto);
    if (f.l4_src) os << " sport=" << *f.l4_src;
    if (f.l4_dst) os << " dport=" << *f.l4_dst;
    return os.str();
}

FlowMatch exact_match_for(const CommMatrixEntry& e, int in_port) {
    FlowMatch m;
    m.in_port = in_port;
    m.src_mac = e.src_mac;
    m.dst_mac = e.dst_mac;
    m.vlan = e.vlan ? *e.vlan : 0;
    m.ethertype = e.ethertype;
    m.ip_src = e.ip_src;
    m.ip_dst = e.ip_dst;
    m.ip_proto = e.ip_proto;
    m.l4_src = e.l4_src;
    m.l4_dst = e.l4_dst;
    return m;
}

}  // namespace

std::map<NodeId, std::vector<FlowRule>> provision_static(
    const std::vector<CommMatrixEntry>& matrix, const Topology& topo) {
    std::map<NodeId, std::vector<FlowRule>> tables;
    for (NodeId n = 0; n < static_cast<NodeId>(topo.node_count()); ++n)
        if (topo.node(n).kind == NodeKind::Switch) tables[n];  // every switch gets a table

    std::uint32_t rule_id = 1;
    for (std::size_t ei = 0; ei < matrix.size(); ++ei) {
        const CommMatrixEntry& e = matrix[ei];
        if (!e.fully_concrete())
            throw Error("comm matrix entry " + std::to_string(ei) + " is not fully specified");

        if (!e.is_multicast()) {
            const auto path = topo.shortest_path(e.src, e.dst);
            if (path.empty())
                throw UnroutableEntry("no path for matrix entry " + std::to_string(ei));
            for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                const NodeId sw = path[i];
                if (topo.node(sw).kind != NodeKind::Switch) continue;
                FlowRule r;
                r.id = rule_id++;
                r.priority = kStaticPriority;
                r.origin = RuleOrigin::Static;
                r.match = exact_match_for(e, topo.port_toward(sw, path[i - 1]));
                r.action = FlowAction::forward({topo.port_toward(sw, path[i + 1])});
                tables[sw].push_back(std::move(r));
            }
            continue;
        }

        // Multicast: one rule per switch on the sender-rooted shortest-path
        // tree, out_ports covering every member-facing branch.
        std::set<NodeId> tree_nodes;
        std::map<NodeId, std::set<NodeId>> children;  // id-ordered for determinism
        std::map<NodeId, NodeId> parent;
        for (NodeId member : e.multicast_members) {
            if (member == e.src) continue;
            const auto path = topo.shortest_path(e.src, member);
            if (path.empty())
                throw UnroutableEntry("no path to multicast member for entry " +
                                      std::to_string(ei));
            for (std::size_t i = 0; i < path.size(); ++i) {
                tree_nodes.insert(path[i]);
                if (i > 0) {
                    children[path[i - 1]].insert(path[i]);
                    parent[path[i]] = path[i - 1];
                }
            }
        }
        for (NodeId sw : tree_nodes) {
            if (topo.node(sw).kind != NodeKind::Switch) continue;
            FlowRule r;
            r.id = rule_id++;
            r.priority = kStaticPriority;
            r.origin = RuleOrigin::Static;
            r.match = exact_match_for(e, topo.port_toward(sw, parent.at(sw)));
            std::vector<int> out;
            for (NodeId child : children[sw]) out.push_back(topo.port_toward(sw, child));
            std::sort(out.begin(), out.end());
            r.action = FlowAction::forward(std::move(out));
            tables[sw].push_back(std::move(r));
        }
    }
    return tables;
}

PacketInDecision Controller::handle_packet_in(const PacketIn& pin) {
    PacketInDecision d;

    for (std::size_t i = 0; i < acl_.size(); ++i) {
        if (acl_[i].denies(pin)) {
            d.kind = PacketInDecision::Kind::DropAndLog;
            ViolationLog v;
            v.timestamp = pin.timestamp;
            v.switch_id = pin.switch_id;
            v.in_port = pin.in_port;
            v.frame_summary = summarize(pin.frame);
            v.acl_index = static_cast<int>(i);
            v.acl_label = acl_[i].label;
            d.violation = std::move(v);
            ++violations_logged_;
            return d;
        }
    }

    if (!dynamic_disabled_ && !fallback_latched_) {
        for (std::size_t i = 0; i < whitelist_.size(); ++i) {
            if (banned_[i] || installed_[i] || !whitelist_[i].matches(pin.frame)) continue;
            const auto& w = whitelist_[i];
            const auto path = topo_->shortest_path(w.src_node, w.dst_node);
            if (path.empty()) break;  // unroutable whitelist entry: drop
            d.kind = PacketInDecision::Kind::InstallFlows;
            d.whitelist_index = static_cast<int>(i);
            installed_[i] = true;
            ++state_version_;
            d.forward_path = path;
            for (std::size_t p = 1; p + 1 < path.size(); ++p) {
                const NodeId sw = path[p];
                if (topo_->node(sw).kind != NodeKind::Switch) continue;
                FlowMod mod;
                mod.kind = FlowMod::Kind::Add;
                mod.mod_id = next_mod_id_++;
                mod.rule.id = next_rule_id_++;
                mod.rule.priority = kDynamicPriority;
                mod.rule.origin = RuleOrigin::Dynamic;
                mod.rule.match = w.to_match();
                mod.rule.action = FlowAction::forward({topo_->port_toward(sw, path[p + 1])});
                d.mods.emplace_back(sw, std::move(mod));
            }
            return d;
        }
    }

    d.kind = PacketInDecision::Kind::Drop;
    if (log_unknown_) {
        d.kind = PacketInDecision::Kind::DropAndLog;
        ViolationLog v;
        v.timestamp = pin.timestamp;
        v.switch_id = pin.switch_id;
        v.in_port = pin.in_port;
        v.frame_summary = summarize(pin.frame);
        v.acl_index = -1;
        v.acl_label = "unknown";
        d.violation = std::move(v);
        ++violations_logged_;
    }
    return d;
}

CountermeasurePlan Controller::plan_countermeasure(const CountermeasureSpec& spec, SimTime now,
                                                   const std::vector<NodeId>& switches) {
    CountermeasurePlan plan;
    plan.cm_id = next_cm_id_++;
    plan.spec = spec;
    plan.issued_at = now;
    ++state_version_;

    auto remove_on_all = [&](RemoveSpec rs) {
        for (NodeId sw : switches) {
            FlowMod mod;
            mod.kind = FlowMod::Kind::Remove;
            mod.mod_id = next_mod_id_++;
            mod.remove = rs;
            plan.mods.emplace_back(sw, std::move(mod));
        }
    };

    switch (spec.kind) {
        case CountermeasureSpec::Kind::RemoveFlow: {
            RemoveSpec rs;
            rs.pattern = spec.pattern;
            rs.origin_filter = RuleOrigin::Dynamic;  // static set is the fallback, never removed
            remove_on_all(rs);
            // Ban matching whitelist entries so the flow is not re-installed
            // by the next packet-in.
            for (std::size_t i = 0; i < whitelist_.size(); ++i) {
                EthernetFrame probe;
                probe.src_mac = whitelist_[i].src_mac;
                probe.dst_mac = whitelist_[i].dst_mac;
                probe.vlan = whitelist_[i].vlan;
                probe.ethertype = whitelist_[i].ethertype;
                probe.ip_src = whitelist_[i].ip_src;
                probe.ip_dst = whitelist_[i].ip_dst;
                probe.ip_proto = whitelist_[i].ip_proto;
                probe.l4_src = whitelist_[i].l4_src;
                probe.l4_dst = whitelist_[i].l4_dst;
                if (spec.pattern.matches(probe, spec.pattern.in_port ? *spec.pattern.in_port : 0)) {
                    banned_[i] = true;
                    installed_[i] = false;
                }
            }
            break;
        }
        case CountermeasureSpec::Kind::DisableDynamic:
        case CountermeasureSpec::Kind::FallbackStatic: {
            dynamic_disabled_ = true;
            if (spec.kind == CountermeasureSpec::Kind::FallbackStatic) fallback_latched_ = true;
            // No installs outstanding means nothing to dispatch: completion is
            // immediate, the reaction window shrinks to controller processing.
            const bool any_installed =
                std::any_of(installed_.begin(), installed_.end(), [](bool b) { return b; });
            if (any_installed) {
                RemoveSpec rs;
                rs.origin_filter = RuleOrigin::Dynamic;
                remove_on_all(rs);
            }
            std::fill(installed_.begin(), installed_.end(), false);
            break;
        }
        case CountermeasureSpec::Kind::BlockSource: {
            AclRule r;
            r.ip = spec.block_ip;
            r.label = "blocked-source " + ip_to_string(spec.block_ip);
            acl_.push_back(std::move(r));
            break;
        }
    }
    return plan;
}

}  // namespace ivnsim

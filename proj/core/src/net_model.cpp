#include "ivnsim/net_model.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <sstream>

namespace ivnsim {

std::string StreamKey::to_string() const {
    // Semicolon-joined so the string stays a single CSV field.
    std::ostringstream os;
    auto put = [&os](const char* tag, const auto& v, auto&& fmt) {
        os << tag << '=';
        if (v)
            os << fmt(*v);
        else
            os << '*';
    };
    put("src", ip_src, [](std::uint32_t v) { return ip_to_string(v); });
    os << ';';
    put("dst", ip_dst, [](std::uint32_t v) { return ip_to_string(v); });
    os << ';';
    put("proto", ip_proto, [](std::uint8_t v) { return std::to_string(v); });
    os << ';';
    put("sport", l4_src, [](std::uint16_t v) { return std::to_string(v); });
    os << ';';
    put("dport", l4_dst, [](std::uint16_t v) { return std::to_string(v); });
    return os.str();
}

NodeId Topology::add_node(std::string name, NodeKind kind) {
    const NodeId id = static_cast<NodeId>(nodes_.size());
    TopologyNode n;
    n.name = std::move(name);
    n.kind = kind;
    // Default addressing: stable function of the node index. Scenario files
    // may override before links are added.
    n.ip = 0x0A000001u + static_cast<std::uint32_t>(id);            // 10.0.0.1+
    n.mac = 0x020000000000ULL + static_cast<std::uint64_t>(id) + 1; // locally administered
    by_name_[n.name] = id;
    nodes_.push_back(std::move(n));
    adjacency_.emplace_back();
    ports_.emplace_back();
    by_ip_[nodes_.back().ip] = id;
    return id;
}

void Topology::add_link(NodeId a, NodeId b, SimTime latency_us) {
    links_.push_back({a, b, latency_us});
    auto attach = [this](NodeId on, NodeId peer) {
        auto& plist = ports_[static_cast<size_t>(on)];
        plist.emplace_back(peer, static_cast<int>(plist.size()) + 1);
        auto& adj = adjacency_[static_cast<size_t>(on)];
        adj.insert(std::lower_bound(adj.begin(), adj.end(), peer), peer);
    };
    attach(a, b);
    attach(b, a);
}

NodeId Topology::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? kNoNode : it->second;
}

SimTime Topology::link_latency(NodeId a, NodeId b) const {
    for (const auto& l : links_)
        if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l.latency_us;
    throw Error("no link between nodes");
}

int Topology::port_toward(NodeId on, NodeId toward) const {
    for (const auto& [peer, port] : ports_[static_cast<size_t>(on)])
        if (peer == toward) return port;
    throw InvalidPort("node " + node(on).name + " has no port toward " + node(toward).name);
}

NodeId Topology::peer_of_port(NodeId on, int port) const {
    for (const auto& [peer, p] : ports_[static_cast<size_t>(on)])
        if (p == port) return peer;
    throw InvalidPort("node " + node(on).name + " has no port " + std::to_string(port));
}

int Topology::port_count(NodeId on) const {
    return static_cast<int>(ports_[static_cast<size_t>(on)].size());
}

std::vector<NodeId> Topology::shortest_path(NodeId a, NodeId b) const {
    std::vector<NodeId> parent(nodes_.size(), kNoNode);
    std::vector<bool> seen(nodes_.size(), false);
    std::deque<NodeId> q;
    q.push_back(a);
    seen[static_cast<size_t>(a)] = true;
    while (!q.empty()) {
        const NodeId cur = q.front();
        q.pop_front();
        if (cur == b) break;
        for (NodeId nb : neighbors(cur)) {
            if (!seen[static_cast<size_t>(nb)]) {
                seen[static_cast<size_t>(nb)] = true;
                parent[static_cast<size_t>(nb)] = cur;
                q.push_back(nb);
            }
        }
    }
    if (!seen[static_cast<size_t>(b)]) return {};
    std::vector<NodeId> path;
    for (NodeId n = b; n != kNoNode; n = parent[static_cast<size_t>(n)]) path.push_back(n);
    if (path.back() != a) return {};
    std::reverse(path.begin(), path.end());
    return path;
}

bool Topology::connected() const {
    if (nodes_.empty()) return true;
    std::vector<bool> seen(nodes_.size(), false);
    std::deque<NodeId> q{0};
    seen[0] = true;
    std::size_t visited = 1;
    while (!q.empty()) {
        const NodeId cur = q.front();
        q.pop_front();
        for (NodeId nb : neighbors(cur)) {
            if (!seen[static_cast<size_t>(nb)]) {
                seen[static_cast<size_t>(nb)] = true;
                ++visited;
                q.push_back(nb);
            }
        }
    }
    return visited == nodes_.size();
}

void Topology::check_invariants() const {
    if (!connected()) throw Error("topology is not connected");
    int controllers = 0;
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::SdnController) ++controllers;
    if (controllers != 1) throw Error("topology requires exactly one SdnController node");
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
        if (node(id).kind != NodeKind::Switch) continue;
        const NodeId m = mirror_target(id);
        if (m == kNoNode) throw Error("switch " + node(id).name + " has no mirror target");
        if (node(m).kind != NodeKind::Nads)
            throw Error("mirror target of " + node(id).name + " is not a NADS node");
    }
}

NodeId Topology::node_by_ip(std::uint32_t ip) const {
    auto it = by_ip_.find(ip);
    return it == by_ip_.end() ? kNoNode : it->second;
}

EthernetFrame encapsulate_can(const CanMessage& msg, const DomainTunnel& tunnel,
                              NodeId src, const Topology& topo, SimTime timestamp) {
    validate(msg);
    if (!tunnel.is_member(src))
        throw NotAMember("node " + topo.node(src).name + " is not a member of domain " +
                         tunnel.domain);
    EthernetFrame f;
    f.timestamp = timestamp;
    f.src_mac = topo.node(src).mac;
    // Multicast MAC derived from the group address (01:00:5e | low 23 bits).
    f.dst_mac = 0x01005E000000ULL | (tunnel.multicast_ip & 0x7FFFFF);
    f.ethertype = kEthertypeIpv4;
    f.ip_src = topo.node(src).ip;
    f.ip_dst = tunnel.multicast_ip;
    f.ip_proto = kProtoUdp;
    f.l4_src = tunnel.udp_port;
    f.l4_dst = tunnel.udp_port;
    f.payload_len = kSomeIpHeaderBytes + msg.payload_len;
    f.payload_kind = PayloadKind::SomeIpTunnel;
    f.tunnel_message_id = msg.can_id;
    f.tunnel_payload = msg.payload;
    f.tunnel_payload_len = msg.payload_len;
    f.tunnel_domain = msg.domain;
    f.tunnel_cycle_ms = msg.nominal_cycle_ms;
    f.src_node = src;
    return f;
}

CanMessage decapsulate_can(const EthernetFrame& frame) {
    if (frame.payload_kind != PayloadKind::SomeIpTunnel)
        throw NotTunneled("frame does not carry a SOME/IP CAN tunnel payload");
    CanMessage m;
    m.can_id = frame.tunnel_message_id;
    m.payload = frame.tunnel_payload;
    m.payload_len = frame.tunnel_payload_len;
    m.domain = frame.tunnel_domain;
    m.nominal_cycle_ms = frame.tunnel_cycle_ms;
    return m;
}

std::optional<std::size_t> stream_key_of(const EthernetFrame& frame,
                                         const std::vector<StreamKey>& monitors) {
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < monitors.size(); ++i) {
        if (monitors[i].matches(frame)) {
            if (hit) throw AmbiguousMonitors("frame matches monitors " + std::to_string(*hit) +
                                             " and " + std::to_string(i));
            hit = i;
        }
    }
    return hit;
}

std::string ip_to_string(std::uint32_t ip) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (ip >> 24) & 0xFF, (ip >> 16) & 0xFF,
                  (ip >> 8) & 0xFF, ip & 0xFF);
    return buf;
}

std::uint32_t ip_from_string(const std::string& s) {
    unsigned a = 0, b = 0, c = 0, d = 0;
    if (std::sscanf(s.c_str(), "%u.%u.%u.%u", &a, &b, &c, &d) != 4 || a > 255 || b > 255 ||
        c > 255 || d > 255)
        throw Error("malformed IPv4 address: " + s);
    return (a << 24) | (b << 16) | (c << 8) | d;
}

bool is_multicast_ip(std::uint32_t ip) {
    return (ip >> 28) == 0xE;  // 224.0.0.0/4
}

}  // namespace ivnsim

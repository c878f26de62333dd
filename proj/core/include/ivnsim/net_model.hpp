#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ivnsim/errors.hpp"
#include "ivnsim/time.hpp"

namespace ivnsim {

using NodeId = std::int32_t;
constexpr NodeId kNoNode = -1;

/// SOME/IP container overhead added when a CAN message is tunneled. The wire
/// encoding itself is abstracted away; only the size matters to the metrics.
constexpr std::uint32_t kSomeIpHeaderBytes = 16;

constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
constexpr std::uint16_t kEthertypeArp = 0x0806;

constexpr std::uint8_t kProtoIcmp = 1;
constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;

// ---------------------------------------------------------------------------
// CAN side

struct CanMessage {
    std::uint32_t can_id = 0;  // 29-bit extended id space
    std::array<std::uint8_t, 8> payload{};
    std::uint8_t payload_len = 0;  // 0..8
    std::string domain;
    double nominal_cycle_ms = 0.0;  // 0 = event-driven

    bool operator==(const CanMessage& o) const {
        if (can_id != o.can_id || payload_len != o.payload_len || domain != o.domain ||
            nominal_cycle_ms != o.nominal_cycle_ms)
            return false;
        for (std::uint8_t i = 0; i < payload_len; ++i)
            if (payload[i] != o.payload[i]) return false;
        return true;
    }
};

inline void validate(const CanMessage& m) {
    if (m.can_id > 0x1FFFFFFF) throw Error("can_id exceeds 29-bit range");
    if (m.payload_len > 8) throw Error("CAN payload longer than 8 bytes");
}

// ---------------------------------------------------------------------------
// Ethernet side

enum class PayloadKind : std::uint8_t { SomeIpTunnel, VideoChunk, RawBytes, ScanProbe };

enum class ProbeKind : std::uint8_t { Ping, TcpSyn };

/// Timestamped L2-L4 header record. Value type; fits in a cache line pair and
/// never allocates, which matters when tens of millions of them flow through
/// a run.
struct EthernetFrame {
    SimTime timestamp = 0;  // emission time at the source
    std::uint64_t src_mac = 0;
    std::uint64_t dst_mac = 0;
    std::uint16_t vlan = 0;  // 0 = untagged
    std::uint16_t ethertype = kEthertypeIpv4;
    std::optional<std::uint32_t> ip_src;
    std::optional<std::uint32_t> ip_dst;
    std::optional<std::uint8_t> ip_proto;
    std::optional<std::uint16_t> l4_src;
    std::optional<std::uint16_t> l4_dst;
    std::uint32_t payload_len = 0;

    PayloadKind payload_kind = PayloadKind::RawBytes;
    // SomeIpTunnel contents
    std::uint32_t tunnel_message_id = 0;
    std::array<std::uint8_t, 8> tunnel_payload{};
    std::uint8_t tunnel_payload_len = 0;
    std::string tunnel_domain;
    double tunnel_cycle_ms = 0.0;
    ProbeKind probe_kind = ProbeKind::TcpSyn;

    NodeId src_node = kNoNode;  // originating node (known in simulation)
    std::uint32_t attack_id = 0;        // 0 = regular traffic
    std::uint32_t scan_response_of = 0; // attack id a scan response answers
};

/// Header-field equality (L2-L4 plus presence); ignores timestamps, payload
/// contents, and provenance tags. The dataplane lookup caches key on this.
inline bool same_headers(const EthernetFrame& a, const EthernetFrame& b) {
    return a.src_mac == b.src_mac && a.dst_mac == b.dst_mac && a.vlan == b.vlan &&
           a.ethertype == b.ethertype && a.ip_src == b.ip_src && a.ip_dst == b.ip_dst &&
           a.ip_proto == b.ip_proto && a.l4_src == b.l4_src && a.l4_dst == b.l4_dst;
}

inline void validate(const EthernetFrame& f) {
    if ((f.l4_src || f.l4_dst) && !(f.ip_src && f.ip_dst))
        throw Error("L4 ports present without IP headers");
    if (f.payload_kind == PayloadKind::SomeIpTunnel &&
        f.payload_len < kSomeIpHeaderBytes + f.tunnel_payload_len)
        throw Error("payload_len smaller than encoded SOME/IP payload");
}

// ---------------------------------------------------------------------------
// Streams

/// Identifies one monitored communication stream; absent fields are
/// wildcards.
struct StreamKey {
    std::optional<std::uint32_t> ip_src;
    std::optional<std::uint32_t> ip_dst;
    std::optional<std::uint8_t> ip_proto;
    std::optional<std::uint16_t> l4_src;
    std::optional<std::uint16_t> l4_dst;

    bool matches(const EthernetFrame& f) const {
        if (ip_src && f.ip_src != ip_src) return false;
        if (ip_dst && f.ip_dst != ip_dst) return false;
        if (ip_proto && f.ip_proto != ip_proto) return false;
        if (l4_src && f.l4_src != l4_src) return false;
        if (l4_dst && f.l4_dst != l4_dst) return false;
        return true;
    }

    /// True when some frame could match both keys (fields pairwise compatible).
    bool overlaps(const StreamKey& o) const {
        auto compat = [](const auto& a, const auto& b) { return !a || !b || *a == *b; };
        return compat(ip_src, o.ip_src) && compat(ip_dst, o.ip_dst) &&
               compat(ip_proto, o.ip_proto) && compat(l4_src, o.l4_src) &&
               compat(l4_dst, o.l4_dst);
    }

    bool operator==(const StreamKey& o) const {
        return ip_src == o.ip_src && ip_dst == o.ip_dst && ip_proto == o.ip_proto &&
               l4_src == o.l4_src && l4_dst == o.l4_dst;
    }

    std::string to_string() const;
};

// ---------------------------------------------------------------------------
// Topology

enum class NodeKind : std::uint8_t {
    ZoneController,
    Switch,
    HpcNode,
    OnlineGateway,
    Camera,
    Infotainment,
    SdnController,
    Nads,
    AcdcEdge,
};

struct TopologyNode {
    std::string name;
    NodeKind kind = NodeKind::ZoneController;
    std::uint32_t ip = 0;       // auto-assigned unless configured
    std::uint64_t mac = 0;      // auto-assigned unless configured
};

struct TopologyLink {
    NodeId a = kNoNode;
    NodeId b = kNoNode;
    SimTime latency_us = 100;
};

/// CAN domain tunnel: every zone controller of a domain publishes to one
/// multicast group on a reserved SOME/IP UDP port.
struct DomainTunnel {
    std::string domain;
    std::uint32_t multicast_ip = 0;
    std::uint16_t udp_port = 0;
    std::vector<NodeId> members;  // zone controllers (or HPCs) in the domain

    bool is_member(NodeId n) const {
        for (NodeId m : members)
            if (m == n) return true;
        return false;
    }
};

class Topology {
public:
    NodeId add_node(std::string name, NodeKind kind);
    void add_link(NodeId a, NodeId b, SimTime latency_us);
    void set_mirror(NodeId sw, NodeId nads) { mirror_map_[sw] = nads; }

    NodeId find(const std::string& name) const;
    const TopologyNode& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
    TopologyNode& node(NodeId id) { return nodes_[static_cast<size_t>(id)]; }
    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<TopologyNode>& nodes() const { return nodes_; }
    const std::vector<TopologyLink>& links() const { return links_; }

    NodeId mirror_target(NodeId sw) const {
        auto it = mirror_map_.find(sw);
        return it == mirror_map_.end() ? kNoNode : it->second;
    }
    const std::unordered_map<NodeId, NodeId>& mirror_map() const { return mirror_map_; }

    /// Neighbors in ascending node id order (fixed by construction).
    const std::vector<NodeId>& neighbors(NodeId n) const {
        return adjacency_[static_cast<size_t>(n)];
    }

    SimTime link_latency(NodeId a, NodeId b) const;

    /// Port of `on` facing `toward`; ports are numbered 1.. in link
    /// declaration order per node. Throws InvalidPort when not adjacent.
    int port_toward(NodeId on, NodeId toward) const;
    NodeId peer_of_port(NodeId on, int port) const;
    int port_count(NodeId on) const;

    /// Shortest path a -> b inclusive; BFS with ascending-id neighbor
    /// expansion makes the result unique and deterministic.
    std::vector<NodeId> shortest_path(NodeId a, NodeId b) const;

    bool connected() const;

    /// Throws Error when structural invariants are violated (connectivity,
    /// one controller, every switch mirrored).
    void check_invariants() const;

    std::uint32_t ip_of(NodeId n) const { return node(n).ip; }
    NodeId node_by_ip(std::uint32_t ip) const;

private:
    std::vector<TopologyNode> nodes_;
    std::vector<TopologyLink> links_;
    std::vector<std::vector<NodeId>> adjacency_;
    // per node: (peer, port number) in declaration order
    std::vector<std::vector<std::pair<NodeId, int>>> ports_;
    std::unordered_map<NodeId, NodeId> mirror_map_;
    std::unordered_map<std::string, NodeId> by_name_;
    std::unordered_map<std::uint32_t, NodeId> by_ip_;

    friend class ScenarioLoader;
    void index_ip(NodeId n) { by_ip_[node(n).ip] = n; }
};

// ---------------------------------------------------------------------------
// Communication matrix

/// One fully-specified allowed communication relation. No wildcards: static
/// provisioning derives exact-match rules from these.
struct CommMatrixEntry {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;              // unicast destination, or kNoNode when tunneled
    std::string dst_tunnel;            // non-empty for multicast entries
    std::vector<NodeId> multicast_members;  // resolved from the tunnel at load time
    std::uint64_t src_mac = 0;
    std::uint64_t dst_mac = 0;
    std::optional<std::uint16_t> vlan; // has_value required (0 = untagged)
    std::uint16_t ethertype = kEthertypeIpv4;
    std::uint32_t ip_src = 0;
    std::uint32_t ip_dst = 0;
    std::uint8_t ip_proto = kProtoUdp;
    std::uint16_t l4_src = 0;
    std::uint16_t l4_dst = 0;
    std::string description;

    bool is_multicast() const { return !dst_tunnel.empty(); }
    bool fully_concrete() const { return vlan.has_value(); }
};

// ---------------------------------------------------------------------------
// Operations

/// Repackages a CAN message into an Ethernet frame addressed at the domain's
/// multicast tunnel. Throws NotAMember when src is not subscribed.
EthernetFrame encapsulate_can(const CanMessage& msg, const DomainTunnel& tunnel,
                              NodeId src, const Topology& topo, SimTime timestamp);

/// Inverse of encapsulate_can. Throws NotTunneled for other payload kinds.
CanMessage decapsulate_can(const EthernetFrame& frame);

/// Maps a frame onto the unique monitored stream it belongs to, if any.
/// Monitors must be pairwise non-overlapping; throws AmbiguousMonitors when
/// two match the same frame.
std::optional<std::size_t> stream_key_of(const EthernetFrame& frame,
                                         const std::vector<StreamKey>& monitors);

std::string ip_to_string(std::uint32_t ip);
std::uint32_t ip_from_string(const std::string& s);
bool is_multicast_ip(std::uint32_t ip);

}  // namespace ivnsim

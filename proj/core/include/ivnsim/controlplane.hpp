#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivnsim/dataplane.hpp"
#include "ivnsim/net_model.hpp"

namespace ivnsim {

enum class ProtoClass : std::uint8_t { Icmp, Tcp, Udp, Arp };

std::optional<ProtoClass> proto_class_of(const EthernetFrame& f);
std::string proto_class_name(ProtoClass c);

/// Deny-only predicate; anything not denied falls through to the whitelist.
struct AclRule {
    std::optional<NodeId> switch_id;
    std::optional<int> in_port;
    std::optional<std::uint32_t> ip;        // matches src or dst
    std::optional<std::uint16_t> l4_port;   // matches src or dst
    std::optional<ProtoClass> proto;
    std::string label;

    bool denies(const PacketIn& pin) const;
};

/// Fully specified L2-L4 descriptor plus the (src, dst) node pair it is
/// allowed between. Serves as the template for the dynamic FlowRule.
struct WhitelistEntry {
    NodeId src_node = kNoNode;
    NodeId dst_node = kNoNode;
    std::uint64_t src_mac = 0;
    std::uint64_t dst_mac = 0;
    std::uint16_t vlan = 0;
    std::uint16_t ethertype = kEthertypeIpv4;
    std::uint32_t ip_src = 0;
    std::uint32_t ip_dst = 0;
    std::uint8_t ip_proto = kProtoUdp;
    std::uint16_t l4_src = 0;
    std::uint16_t l4_dst = 0;
    std::string description;

    bool matches(const EthernetFrame& f) const {
        return f.src_mac == src_mac && f.dst_mac == dst_mac && f.vlan == vlan &&
               f.ethertype == ethertype && f.ip_src == ip_src && f.ip_dst == ip_dst &&
               f.ip_proto == ip_proto && f.l4_src == l4_src && f.l4_dst == l4_dst;
    }

    /// Dynamic rules deliberately leave in_port unmatched: the whitelist
    /// authorizes the flow itself, and the arrival-port pinning of the static
    /// set does not apply to runtime-installed communication.
    FlowMatch to_match() const {
        FlowMatch m;
        m.src_mac = src_mac;
        m.dst_mac = dst_mac;
        m.vlan = vlan;
        m.ethertype = ethertype;
        m.ip_src = ip_src;
        m.ip_dst = ip_dst;
        m.ip_proto = ip_proto;
        m.l4_src = l4_src;
        m.l4_dst = l4_dst;
        return m;
    }
};

struct ViolationLog {
    SimTime timestamp = 0;
    NodeId switch_id = kNoNode;
    int in_port = 0;
    std::string frame_summary;
    int acl_index = -1;  // -1 = unknown traffic logged via log_unknown
    std::string acl_label;
};

struct PacketInDecision {
    enum class Kind : std::uint8_t { InstallFlows, Drop, DropAndLog };
    Kind kind = Kind::Drop;
    std::vector<std::pair<NodeId, FlowMod>> mods;  // InstallFlows
    std::vector<NodeId> forward_path;              // full node path src..dst
    std::optional<ViolationLog> violation;
    int whitelist_index = -1;
};

struct CountermeasureSpec {
    enum class Kind : std::uint8_t { RemoveFlow, DisableDynamic, BlockSource, FallbackStatic };
    Kind kind = Kind::RemoveFlow;
    FlowMatch pattern;            // RemoveFlow
    std::uint32_t block_ip = 0;   // BlockSource
};

struct CountermeasurePlan {
    std::uint64_t cm_id = 0;
    CountermeasureSpec spec;
    std::vector<std::pair<NodeId, FlowMod>> mods;
    SimTime issued_at = 0;
};

/// Derives the per-switch exact-match rule set from the communication
/// matrix: one rule per (entry, switch on the routing path); multicast
/// entries expand along the sender-rooted shortest-path tree with
/// member-facing out_ports. Pure function of (matrix, topology).
std::map<NodeId, std::vector<FlowRule>> provision_static(
    const std::vector<CommMatrixEntry>& matrix, const Topology& topo);

/// SDN controller: ACL-gated packet-in handling with dynamic whitelist
/// installs, violation logging, and countermeasure planning. All state is
/// mutated from the single simulation event loop.
class Controller {
public:
    Controller(const Topology* topo, std::vector<AclRule> acl,
               std::vector<WhitelistEntry> whitelist, bool log_unknown = false)
        : topo_(topo), acl_(std::move(acl)), whitelist_(std::move(whitelist)),
          banned_(whitelist_.size(), false), installed_(whitelist_.size(), false),
          log_unknown_(log_unknown) {}

    /// ACL is evaluated before the whitelist; deny wins. Unknown traffic is
    /// silently dropped unless log_unknown is set.
    PacketInDecision handle_packet_in(const PacketIn& pin);

    /// Translates a countermeasure into per-switch flow mods and applies the
    /// controller-local side effects (whitelist bans, ACL extension,
    /// fallback latch). The caller owns dispatch timing and ack collection.
    CountermeasurePlan plan_countermeasure(const CountermeasureSpec& spec, SimTime now,
                                           const std::vector<NodeId>& switches);

    void rearm_dynamic() { fallback_latched_ = false; dynamic_disabled_ = false; }

    /// Install bookkeeping keeps one dynamic rule set per whitelist entry
    /// even when several packet-ins race the install latency.
    void mark_uninstalled(std::size_t i) { installed_[i] = false; }

    bool dynamic_disabled() const { return dynamic_disabled_; }
    bool fallback_latched() const { return fallback_latched_; }

    /// Bumped on every state mutation; lets callers cache side-effect-free
    /// packet-in verdicts across identical frames.
    std::uint64_t state_version() const { return state_version_; }
    const std::vector<AclRule>& acl() const { return acl_; }
    const std::vector<WhitelistEntry>& whitelist() const { return whitelist_; }
    bool whitelist_banned(std::size_t i) const { return banned_[i]; }
    std::uint64_t violations_logged() const { return violations_logged_; }

    std::uint32_t next_rule_id() { return next_rule_id_++; }

private:
    const Topology* topo_;
    std::vector<AclRule> acl_;
    std::vector<WhitelistEntry> whitelist_;
    std::vector<bool> banned_;
    std::vector<bool> installed_;
    bool log_unknown_ = false;
    bool dynamic_disabled_ = false;
    bool fallback_latched_ = false;
    std::uint32_t next_rule_id_ = 10000;  // static provisioning uses 1..9999
    std::uint64_t next_mod_id_ = 1;
    std::uint64_t next_cm_id_ = 1;
    std::uint64_t violations_logged_ = 0;
    std::uint64_t state_version_ = 0;
};

}  // namespace ivnsim

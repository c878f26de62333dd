#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ivnsim/net_model.hpp"

namespace ivnsim {

/// Match over (in_port, L2-L4). Absent field = wildcard. A present vlan of 0
/// requires an untagged frame.
struct FlowMatch {
    std::optional<int> in_port;
    std::optional<std::uint64_t> src_mac;
    std::optional<std::uint64_t> dst_mac;
    std::optional<std::uint16_t> vlan;
    std::optional<std::uint16_t> ethertype;
    std::optional<std::uint32_t> ip_src;
    std::optional<std::uint32_t> ip_dst;
    std::optional<std::uint8_t> ip_proto;
    std::optional<std::uint16_t> l4_src;
    std::optional<std::uint16_t> l4_dst;

    bool matches(const EthernetFrame& f, int in_port_of_frame) const {
        if (in_port && *in_port != in_port_of_frame) return false;
        if (src_mac && *src_mac != f.src_mac) return false;
        if (dst_mac && *dst_mac != f.dst_mac) return false;
        if (vlan && *vlan != f.vlan) return false;
        if (ethertype && *ethertype != f.ethertype) return false;
        if (ip_src && (!f.ip_src || *ip_src != *f.ip_src)) return false;
        if (ip_dst && (!f.ip_dst || *ip_dst != *f.ip_dst)) return false;
        if (ip_proto && (!f.ip_proto || *ip_proto != *f.ip_proto)) return false;
        if (l4_src && (!f.l4_src || *l4_src != *f.l4_src)) return false;
        if (l4_dst && (!f.l4_dst || *l4_dst != *f.l4_dst)) return false;
        return true;
    }

    bool exact() const {
        return in_port && src_mac && dst_mac && vlan && ethertype && ip_src && ip_dst &&
               ip_proto && l4_src && l4_dst;
    }

    int wildcard_count() const {
        int n = 0;
        n += !in_port;
        n += !src_mac;
        n += !dst_mac;
        n += !vlan;
        n += !ethertype;
        n += !ip_src;
        n += !ip_dst;
        n += !ip_proto;
        n += !l4_src;
        n += !l4_dst;
        return n;
    }

    bool operator==(const FlowMatch&) const = default;
};

struct FieldAssignments {
    std::optional<std::uint64_t> dst_mac;
    std::optional<std::uint32_t> ip_dst;
    std::optional<std::uint16_t> l4_dst;
    std::optional<std::uint16_t> vlan;

    void apply(EthernetFrame& f) const {
        if (dst_mac) f.dst_mac = *dst_mac;
        if (ip_dst) f.ip_dst = *ip_dst;
        if (l4_dst) f.l4_dst = *l4_dst;
        if (vlan) f.vlan = *vlan;
    }
};

struct FlowAction {
    enum class Kind : std::uint8_t { Forward, Discard, Modify, ToController };
    Kind kind = Kind::Discard;
    std::vector<int> out_ports;     // Forward / Modify
    FieldAssignments assignments;   // Modify

    static FlowAction forward(std::vector<int> ports) {
        FlowAction a;
        a.kind = Kind::Forward;
        a.out_ports = std::move(ports);
        return a;
    }
    static FlowAction discard() { return {}; }
    static FlowAction modify(FieldAssignments as, std::vector<int> ports) {
        FlowAction a;
        a.kind = Kind::Modify;
        a.assignments = as;
        a.out_ports = std::move(ports);
        return a;
    }
    static FlowAction to_controller() {
        FlowAction a;
        a.kind = Kind::ToController;
        return a;
    }
};

enum class RuleOrigin : std::uint8_t { Static, Dynamic };

/// Pre-provisioned rules carry priority 100, whitelist-installed dynamic
/// rules 50; a table miss has no rule at all.
constexpr int kStaticPriority = 100;
constexpr int kDynamicPriority = 50;

struct FlowCounters {
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;
};

struct FlowRule {
    std::uint32_t id = 0;
    int priority = kStaticPriority;
    FlowMatch match;
    FlowAction action;
    RuleOrigin origin = RuleOrigin::Static;
    FlowCounters counters;
};

struct PacketIn {
    NodeId switch_id = kNoNode;
    int in_port = 0;
    EthernetFrame frame;
    SimTime timestamp = 0;
};

struct RemoveSpec {
    std::optional<std::uint32_t> rule_id;
    std::optional<FlowMatch> pattern;  // present fields must equal the rule's match fields
    std::optional<RuleOrigin> origin_filter;
};

struct FlowMod {
    enum class Kind : std::uint8_t { Add, Remove, ModifyRule };
    Kind kind = Kind::Add;
    std::uint64_t mod_id = 0;
    FlowRule rule;        // Add
    RemoveSpec remove;    // Remove
    std::uint32_t target_rule_id = 0;  // ModifyRule
    FlowAction new_action;             // ModifyRule
};

struct FlowModAck {
    NodeId switch_id = kNoNode;
    std::uint64_t mod_id = 0;
    SimTime at = 0;
    std::uint32_t rules_removed = 0;
};

struct Emission {
    int port = 0;
    EthernetFrame frame;
};

struct ProcessOutcome {
    const FlowRule* rule = nullptr;  // nullptr = table miss
    bool packet_in = false;
};

enum class MirrorPoint : std::uint8_t { Ingress, Egress };

/// One programmable backbone switch: priority flow table, mirror port toward
/// a NADS, packet-in generation on miss.
class Switch {
public:
    Switch(NodeId id, int port_count, NodeId mirror_target,
           MirrorPoint mirror_point = MirrorPoint::Ingress)
        : id_(id), port_count_(port_count), mirror_target_(mirror_target),
          mirror_point_(mirror_point) {}

    NodeId id() const { return id_; }
    NodeId mirror_target() const { return mirror_target_; }
    MirrorPoint mirror_point() const { return mirror_point_; }

    /// Highest-priority matching rule; ties broken by lower rule id. Null on
    /// miss. Pure with respect to the table state.
    const FlowRule* lookup(const EthernetFrame& f, int in_port) const;

    /// Runs the match-action pipeline for one ingress frame. Emissions are
    /// appended to `out` (cleared first). On miss (or an explicit
    /// ToController action) the outcome flags a packet-in and the frame is
    /// not forwarded; the caller builds the PacketIn record, which keeps the
    /// flood fast path copy-free. Mirroring is the caller's job: with
    /// ingress mirroring every ingress frame is copied to the mirror port
    /// before the forwarding decision applies.
    ProcessOutcome process_frame(const EthernetFrame& f, int in_port,
                                 std::vector<Emission>& out, SimTime now);

    /// Ingress mirroring copies every arriving frame (the NADS observes
    /// attack traffic even when the pipeline drops it); egress mirroring
    /// copies only frames that were actually forwarded.
    bool should_mirror(const ProcessOutcome& o) const {
        if (mirror_point_ == MirrorPoint::Ingress) return true;
        return o.rule != nullptr &&
               (o.rule->action.kind == FlowAction::Kind::Forward ||
                o.rule->action.kind == FlowAction::Kind::Modify);
    }

    /// Applies one flow modification atomically. `at` is the table-update
    /// time computed by the caller (switch processing latency included).
    FlowModAck apply_flow_mod(const FlowMod& mod, SimTime at);

    const std::vector<FlowRule>& table() const { return table_; }
    std::uint64_t packet_in_count() const { return packet_in_count_; }
    std::uint64_t ingress_count() const { return ingress_count_; }
    std::uint64_t table_version() const { return version_; }

    std::size_t rule_count(RuleOrigin origin) const;

    /// One rule per line: id, priority, match fields, action, counters.
    void dump_table_jsonl(std::ostream& os) const;

private:
    struct CacheEntry {
        std::uint64_t version = ~0ULL;
        int in_port = -1;
        EthernetFrame key;     // header fields only are compared
        std::int32_t rule_pos = -1;
    };

    bool cache_match(const CacheEntry& e, const EthernetFrame& f, int in_port) const;
    std::int32_t scan(const EthernetFrame& f, int in_port) const;
    void validate_action(const FlowAction& a) const;

    NodeId id_;
    int port_count_;
    NodeId mirror_target_;
    MirrorPoint mirror_point_;
    std::vector<FlowRule> table_;  // sorted by (priority desc, id asc)
    std::uint64_t version_ = 0;
    std::uint64_t packet_in_count_ = 0;
    std::uint64_t ingress_count_ = 0;
    mutable std::array<CacheEntry, 4> cache_{};
    mutable unsigned cache_slot_ = 0;
};

}  // namespace ivnsim

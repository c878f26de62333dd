#include "ivnsim/dataplane.hpp"

#include <algorithm>
#include <ostream>

#include "nlohmann/json.hpp"

namespace ivnsim {

namespace {

bool remove_targets(const RemoveSpec& spec, const FlowRule& r) {
    if (spec.rule_id && *spec.rule_id != r.id) return false;
    if (spec.origin_filter && *spec.origin_filter != r.origin) return false;
    if (spec.pattern) {
        const FlowMatch& p = *spec.pattern;
        const FlowMatch& m = r.match;
        auto field_ok = [](const auto& want, const auto& have) {
            return !want || (have && *have == *want);
        };
        if (!field_ok(p.in_port, m.in_port)) return false;
        if (!field_ok(p.src_mac, m.src_mac)) return false;
        if (!field_ok(p.dst_mac, m.dst_mac)) return false;
        if (!field_ok(p.vlan, m.vlan)) return false;
        if (!field_ok(p.ethertype, m.ethertype)) return false;
        if (!field_ok(p.ip_src, m.ip_src)) return false;
        if (!field_ok(p.ip_dst, m.ip_dst)) return false;
        if (!field_ok(p.ip_proto, m.ip_proto)) return false;
        if (!field_ok(p.l4_src, m.l4_src)) return false;
        if (!field_ok(p.l4_dst, m.l4_dst)) return false;
    }
    return true;
}

}  // namespace

bool Switch::cache_match(const CacheEntry& e, const EthernetFrame& f, int in_port) const {
    return e.version == version_ && e.in_port == in_port && same_headers(e.key, f);
}

std::int32_t Switch::scan(const EthernetFrame& f, int in_port) const {
    for (std::size_t i = 0; i < table_.size(); ++i)
        if (table_[i].match.matches(f, in_port)) return static_cast<std::int32_t>(i);
    return -1;
}

const FlowRule* Switch::lookup(const EthernetFrame& f, int in_port) const {
    for (const auto& e : cache_) {
        if (cache_match(e, f, in_port))
            return e.rule_pos < 0 ? nullptr : &table_[static_cast<std::size_t>(e.rule_pos)];
    }
    const std::int32_t pos = scan(f, in_port);
    CacheEntry& slot = cache_[cache_slot_];
    cache_slot_ = (cache_slot_ + 1) % cache_.size();
    slot.version = version_;
    slot.in_port = in_port;
    slot.key = f;
    slot.rule_pos = pos;
    return pos < 0 ? nullptr : &table_[static_cast<std::size_t>(pos)];
}

ProcessOutcome Switch::process_frame(const EthernetFrame& f, int in_port,
                                     std::vector<Emission>& out, SimTime now) {
    out.clear();
    (void)now;
    ++ingress_count_;

    const FlowRule* hit = lookup(f, in_port);
    ProcessOutcome outcome;
    if (!hit) {
        ++packet_in_count_;
        outcome.packet_in = true;
        return outcome;
    }

    auto* rule = const_cast<FlowRule*>(hit);
    rule->counters.packets += 1;
    rule->counters.bytes += f.payload_len;
    outcome.rule = rule;

    switch (rule->action.kind) {
        case FlowAction::Kind::Forward:
            for (int p : rule->action.out_ports) out.push_back({p, f});
            break;
        case FlowAction::Kind::Discard:
            break;
        case FlowAction::Kind::Modify: {
            EthernetFrame mod = f;
            rule->action.assignments.apply(mod);
            for (int p : rule->action.out_ports) out.push_back({p, mod});
            break;
        }
        case FlowAction::Kind::ToController:
            ++packet_in_count_;
            outcome.packet_in = true;
            break;
    }
    return outcome;
}

void Switch::validate_action(const FlowAction& a) const {
    if (a.kind == FlowAction::Kind::Forward || a.kind == FlowAction::Kind::Modify) {
        if (a.out_ports.empty()) throw InvalidPort("forward action with no out_ports");
        for (int p : a.out_ports)
            if (p < 1 || p > port_count_)
                throw InvalidPort("action forwards to nonexistent port " + std::to_string(p));
    }
}

FlowModAck Switch::apply_flow_mod(const FlowMod& mod, SimTime at) {
    FlowModAck ack{id_, mod.mod_id, at, 0};
    switch (mod.kind) {
        case FlowMod::Kind::Add: {
            for (const auto& r : table_)
                if (r.id == mod.rule.id)
                    throw DuplicateRuleId("rule id " + std::to_string(mod.rule.id) +
                                          " already present on switch");
            validate_action(mod.rule.action);
            auto pos = std::lower_bound(
                table_.begin(), table_.end(), mod.rule, [](const FlowRule& a, const FlowRule& b) {
                    if (a.priority != b.priority) return a.priority > b.priority;
                    return a.id < b.id;
                });
            table_.insert(pos, mod.rule);
            break;
        }
        case FlowMod::Kind::Remove: {
            const auto before = table_.size();
            table_.erase(std::remove_if(table_.begin(), table_.end(),
                                        [&](const FlowRule& r) {
                                            return remove_targets(mod.remove, r);
                                        }),
                         table_.end());
            ack.rules_removed = static_cast<std::uint32_t>(before - table_.size());
            break;
        }
        case FlowMod::Kind::ModifyRule: {
            for (auto& r : table_) {
                if (r.id == mod.target_rule_id) {
                    validate_action(mod.new_action);
                    r.action = mod.new_action;
                    break;
                }
            }
            break;
        }
    }
    ++version_;
    return ack;
}

std::size_t Switch::rule_count(RuleOrigin origin) const {
    return static_cast<std::size_t>(
        std::count_if(table_.begin(), table_.end(),
                      [origin](const FlowRule& r) { return r.origin == origin; }));
}

void Switch::dump_table_jsonl(std::ostream& os) const {
    using nlohmann::ordered_json;
    for (const auto& r : table_) {
        ordered_json j;
        j["switch"] = id_;
        j["id"] = r.id;
        j["priority"] = r.priority;
        j["origin"] = r.origin == RuleOrigin::Static ? "static" : "dynamic";
        ordered_json m = ordered_json::object();
        auto put = [&m](const char* k, const auto& v) {
            if (v) m[k] = *v;
        };
        put("in_port", r.match.in_port);
        put("src_mac", r.match.src_mac);
        put("dst_mac", r.match.dst_mac);
        put("vlan", r.match.vlan);
        put("ethertype", r.match.ethertype);
        if (r.match.ip_src) m["ip_src"] = ip_to_string(*r.match.ip_src);
        if (r.match.ip_dst) m["ip_dst"] = ip_to_string(*r.match.ip_dst);
        put("ip_proto", r.match.ip_proto);
        put("l4_src", r.match.l4_src);
        put("l4_dst", r.match.l4_dst);
        j["match"] = std::move(m);
        switch (r.action.kind) {
            case FlowAction::Kind::Forward:
                j["action"] = {{"forward", r.action.out_ports}};
                break;
            case FlowAction::Kind::Discard:
                j["action"] = "discard";
                break;
            case FlowAction::Kind::Modify:
                j["action"] = {{"modify", r.action.out_ports}};
                break;
            case FlowAction::Kind::ToController:
                j["action"] = "to_controller";
                break;
        }
        j["packets"] = r.counters.packets;
        j["bytes"] = r.counters.bytes;
        os << j.dump() << '\n';
    }
}

}  // namespace ivnsim

#include "ivnsim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "nlohmann/json.hpp"

namespace ivnsim {

using nlohmann::json;

namespace {

struct Ctx {
    std::vector<std::string>* errors;
    void err(const std::string& ptr, const std::string& msg) const {
        errors->push_back(ptr + ": " + msg);
    }
};

std::optional<NodeKind> node_kind_from(const std::string& s) {
    if (s == "zone_controller") return NodeKind::ZoneController;
    if (s == "switch") return NodeKind::Switch;
    if (s == "hpc") return NodeKind::HpcNode;
    if (s == "online_gateway") return NodeKind::OnlineGateway;
    if (s == "camera") return NodeKind::Camera;
    if (s == "infotainment") return NodeKind::Infotainment;
    if (s == "sdn_controller") return NodeKind::SdnController;
    if (s == "nads") return NodeKind::Nads;
    if (s == "acdc_edge") return NodeKind::AcdcEdge;
    return std::nullopt;
}

std::optional<MetricKind> metric_from(const std::string& s) {
    if (s == "frame_size") return MetricKind::FrameSize;
    if (s == "bandwidth") return MetricKind::Bandwidth;
    if (s == "packet_gap") return MetricKind::PacketGap;
    if (s == "cycle_deviation") return MetricKind::CycleDeviation;
    return std::nullopt;
}

std::optional<std::uint8_t> proto_from(const json& j) {
    if (j.is_number_unsigned()) return static_cast<std::uint8_t>(j.get<unsigned>());
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "udp") return kProtoUdp;
        if (s == "tcp") return kProtoTcp;
        if (s == "icmp") return kProtoIcmp;
    }
    return std::nullopt;
}

std::optional<std::uint64_t> mac_from(const json& j) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_string()) {
        unsigned b[6];
        if (std::sscanf(j.get<std::string>().c_str(), "%x:%x:%x:%x:%x:%x", &b[0], &b[1], &b[2],
                        &b[3], &b[4], &b[5]) == 6) {
            std::uint64_t m = 0;
            for (unsigned v : b) m = (m << 8) | (v & 0xFF);
            return m;
        }
    }
    return std::nullopt;
}

bool expect_object(const json& j, const std::string& ptr, Ctx& ctx) {
    if (j.is_object()) return true;
    ctx.err(ptr, "expected an object");
    return false;
}

bool expect_array(const json& j, const std::string& ptr, Ctx& ctx) {
    if (j.is_array()) return true;
    ctx.err(ptr, "expected an array");
    return false;
}

std::string get_string(const json& j, const char* key, const std::string& ptr, Ctx& ctx,
                       const std::string& fallback = "", bool required = true) {
    if (!j.contains(key)) {
        if (required) ctx.err(ptr + "/" + key, "missing required field");
        return fallback;
    }
    if (!j[key].is_string()) {
        ctx.err(ptr + "/" + key, "expected a string");
        return fallback;
    }
    return j[key].get<std::string>();
}

double get_number(const json& j, const char* key, const std::string& ptr, Ctx& ctx,
                  double fallback = 0.0, bool required = true) {
    if (!j.contains(key)) {
        if (required) ctx.err(ptr + "/" + key, "missing required field");
        return fallback;
    }
    if (!j[key].is_number()) {
        ctx.err(ptr + "/" + key, "expected a number");
        return fallback;
    }
    return j[key].get<double>();
}

LatencyModel parse_latency(const json& j, const std::string& ptr, Ctx& ctx,
                           const LatencyModel& fallback) {
    try {
        if (j.is_number()) return LatencyModel::constant(j.get<double>());
        if (j.is_object()) {
            if (j.contains("const")) return LatencyModel::constant(j["const"].get<double>());
            if (j.contains("samples")) {
                return LatencyModel::empirical(j["samples"].get<std::vector<double>>());
            }
            if (j.contains("mode"))
                return LatencyModel::pert(j["min"].get<double>(), j["mode"].get<double>(),
                                          j["max"].get<double>());
            if (j.contains("avg"))
                return LatencyModel::from_triple(j["min"].get<double>(), j["avg"].get<double>(),
                                                 j["max"].get<double>());
        }
        ctx.err(ptr, "expected a number, {const}, {min,avg,max}, {min,mode,max} or {samples}");
    } catch (const std::exception& e) {
        ctx.err(ptr, e.what());
    }
    return fallback;
}

StreamKey parse_stream_key(const json& j, const std::string& ptr, Ctx& ctx) {
    StreamKey k;
    if (!expect_object(j, ptr, ctx)) return k;
    if (j.contains("ip_src")) {
        try {
            k.ip_src = ip_from_string(j["ip_src"].get<std::string>());
        } catch (const std::exception& e) {
            ctx.err(ptr + "/ip_src", e.what());
        }
    }
    if (j.contains("ip_dst")) {
        try {
            k.ip_dst = ip_from_string(j["ip_dst"].get<std::string>());
        } catch (const std::exception& e) {
            ctx.err(ptr + "/ip_dst", e.what());
        }
    }
    if (j.contains("ip_proto")) {
        auto p = proto_from(j["ip_proto"]);
        if (p) k.ip_proto = *p;
        else ctx.err(ptr + "/ip_proto", "unknown protocol");
    }
    if (j.contains("l4_src")) k.l4_src = j["l4_src"].get<std::uint16_t>();
    if (j.contains("l4_dst")) k.l4_dst = j["l4_dst"].get<std::uint16_t>();
    return k;
}

}  // namespace

// ---------------------------------------------------------------------------

class ScenarioLoader {
public:
    LoadResult load(const json& root) {
        LoadResult out;
        Ctx ctx{&out.errors};
        Scenario& sc = out.scenario;

        if (!root.is_object()) {
            ctx.err("", "scenario root must be an object");
            return out;
        }

        sc.name = get_string(root, "name", "", ctx, "unnamed", false);
        sc.duration_s = get_number(root, "duration_s", "", ctx, 10.0);
        if (sc.duration_s <= 0.0) ctx.err("/duration_s", "must be positive");
        if (root.contains("seed")) sc.seed = root["seed"].get<std::uint64_t>();
        sc.vehicle_id = get_string(root, "vehicle_id", "", ctx, "prototype-1", false);
        if (root.contains("log_unknown")) sc.log_unknown = root["log_unknown"].get<bool>();
        if (root.contains("mirror_point")) {
            const std::string mp = root["mirror_point"].get<std::string>();
            if (mp == "ingress") sc.mirror_point = MirrorPoint::Ingress;
            else if (mp == "egress") sc.mirror_point = MirrorPoint::Egress;
            else ctx.err("/mirror_point", "expected ingress or egress");
        }
        if (root.contains("ftti_budget_ms")) {
            sc.ftti_budget_ms = root["ftti_budget_ms"].get<double>();
            if (sc.ftti_budget_ms < 0.0) ctx.err("/ftti_budget_ms", "must be >= 0");
        }

        parse_topology(root, sc, ctx);
        parse_tunnels(root, sc, ctx);
        parse_matrix(root, sc, ctx);
        parse_streams(root, sc, ctx);
        parse_monitors(root, sc, ctx);
        parse_acl(root, sc, ctx);
        parse_whitelist(root, sc, ctx);
        parse_latency_cfg(root, sc, ctx);
        parse_orchestration(root, sc, ctx);
        parse_acdc_cfg(root, sc, ctx);
        parse_attacks(root, sc, ctx);
        parse_output(root, sc, ctx);

        if (out.errors.empty()) cross_validate(sc, ctx);
        return out;
    }

private:
    NodeId node_ref(const Scenario& sc, const json& j, const char* key, const std::string& ptr,
                    Ctx& ctx) {
        const std::string name = get_string(j, key, ptr, ctx);
        if (name.empty()) return kNoNode;
        const NodeId id = sc.topology.find(name);
        if (id == kNoNode) ctx.err(ptr + "/" + key, "unknown node '" + name + "'");
        return id;
    }

    void parse_topology(const json& root, Scenario& sc, Ctx& ctx) {
        if (!root.contains("topology")) {
            ctx.err("/topology", "missing required section");
            return;
        }
        const json& t = root["topology"];
        if (!expect_object(t, "/topology", ctx)) return;

        if (t.contains("nodes") && expect_array(t["nodes"], "/topology/nodes", ctx)) {
            for (std::size_t i = 0; i < t["nodes"].size(); ++i) {
                const std::string ptr = "/topology/nodes/" + std::to_string(i);
                const json& n = t["nodes"][i];
                if (!expect_object(n, ptr, ctx)) continue;
                const std::string id = get_string(n, "id", ptr, ctx);
                const std::string kind_s = get_string(n, "kind", ptr, ctx);
                auto kind = node_kind_from(kind_s);
                if (!kind) {
                    ctx.err(ptr + "/kind", "unknown node kind '" + kind_s + "'");
                    continue;
                }
                if (sc.topology.find(id) != kNoNode) {
                    ctx.err(ptr + "/id", "duplicate node id '" + id + "'");
                    continue;
                }
                const NodeId nid = sc.topology.add_node(id, *kind);
                if (n.contains("ip")) {
                    try {
                        sc.topology.node(nid).ip = ip_from_string(n["ip"].get<std::string>());
                        sc.topology.index_ip(nid);
                    } catch (const std::exception& e) {
                        ctx.err(ptr + "/ip", e.what());
                    }
                }
                if (n.contains("mac")) {
                    auto m = mac_from(n["mac"]);
                    if (m) sc.topology.node(nid).mac = *m;
                    else ctx.err(ptr + "/mac", "malformed MAC");
                }
            }
        } else if (!t.contains("nodes")) {
            ctx.err("/topology/nodes", "missing required field");
        }

        if (t.contains("links") && expect_array(t["links"], "/topology/links", ctx)) {
            for (std::size_t i = 0; i < t["links"].size(); ++i) {
                const std::string ptr = "/topology/links/" + std::to_string(i);
                const json& l = t["links"][i];
                if (!expect_object(l, ptr, ctx)) continue;
                const NodeId a = node_ref(sc, l, "a", ptr, ctx);
                const NodeId b = node_ref(sc, l, "b", ptr, ctx);
                if (a == kNoNode || b == kNoNode) continue;
                SimTime lat = 100;
                if (l.contains("latency_us")) lat = l["latency_us"].get<SimTime>();
                if (lat < 0) ctx.err(ptr + "/latency_us", "must be >= 0");
                sc.topology.add_link(a, b, lat);
            }
        }

        if (t.contains("mirrors") && expect_array(t["mirrors"], "/topology/mirrors", ctx)) {
            for (std::size_t i = 0; i < t["mirrors"].size(); ++i) {
                const std::string ptr = "/topology/mirrors/" + std::to_string(i);
                const json& m = t["mirrors"][i];
                if (!expect_object(m, ptr, ctx)) continue;
                const NodeId sw = node_ref(sc, m, "switch", ptr, ctx);
                const NodeId nads = node_ref(sc, m, "nads", ptr, ctx);
                if (sw == kNoNode || nads == kNoNode) continue;
                if (sc.topology.node(sw).kind != NodeKind::Switch)
                    ctx.err(ptr + "/switch", "mirror source must be a switch");
                if (sc.topology.node(nads).kind != NodeKind::Nads)
                    ctx.err(ptr + "/nads", "mirror target must be a nads node");
                if (sc.topology.mirror_target(sw) != kNoNode)
                    ctx.err(ptr + "/switch", "switch already has a mirror target");
                sc.topology.set_mirror(sw, nads);
            }
        }
    }

    void parse_tunnels(const json& root, Scenario& sc, Ctx& ctx) {
        if (root.contains("reserved_udp_ports")) {
            for (const auto& p : root["reserved_udp_ports"])
                sc.reserved_udp_ports.push_back(p.get<std::uint16_t>());
        }
        if (!root.contains("tunnels")) return;
        if (!expect_array(root["tunnels"], "/tunnels", ctx)) return;
        std::set<std::string> names;
        std::set<std::uint32_t> ips;
        for (std::size_t i = 0; i < root["tunnels"].size(); ++i) {
            const std::string ptr = "/tunnels/" + std::to_string(i);
            const json& t = root["tunnels"][i];
            if (!expect_object(t, ptr, ctx)) continue;
            DomainTunnel d;
            d.domain = get_string(t, "domain", ptr, ctx);
            if (!names.insert(d.domain).second) ctx.err(ptr + "/domain", "duplicate domain");
            try {
                d.multicast_ip = ip_from_string(get_string(t, "multicast_ip", ptr, ctx));
                if (!is_multicast_ip(d.multicast_ip))
                    ctx.err(ptr + "/multicast_ip", "address is outside the multicast range");
                if (!ips.insert(d.multicast_ip).second)
                    ctx.err(ptr + "/multicast_ip", "multicast address reused across domains");
            } catch (const std::exception& e) {
                ctx.err(ptr + "/multicast_ip", e.what());
            }
            d.udp_port = static_cast<std::uint16_t>(get_number(t, "udp_port", ptr, ctx));
            if (!sc.reserved_udp_ports.empty()) {
                bool reserved = false;
                for (auto p : sc.reserved_udp_ports) reserved |= (p == d.udp_port);
                if (!reserved)
                    ctx.err(ptr + "/udp_port", "port is not in reserved_udp_ports");
            }
            if (t.contains("members") && expect_array(t["members"], ptr + "/members", ctx)) {
                for (std::size_t m = 0; m < t["members"].size(); ++m) {
                    const std::string name = t["members"][m].get<std::string>();
                    const NodeId nid = sc.topology.find(name);
                    if (nid == kNoNode)
                        ctx.err(ptr + "/members/" + std::to_string(m),
                                "unknown node '" + name + "'");
                    else d.members.push_back(nid);
                }
            }
            sc.tunnels.push_back(std::move(d));
        }
    }

    const DomainTunnel* tunnel_by_name(const Scenario& sc, const std::string& name) {
        for (const auto& t : sc.tunnels)
            if (t.domain == name) return &t;
        return nullptr;
    }

    void parse_matrix(const json& root, Scenario& sc, Ctx& ctx) {
        if (!root.contains("comm_matrix")) return;
        if (!expect_array(root["comm_matrix"], "/comm_matrix", ctx)) return;
        for (std::size_t i = 0; i < root["comm_matrix"].size(); ++i) {
            const std::string ptr = "/comm_matrix/" + std::to_string(i);
            const json& e = root["comm_matrix"][i];
            if (!expect_object(e, ptr, ctx)) continue;
            CommMatrixEntry m;
            m.src = node_ref(sc, e, "src", ptr, ctx);
            if (m.src == kNoNode) continue;
            m.src_mac = sc.topology.node(m.src).mac;
            m.ip_src = sc.topology.node(m.src).ip;
            if (e.contains("tunnel")) {
                m.dst_tunnel = e["tunnel"].get<std::string>();
                const DomainTunnel* t = tunnel_by_name(sc, m.dst_tunnel);
                if (!t) {
                    ctx.err(ptr + "/tunnel", "unknown tunnel '" + m.dst_tunnel + "'");
                    continue;
                }
                m.multicast_members = t->members;
                m.ip_dst = t->multicast_ip;
                m.dst_mac = 0x01005E000000ULL | (t->multicast_ip & 0x7FFFFF);
                m.ip_proto = kProtoUdp;
                m.l4_src = t->udp_port;
                m.l4_dst = t->udp_port;
                if (!t->is_member(m.src))
                    ctx.err(ptr + "/src", "sender is not a member of tunnel " + m.dst_tunnel);
            } else {
                m.dst = node_ref(sc, e, "dst", ptr, ctx);
                if (m.dst == kNoNode) continue;
                m.dst_mac = sc.topology.node(m.dst).mac;
                m.ip_dst = sc.topology.node(m.dst).ip;
                if (e.contains("ip_proto")) {
                    auto p = proto_from(e["ip_proto"]);
                    if (p) m.ip_proto = *p;
                    else ctx.err(ptr + "/ip_proto", "unknown protocol");
                }
                m.l4_src = static_cast<std::uint16_t>(get_number(e, "l4_src", ptr, ctx));
                m.l4_dst = static_cast<std::uint16_t>(get_number(e, "l4_dst", ptr, ctx));
            }
            m.vlan = static_cast<std::uint16_t>(get_number(e, "vlan", ptr, ctx, 0.0, false));
            m.description = get_string(e, "description", ptr, ctx, "", false);
            sc.comm_matrix.push_back(std::move(m));
        }
    }

    void parse_streams(const json& root, Scenario& sc, Ctx& ctx) {
        if (root.contains("can_streams") &&
            expect_array(root["can_streams"], "/can_streams", ctx)) {
            for (std::size_t i = 0; i < root["can_streams"].size(); ++i) {
                const std::string ptr = "/can_streams/" + std::to_string(i);
                const json& s = root["can_streams"][i];
                if (!expect_object(s, ptr, ctx)) continue;
                CanStreamConfig c;
                c.id = get_string(s, "id", ptr, ctx, "can-" + std::to_string(i), false);
                c.domain = get_string(s, "domain", ptr, ctx);
                c.sender = node_ref(sc, s, "sender", ptr, ctx);
                c.can_id = static_cast<std::uint32_t>(get_number(s, "can_id", ptr, ctx));
                if (c.can_id > 0x1FFFFFFF) ctx.err(ptr + "/can_id", "exceeds 29-bit range");
                c.payload_len =
                    static_cast<std::uint8_t>(get_number(s, "payload_len", ptr, ctx, 8, false));
                if (c.payload_len > 8) ctx.err(ptr + "/payload_len", "CAN payload is at most 8");
                c.cycle_ms = get_number(s, "cycle_ms", ptr, ctx);
                if (c.cycle_ms <= 0.0) ctx.err(ptr + "/cycle_ms", "must be positive");
                c.jitter_sigma_pct = get_number(s, "jitter_sigma_pct", ptr, ctx, 0.0, false);
                c.start_s = get_number(s, "start_s", ptr, ctx, 0.0, false);
                const DomainTunnel* t = tunnel_by_name(sc, c.domain);
                if (!t) ctx.err(ptr + "/domain", "unknown tunnel '" + c.domain + "'");
                else if (c.sender != kNoNode && !t->is_member(c.sender))
                    ctx.err(ptr + "/sender", "sender is not a member of the domain tunnel");
                sc.can_streams.push_back(std::move(c));
            }
        }
        if (root.contains("video_streams") &&
            expect_array(root["video_streams"], "/video_streams", ctx)) {
            for (std::size_t i = 0; i < root["video_streams"].size(); ++i) {
                const std::string ptr = "/video_streams/" + std::to_string(i);
                const json& s = root["video_streams"][i];
                if (!expect_object(s, ptr, ctx)) continue;
                VideoStreamConfig v;
                v.id = get_string(s, "id", ptr, ctx, "video-" + std::to_string(i), false);
                v.src = node_ref(sc, s, "src", ptr, ctx);
                v.dst = node_ref(sc, s, "dst", ptr, ctx);
                v.fps = get_number(s, "fps", ptr, ctx, 25.0, false);
                if (v.fps <= 0.0) ctx.err(ptr + "/fps", "must be positive");
                v.frame_bytes =
                    static_cast<std::uint32_t>(get_number(s, "frame_bytes", ptr, ctx, 1500, false));
                v.vlan = static_cast<std::uint16_t>(get_number(s, "vlan", ptr, ctx, 0, false));
                v.l4_src = static_cast<std::uint16_t>(get_number(s, "l4_src", ptr, ctx));
                v.l4_dst = static_cast<std::uint16_t>(get_number(s, "l4_dst", ptr, ctx));
                v.jitter_sigma_pct = get_number(s, "jitter_sigma_pct", ptr, ctx, 0.0, false);
                v.start_s = get_number(s, "start_s", ptr, ctx, 0.0, false);
                sc.video_streams.push_back(std::move(v));
            }
        }
    }

    void parse_monitors(const json& root, Scenario& sc, Ctx& ctx) {
        if (!root.contains("monitors")) return;
        if (!expect_array(root["monitors"], "/monitors", ctx)) return;
        for (std::size_t i = 0; i < root["monitors"].size(); ++i) {
            const std::string ptr = "/monitors/" + std::to_string(i);
            const json& m = root["monitors"][i];
            if (!expect_object(m, ptr, ctx)) continue;
            StreamMonitorConfig c;
            c.id = get_string(m, "id", ptr, ctx, "monitor-" + std::to_string(i), false);
            c.nads = get_string(m, "nads", ptr, ctx);
            const NodeId nid = sc.topology.find(c.nads);
            if (nid == kNoNode || sc.topology.node(nid).kind != NodeKind::Nads)
                ctx.err(ptr + "/nads", "unknown NADS node '" + c.nads + "'");
            if (m.contains("stream")) c.stream = parse_stream_key(m["stream"], ptr + "/stream", ctx);
            else ctx.err(ptr + "/stream", "missing required field");
            auto mx = metric_from(get_string(m, "metric_x", ptr, ctx));
            auto my = metric_from(get_string(m, "metric_y", ptr, ctx));
            if (mx) c.metric_x = *mx;
            else ctx.err(ptr + "/metric_x", "unknown metric");
            if (my) c.metric_y = *my;
            else ctx.err(ptr + "/metric_y", "unknown metric");
            c.interval_us = us_from_ms(get_number(m, "interval_ms", ptr, ctx));
            c.learning_intervals =
                static_cast<int>(get_number(m, "learning_intervals", ptr, ctx, 30, false));
            c.nominal_cycle_ms = get_number(m, "nominal_cycle_ms", ptr, ctx, 0.0, false);
            c.drop_probability = get_number(m, "drop_probability", ptr, ctx, 0.0, false);
            if (m.contains("bandwidth")) {
                const json& b = m["bandwidth"];
                if (b.contains("fixed_h")) {
                    c.bandwidth.kind = BandwidthMode::Kind::Fixed;
                    c.bandwidth.h = b["fixed_h"].get<double>();
                } else if (b.contains("from_data_factor")) {
                    c.bandwidth.kind = BandwidthMode::Kind::FromData;
                    c.bandwidth.factor = b["from_data_factor"].get<double>();
                } else {
                    ctx.err(ptr + "/bandwidth", "expected fixed_h or from_data_factor");
                }
            }
            try {
                validate(c);
            } catch (const std::exception& e) {
                ctx.err(ptr, e.what());
            }
            sc.monitors.push_back(std::move(c));
        }
        // Pairwise non-overlap per NADS instance keeps stream_key_of a function.
        for (std::size_t i = 0; i < sc.monitors.size(); ++i) {
            for (std::size_t j = i + 1; j < sc.monitors.size(); ++j) {
                if (sc.monitors[i].nads != sc.monitors[j].nads) continue;
                if (sc.monitors[i].stream.overlaps(sc.monitors[j].stream))
                    ctx.err("/monitors/" + std::to_string(j) + "/stream",
                            "overlaps monitor " + std::to_string(i) + " on the same NADS");
            }
        }
    }

    void parse_acl(const json& root, Scenario& sc, Ctx& ctx) {
        if (!root.contains("acl")) return;
        if (!expect_array(root["acl"], "/acl", ctx)) return;
        for (std::size_t i = 0; i < root["acl"].size(); ++i) {
            const std::string ptr = "/acl/" + std::to_string(i);
            const json& a = root["acl"][i];
            if (!expect_object(a, ptr, ctx)) continue;
            AclRule r;
            if (a.contains("proto")) {
                const std::string p = a["proto"].get<std::string>();
                if (p == "icmp") r.proto = ProtoClass::Icmp;
                else if (p == "tcp") r.proto = ProtoClass::Tcp;
                else if (p == "udp") r.proto = ProtoClass::Udp;
                else if (p == "arp") r.proto = ProtoClass::Arp;
                else ctx.err(ptr + "/proto", "unknown protocol class '" + p + "'");
            }
            if (a.contains("ip")) {
                try {
                    r.ip = ip_from_string(a["ip"].get<std::string>());
                } catch (const std::exception& e) {
                    ctx.err(ptr + "/ip", e.what());
                }
            }
            if (a.contains("l4_port")) r.l4_port = a["l4_port"].get<std::uint16_t>();
            if (a.contains("switch")) {
                const NodeId sw = node_ref(sc, a, "switch", ptr, ctx);
                if (sw != kNoNode) r.switch_id = sw;
            }
            if (a.contains("in_port")) r.in_port = a["in_port"].get<int>();
            r.label = get_string(a, "label", ptr, ctx, "acl-" + std::to_string(i), false);
            if (!r.proto && !r.ip && !r.l4_port && !r.switch_id && !r.in_port)
                ctx.err(ptr, "deny rule needs at least one predicate field");
            sc.acl.push_back(std::move(r));
        }
    }

    void parse_whitelist(const json& root, Scenario& sc, Ctx& ctx) {
        if (!root.contains("whitelist")) return;
        if (!expect_array(root["whitelist"], "/whitelist", ctx)) return;
        for (std::size_t i = 0; i < root["whitelist"].size(); ++i) {
            const std::string ptr = "/whitelist/" + std::to_string(i);
            const json& w = root["whitelist"][i];
            if (!expect_object(w, ptr, ctx)) continue;
            WhitelistEntry e;
            e.src_node = node_ref(sc, w, "src", ptr, ctx);
            e.dst_node = node_ref(sc, w, "dst", ptr, ctx);
            if (e.src_node == kNoNode || e.dst_node == kNoNode) continue;
            e.src_mac = sc.topology.node(e.src_node).mac;
            e.dst_mac = sc.topology.node(e.dst_node).mac;
            e.ip_src = sc.topology.node(e.src_node).ip;
            e.ip_dst = sc.topology.node(e.dst_node).ip;
            e.vlan = static_cast<std::uint16_t>(get_number(w, "vlan", ptr, ctx, 0, false));
            if (w.contains("ip_proto")) {
                auto p = proto_from(w["ip_proto"]);
                if (p) e.ip_proto = *p;
                else ctx.err(ptr + "/ip_proto", "unknown protocol");
            }
            e.l4_src = static_cast<std::uint16_t>(get_number(w, "l4_src", ptr, ctx));
            e.l4_dst = static_cast<std::uint16_t>(get_number(w, "l4_dst", ptr, ctx));
            e.description = get_string(w, "description", ptr, ctx, "", false);
            // No shadowing: dynamic installs must never duplicate the static set.
            for (std::size_t m = 0; m < sc.comm_matrix.size(); ++m) {
                const auto& cm = sc.comm_matrix[m];
                if (cm.ip_src == e.ip_src && cm.ip_dst == e.ip_dst &&
                    cm.ip_proto == e.ip_proto && cm.l4_src == e.l4_src && cm.l4_dst == e.l4_dst)
                    ctx.err(ptr, "shadows comm_matrix entry " + std::to_string(m));
            }
            sc.whitelist.push_back(std::move(e));
        }
    }

    void parse_latency_cfg(const json& root, Scenario& sc, Ctx& ctx) {
        if (!root.contains("latency")) return;
        const json& l = root["latency"];
        if (!expect_object(l, "/latency", ctx)) return;
        LatencyConfig& c = sc.latency;
        if (l.contains("link_us")) c.link_us = l["link_us"].get<SimTime>();
        if (l.contains("nads_processing"))
            c.nads_processing =
                parse_latency(l["nads_processing"], "/latency/nads_processing", ctx,
                              c.nads_processing);
        if (l.contains("report_transit"))
            c.report_transit =
                parse_latency(l["report_transit"], "/latency/report_transit", ctx,
                              c.report_transit);
        if (l.contains("countermeasure_total"))
            c.countermeasure_total =
                parse_latency(l["countermeasure_total"], "/latency/countermeasure_total", ctx,
                              c.countermeasure_total);
        if (l.contains("cm_dispatch_share")) {
            c.cm_dispatch_share = l["cm_dispatch_share"].get<double>();
            if (c.cm_dispatch_share <= 0.0 || c.cm_dispatch_share >= 1.0)
                ctx.err("/latency/cm_dispatch_share", "must lie strictly between 0 and 1");
        }
        if (l.contains("acdc_roundtrip"))
            c.acdc_roundtrip =
                parse_latency(l["acdc_roundtrip"], "/latency/acdc_roundtrip", ctx,
                              c.acdc_roundtrip);
        if (l.contains("cloud_residual_ms"))
            c.cloud_residual_ms = l["cloud_residual_ms"].get<double>();
        if (l.contains("realloc")) {
            const json& r = l["realloc"];
            if (expect_object(r, "/latency/realloc", ctx)) {
                if (r.contains("scheduler"))
                    c.realloc.scheduler = parse_latency(r["scheduler"], "/latency/realloc/scheduler",
                                                        ctx, c.realloc.scheduler);
                if (r.contains("management"))
                    c.realloc.management = parse_latency(
                        r["management"], "/latency/realloc/management", ctx, c.realloc.management);
                if (r.contains("create"))
                    c.realloc.create =
                        parse_latency(r["create"], "/latency/realloc/create", ctx, c.realloc.create);
                if (r.contains("app_registration"))
                    c.realloc.app_registration =
                        parse_latency(r["app_registration"], "/latency/realloc/app_registration",
                                      ctx, c.realloc.app_registration);
            }
        }
        if (l.contains("whitelist_install_ms"))
            c.whitelist_install_ms = l["whitelist_install_ms"].get<double>();
        if (l.contains("assessment_delay_ms"))
            c.assessment_delay_ms = l["assessment_delay_ms"].get<double>();
        if (l.contains("ack_deadline_ms")) c.ack_deadline_ms = l["ack_deadline_ms"].get<double>();
        if (l.contains("scan_response_ms"))
            c.scan_response_ms = l["scan_response_ms"].get<double>();
    }

    void parse_orchestration(const json& root, Scenario& sc, Ctx& ctx) {
        if (root.contains("compute_nodes") &&
            expect_array(root["compute_nodes"], "/compute_nodes", ctx)) {
            for (std::size_t i = 0; i < root["compute_nodes"].size(); ++i) {
                const std::string ptr = "/compute_nodes/" + std::to_string(i);
                const json& n = root["compute_nodes"][i];
                if (!expect_object(n, ptr, ctx)) continue;
                ComputeNode c;
                c.id = get_string(n, "id", ptr, ctx);
                const std::string role = get_string(n, "role", ptr, ctx, "worker", false);
                if (role == "master") c.role = NodeRole::Master;
                else if (role == "worker") c.role = NodeRole::Worker;
                else ctx.err(ptr + "/role", "expected master or worker");
                c.capacity = static_cast<int>(get_number(n, "capacity", ptr, ctx, 4, false));
                if (c.capacity < 1) ctx.err(ptr + "/capacity", "must be >= 1");
                sc.compute_nodes.push_back(std::move(c));
            }
            bool has_master = false;
            for (const auto& n : sc.compute_nodes) has_master |= n.role == NodeRole::Master;
            if (!sc.compute_nodes.empty() && !has_master)
                ctx.err("/compute_nodes", "at least one master node is required");
        }
        if (root.contains("services") && expect_array(root["services"], "/services", ctx)) {
            for (std::size_t i = 0; i < root["services"].size(); ++i) {
                const std::string ptr = "/services/" + std::to_string(i);
                const json& s = root["services"][i];
                if (!expect_object(s, ptr, ctx)) continue;
                ServiceApp a;
                a.id = get_string(s, "id", ptr, ctx);
                const std::string crit = get_string(s, "criticality", ptr, ctx, "optional", false);
                if (crit == "critical") a.criticality = Criticality::Critical;
                else if (crit == "optional") a.criticality = Criticality::Optional;
                else ctx.err(ptr + "/criticality", "expected critical or optional");
                if (s.contains("allowed_nodes"))
                    a.allowed_nodes = s["allowed_nodes"].get<std::vector<std::string>>();
                if (s.contains("node")) a.current_node = s["node"].get<std::string>();
                auto known_compute = [&](const std::string& id) {
                    for (const auto& n : sc.compute_nodes)
                        if (n.id == id) return true;
                    return false;
                };
                for (const auto& an : a.allowed_nodes)
                    if (!known_compute(an))
                        ctx.err(ptr + "/allowed_nodes", "unknown compute node '" + an + "'");
                if (a.current_node && !known_compute(*a.current_node))
                    ctx.err(ptr + "/node", "unknown compute node '" + *a.current_node + "'");
                if (a.current_node && !a.allowed_on(*a.current_node))
                    ctx.err(ptr + "/node", "current placement violates allowed_nodes");
                sc.services.push_back(std::move(a));
            }
            std::map<std::string, int> load;
            for (const auto& s : sc.services)
                if (s.current_node) ++load[*s.current_node];
            for (const auto& n : sc.compute_nodes)
                if (load[n.id] > n.capacity)
                    ctx.err("/services", "initial placements exceed capacity of node " + n.id);
        }
        if (root.contains("modes") && expect_array(root["modes"], "/modes", ctx)) {
            for (std::size_t i = 0; i < root["modes"].size(); ++i) {
                const std::string ptr = "/modes/" + std::to_string(i);
                const json& m = root["modes"][i];
                if (!expect_object(m, ptr, ctx)) continue;
                OperationMode mode;
                mode.name = get_string(m, "name", ptr, ctx);
                if (m.contains("policy") && m["policy"].is_object()) {
                    for (auto it = m["policy"].begin(); it != m["policy"].end(); ++it) {
                        bool known_service = false;
                        for (const auto& s : sc.services) known_service |= s.id == it.key();
                        if (!known_service)
                            ctx.err(ptr + "/policy/" + it.key(), "unknown service");
                        PlacementPolicy p;
                        const std::string v = it.value().get<std::string>();
                        if (v == "disabled") p.kind = PlacementPolicy::Kind::Disabled;
                        else if (v == "any") p.kind = PlacementPolicy::Kind::Any;
                        else {
                            p.kind = PlacementPolicy::Kind::Node;
                            p.node = v;
                            bool known = false;
                            for (const auto& n : sc.compute_nodes) known |= n.id == v;
                            if (!known)
                                ctx.err(ptr + "/policy/" + it.key(),
                                        "unknown compute node '" + v + "'");
                        }
                        mode.policy[it.key()] = p;
                    }
                }
                sc.modes.push_back(std::move(mode));
            }
        }
        sc.initial_mode = get_string(root, "initial_mode", "", ctx, "", false);
        if (!sc.initial_mode.empty()) {
            bool known = false;
            for (const auto& m : sc.modes) known |= m.name == sc.initial_mode;
            if (!known) ctx.err("/initial_mode", "unknown mode '" + sc.initial_mode + "'");
        }
        // A fail-safe mode must shed every optional service and keep the
        // critical set placed.
        for (std::size_t i = 0; i < sc.modes.size(); ++i) {
            if (sc.modes[i].name != "FailSafe") continue;
            for (const auto& s : sc.services) {
                auto it = sc.modes[i].policy.find(s.id);
                const std::string ptr = "/modes/" + std::to_string(i) + "/policy/" + s.id;
                if (s.criticality == Criticality::Optional) {
                    if (it == sc.modes[i].policy.end() ||
                        it->second.kind != PlacementPolicy::Kind::Disabled)
                        ctx.err(ptr, "FailSafe must disable optional service " + s.id);
                } else if (it != sc.modes[i].policy.end() &&
                           it->second.kind == PlacementPolicy::Kind::Disabled) {
                    ctx.err(ptr, "FailSafe cannot disable critical service " + s.id);
                }
            }
        }
    }

    void parse_acdc_cfg(const json& root, Scenario& sc, Ctx& ctx) {
        if (root.contains("fusion")) {
            const json& f = root["fusion"];
            if (expect_object(f, "/fusion", ctx)) {
                if (f.contains("window_s"))
                    sc.fusion.window_us = us_from_s(f["window_s"].get<double>());
                if (f.contains("k_threshold")) sc.fusion.k_threshold = f["k_threshold"].get<int>();
                try {
                    validate(sc.fusion);
                } catch (const std::exception& e) {
                    ctx.err("/fusion", e.what());
                }
            }
        }
        if (root.contains("decision_rules") &&
            expect_array(root["decision_rules"], "/decision_rules", ctx)) {
            for (std::size_t i = 0; i < root["decision_rules"].size(); ++i) {
                const std::string ptr = "/decision_rules/" + std::to_string(i);
                const json& r = root["decision_rules"][i];
                if (!expect_object(r, ptr, ctx)) continue;
                DecisionRule rule;
                rule.classification = get_string(r, "classification", ptr, ctx);
                if (r.contains("stream_contains"))
                    rule.stream_contains = r["stream_contains"].get<std::string>();
                if (r.contains("sensor_prefix"))
                    rule.sensor_prefix = r["sensor_prefix"].get<std::string>();
                const std::string stage = get_string(r, "stage", ptr, ctx, "containment", false);
                if (stage == "containment") rule.stage = ResponseStage::Containment;
                else if (stage == "eradication") rule.stage = ResponseStage::Eradication;
                else if (stage == "recovery") rule.stage = ResponseStage::Recovery;
                else ctx.err(ptr + "/stage", "unknown stage '" + stage + "'");
                if (r.contains("set_mode")) {
                    rule.action.kind = ResponseAction::Kind::SetOperationMode;
                    rule.action.mode = r["set_mode"].get<std::string>();
                    bool known = false;
                    for (const auto& m : sc.modes) known |= m.name == rule.action.mode;
                    if (!known) ctx.err(ptr + "/set_mode", "unknown mode");
                } else if (r.contains("sdn_countermeasure")) {
                    rule.action.kind = ResponseAction::Kind::SdnCountermeasure;
                    rule.action.sdn =
                        parse_countermeasure(r["sdn_countermeasure"], ptr + "/sdn_countermeasure",
                                             sc, ctx);
                } else {
                    rule.action.kind = ResponseAction::Kind::NoOp;
                }
                sc.decision_rules.push_back(std::move(rule));
            }
        }
        if (root.contains("controller_rules") &&
            expect_array(root["controller_rules"], "/controller_rules", ctx)) {
            for (std::size_t i = 0; i < root["controller_rules"].size(); ++i) {
                const std::string ptr = "/controller_rules/" + std::to_string(i);
                const json& r = root["controller_rules"][i];
                if (!expect_object(r, ptr, ctx)) continue;
                ControllerRule rule;
                rule.on = get_string(r, "on", ptr, ctx, "anomaly_report", false);
                if (r.contains("monitor")) rule.monitor_id = r["monitor"].get<std::string>();
                if (r.contains("stream_contains"))
                    rule.stream_contains = r["stream_contains"].get<std::string>();
                if (r.contains("remove_reported_flow") &&
                    r["remove_reported_flow"].get<bool>()) {
                    rule.remove_reported_flow = true;
                    rule.countermeasure.kind = CountermeasureSpec::Kind::RemoveFlow;
                } else if (r.contains("countermeasure")) {
                    rule.countermeasure =
                        parse_countermeasure(r["countermeasure"], ptr + "/countermeasure", sc, ctx);
                } else {
                    ctx.err(ptr, "needs remove_reported_flow or countermeasure");
                }
                sc.controller_rules.push_back(std::move(rule));
            }
        }
    }

    CountermeasureSpec parse_countermeasure(const json& j, const std::string& ptr, Scenario& sc,
                                            Ctx& ctx) {
        CountermeasureSpec spec;
        if (!expect_object(j, ptr, ctx)) return spec;
        const std::string kind = get_string(j, "kind", ptr, ctx);
        if (kind == "remove_flow") {
            spec.kind = CountermeasureSpec::Kind::RemoveFlow;
            if (j.contains("match")) {
                StreamKey k = parse_stream_key(j["match"], ptr + "/match", ctx);
                spec.pattern.ip_src = k.ip_src;
                spec.pattern.ip_dst = k.ip_dst;
                spec.pattern.ip_proto = k.ip_proto;
                spec.pattern.l4_src = k.l4_src;
                spec.pattern.l4_dst = k.l4_dst;
            } else {
                ctx.err(ptr + "/match", "remove_flow needs a match pattern");
            }
        } else if (kind == "disable_dynamic") {
            spec.kind = CountermeasureSpec::Kind::DisableDynamic;
        } else if (kind == "fallback_static") {
            spec.kind = CountermeasureSpec::Kind::FallbackStatic;
        } else if (kind == "block_source") {
            spec.kind = CountermeasureSpec::Kind::BlockSource;
            try {
                spec.block_ip = ip_from_string(get_string(j, "ip", ptr, ctx));
            } catch (const std::exception& e) {
                ctx.err(ptr + "/ip", e.what());
            }
        } else {
            ctx.err(ptr + "/kind", "unknown countermeasure kind '" + kind + "'");
        }
        (void)sc;
        return spec;
    }

    void parse_attacks(const json& root, Scenario& sc, Ctx& ctx) {
        if (root.contains("open_services") &&
            expect_array(root["open_services"], "/open_services", ctx)) {
            for (std::size_t i = 0; i < root["open_services"].size(); ++i) {
                const std::string ptr = "/open_services/" + std::to_string(i);
                const json& o = root["open_services"][i];
                if (!expect_object(o, ptr, ctx)) continue;
                OpenService svc;
                svc.node = node_ref(sc, o, "node", ptr, ctx);
                svc.l4_port = static_cast<std::uint16_t>(get_number(o, "l4_port", ptr, ctx));
                sc.open_services.push_back(svc);
            }
        }
        if (!root.contains("attacks")) return;
        if (!expect_array(root["attacks"], "/attacks", ctx)) return;
        for (std::size_t i = 0; i < root["attacks"].size(); ++i) {
            const std::string ptr = "/attacks/" + std::to_string(i);
            const json& a = root["attacks"][i];
            if (!expect_object(a, ptr, ctx)) continue;
            AttackConfig atk;
            atk.id = static_cast<std::uint32_t>(i + 1);
            atk.name = get_string(a, "name", ptr, ctx, "attack-" + std::to_string(i + 1), false);
            atk.entry = node_ref(sc, a, "entry", ptr, ctx);
            atk.start_s = get_number(a, "start_s", ptr, ctx);
            atk.start_jitter_ms = get_number(a, "start_jitter_ms", ptr, ctx, 0.0, false);
            const std::string kind = get_string(a, "kind", ptr, ctx);
            if (kind == "dos_flood") {
                atk.kind = AttackConfig::Kind::DosFlood;
                if (a.contains("target"))
                    atk.dos.target = parse_stream_key(a["target"], ptr + "/target", ctx);
                else ctx.err(ptr + "/target", "missing required field");
                if (!(atk.dos.target.ip_src && atk.dos.target.ip_dst && atk.dos.target.ip_proto &&
                      atk.dos.target.l4_src && atk.dos.target.l4_dst))
                    ctx.err(ptr + "/target", "dos target must be a fully specified 5-tuple");
                atk.dos.duration_s = get_number(a, "duration_s", ptr, ctx);
                if (atk.dos.duration_s <= 0.0) ctx.err(ptr + "/duration_s", "must be positive");
                if (a.contains("total_frames")) {
                    atk.dos.total_frames = a["total_frames"].get<std::uint64_t>();
                    if (atk.dos.total_frames == 0) ctx.err(ptr + "/total_frames", "must be >= 1");
                    atk.dos.rate_pps =
                        static_cast<double>(atk.dos.total_frames) / atk.dos.duration_s;
                } else {
                    atk.dos.rate_pps = get_number(a, "rate_pps", ptr, ctx);
                    if (atk.dos.rate_pps <= 0.0) ctx.err(ptr + "/rate_pps", "must be positive");
                }
                atk.dos.frame_bytes =
                    static_cast<std::uint32_t>(get_number(a, "frame_bytes", ptr, ctx, 60, false));
            } else if (kind == "port_scan") {
                atk.kind = AttackConfig::Kind::PortScan;
                if (a.contains("target_ips")) {
                    for (std::size_t t = 0; t < a["target_ips"].size(); ++t) {
                        try {
                            atk.scan.target_ips.push_back(
                                ip_from_string(a["target_ips"][t].get<std::string>()));
                        } catch (const std::exception& e) {
                            ctx.err(ptr + "/target_ips/" + std::to_string(t), e.what());
                        }
                    }
                }
                atk.scan.port_from =
                    static_cast<std::uint16_t>(get_number(a, "port_from", ptr, ctx, 0, false));
                atk.scan.port_to =
                    static_cast<std::uint16_t>(get_number(a, "port_to", ptr, ctx, 0, false));
                const std::string probe = get_string(a, "probe", ptr, ctx, "tcp_syn", false);
                if (probe == "tcp_syn") atk.scan.probe = ProbeKind::TcpSyn;
                else if (probe == "ping") atk.scan.probe = ProbeKind::Ping;
                else ctx.err(ptr + "/probe", "expected tcp_syn or ping");
                atk.scan.src_port =
                    static_cast<std::uint16_t>(get_number(a, "src_port", ptr, ctx, 54321, false));
                atk.scan.probe_interval_ms =
                    get_number(a, "probe_interval_ms", ptr, ctx, 1.0, false);
            } else if (kind == "spoof") {
                atk.kind = AttackConfig::Kind::Spoof;
                atk.spoof.forged_src = node_ref(sc, a, "forged_src", ptr, ctx);
                if (atk.spoof.forged_src != kNoNode && atk.spoof.forged_src == atk.entry)
                    ctx.err(ptr + "/forged_src",
                            "spoofed source must differ from the attacker's entry node");
                if (a.contains("target"))
                    atk.spoof.target = parse_stream_key(a["target"], ptr + "/target", ctx);
                atk.spoof.rate_pps = get_number(a, "rate_pps", ptr, ctx, 100.0, false);
                atk.spoof.duration_s = get_number(a, "duration_s", ptr, ctx, 1.0, false);
            } else if (kind == "replay") {
                atk.kind = AttackConfig::Kind::Replay;
                if (a.contains("slice_stream"))
                    atk.replay.slice_stream =
                        parse_stream_key(a["slice_stream"], ptr + "/slice_stream", ctx);
                else ctx.err(ptr + "/slice_stream", "missing required field");
                atk.replay.record_from_s = get_number(a, "record_from_s", ptr, ctx, 0.0, false);
                atk.replay.record_to_s = get_number(a, "record_to_s", ptr, ctx, 1.0, false);
                if (atk.replay.record_to_s <= atk.replay.record_from_s)
                    ctx.err(ptr + "/record_to_s", "record window must be non-empty");
            } else {
                ctx.err(ptr + "/kind", "unknown attack kind '" + kind + "'");
            }
            sc.attacks.push_back(std::move(atk));
        }
    }

    void parse_output(const json& root, Scenario& sc, Ctx& ctx) {
        if (!root.contains("output")) return;
        const json& o = root["output"];
        if (!expect_object(o, "/output", ctx)) return;
        if (o.contains("events")) sc.output.events = o["events"].get<bool>();
        if (o.contains("nads_csv")) sc.output.nads_csv = o["nads_csv"].get<bool>();
        if (o.contains("timing_csv")) sc.output.timing_csv = o["timing_csv"].get<bool>();
        if (o.contains("tables")) sc.output.tables = o["tables"].get<bool>();
    }

    void cross_validate(Scenario& sc, Ctx& ctx) {
        try {
            sc.topology.check_invariants();
        } catch (const std::exception& e) {
            ctx.err("/topology", e.what());
        }
        for (std::size_t i = 0; i < sc.comm_matrix.size(); ++i) {
            if (!sc.comm_matrix[i].fully_concrete())
                ctx.err("/comm_matrix/" + std::to_string(i), "entry is not fully specified");
        }
        // Static provisioning must succeed on every valid scenario.
        try {
            provision_static(sc.comm_matrix, sc.topology);
        } catch (const std::exception& e) {
            ctx.err("/comm_matrix", e.what());
        }
    }
};

LoadResult load_scenario_text(const std::string& text, const std::string& origin) {
    LoadResult out;
    json root;
    try {
        root = json::parse(text);
    } catch (const std::exception& e) {
        out.errors.push_back(origin + ": JSON parse error: " + e.what());
        return out;
    }
    ScenarioLoader loader;
    return loader.load(root);
}

LoadResult load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        LoadResult out;
        out.errors.push_back(path + ": cannot open file");
        return out;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario_text(ss.str(), path);
}

}  // namespace ivnsim

#include "ivnsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <queue>
#include <set>

#include "ivnsim/acdc.hpp"
#include "ivnsim/controlplane.hpp"
#include "ivnsim/dataplane.hpp"
#include "ivnsim/nads.hpp"
#include "ivnsim/orchestrator.hpp"
#include "ivnsim/rng.hpp"

namespace ivnsim {

namespace {

enum class EvKind : std::uint8_t {
    EmitterWake,
    FrameHop,
    IntervalClose,
    ReportAtController,
    SensorIngestReport,
    SensorIngestViolation,
    WhitelistInstall,
    CmApply,
    CmComplete,
    CmDeadline,
    DirectiveAtActuator,
    ReallocDone,
    ModeChangeComplete,
};

struct Ev {
    SimTime t = 0;
    std::uint64_t seq = 0;
    EvKind kind = EvKind::EmitterWake;
    EthernetFrame frame;
    NodeId to = kNoNode;
    NodeId from = kNoNode;
    int idx = -1;
    int idx2 = -1;
    std::uint64_t u = 0;
};

struct EvAfter {
    bool operator()(const Ev& a, const Ev& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.seq > b.seq;
    }
};

struct Emitter {
    enum class Type : std::uint8_t { Can, Video, Dos, Scan, Spoof, Replay } type = Type::Can;
    int cfg_index = -1;
    int attack_index = -1;  // >= 0 for attack emitters
    NodeId src = kNoNode;
    NodeId first_hop = kNoNode;
    SimTime link_us = 100;
    SimTime start_us = 0;
    SimTime next_t = 0;
    SimTime prev_t = -1;
    std::uint64_t emitted = 0;
    std::uint64_t total = UINT64_MAX;
    bool done = false;
    bool start_logged = false;
    EthernetFrame proto;          // header template
    SimTime period_us = 0;        // periodic sources
    double jitter_sigma_us = 0.0;
    double rate_pps = 0.0;        // dos / spoof
    Rng rng{0};
    std::vector<std::pair<std::uint32_t, std::uint16_t>> scan_targets;  // (ip, port)
};

struct AttackRt {
    NodeId victim = kNoNode;
    StreamKey victim_stream;
    bool has_victim_stream = false;
    SimTime start_actual = -1;
    SimTime first_nads = -1;
    SimTime first_victim = -1;
    SimTime last_victim = -1;
    SimTime last_stream_delivery = -1;  // any frame of the victim stream at the victim
    std::uint64_t emitted = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t responses = 0;
    std::uint64_t probes = 0;
    bool detected = false;
    SimTime cm_complete = -1;
    SimTime mode_complete = -1;
};

struct ReportRt {
    std::uint64_t id = 0;
    int monitor = -1;
    std::string stream;
    std::int64_t interval = 0;
    std::uint32_t attack = 0;
    SimTime emission = 0;
};

struct CmRt {
    CountermeasurePlan plan;
    std::uint32_t attack = 0;
    double dispatch_ms = 0.0;
    double ack_ms = 0.0;
    SimTime issued = 0;
    SimTime complete_at = 0;
    bool complete = false;
    std::vector<std::pair<NodeId, std::uint32_t>> applied;  // (switch, rules_removed)
};

struct DirectiveRt {
    ResponseDirective directive;
    Incident incident;
    std::uint32_t attack = 0;
    double rtt_ms = 0.0;
};

struct PendingInstall {
    PacketInDecision decision;
    PacketIn pin;
};

struct ReallocRt {
    ReallocationEvent ev;
    int directive_index = -1;
};

struct NadsGroup {
    std::vector<int> monitor_idx;      // into monitors_
    std::vector<StreamKey> keys;
    EthernetFrame memo_key;
    int memo_val = -1;
    bool memo_valid = false;
};

struct PinMemo {
    EthernetFrame key;
    int in_port = -1;
    std::uint64_t version = ~0ULL;
    bool valid = false;
};

class Engine {
public:
    Engine(const Scenario& sc, std::uint64_t seed, const RunSinks& sinks)
        : sc_(sc), seed_(seed), sinks_(sinks), topo_(sc.topology),
          n_(static_cast<int>(sc.topology.node_count())),
          end_us_(us_from_s(sc.duration_s)),
          controller_(&sc.topology, sc.acl, sc.whitelist, sc.log_unknown),
          sensor_(sc.fusion),
          rng_cm_(derive_seed(seed, "countermeasure")),
          rng_acdc_(derive_seed(seed, "acdc")),
          rng_realloc_(derive_seed(seed, "realloc")) {}

    RunResult run();

private:
    // --- setup -------------------------------------------------------------
    void build_network();
    void build_monitors();
    void build_orchestration();
    void build_emitters();
    EthernetFrame resolve_tuple_frame(const StreamKey& key) const;

    // --- event plumbing ----------------------------------------------------
    // Two queues with one global (time, seq) order: control events bound all
    // inline frame processing; queued frame hops only appear when a frame
    // chain would straddle the next control event. Data-plane frame effects
    // commute with each other (counters, min/max capture, per-interval
    // buffers sorted at close), so frames below the control horizon can be
    // processed synchronously without heap traffic.
    void push(Ev ev) {
        ev.seq = next_seq_++;
        if (ev.kind == EvKind::FrameHop) {
            hop_q_.push(std::move(ev));
        } else {
            control_horizon_ = std::min(control_horizon_, ev.t);
            control_q_.push(std::move(ev));
        }
    }

    void dispatch(const Ev& ev);

    // --- frame path ----------------------------------------------------------
    void emitter_wake(int e);
    void emit_one(Emitter& e, SimTime t);
    EthernetFrame build_frame(Emitter& e, SimTime t);
    void advance_emitter(Emitter& e);

    void deliver_frame(const EthernetFrame& f, NodeId to, NodeId from, SimTime at, int depth);
    void process_arrival(const EthernetFrame& f, NodeId node, NodeId from, SimTime t, int depth);
    void process_at_switch(const EthernetFrame& f, NodeId node, int in_port, SimTime t,
                           int depth);
    void endpoint_delivery(const EthernetFrame& f, NodeId node, SimTime at, bool count_delivery);
    void handle_pin(const PacketIn& pin);
    void nads_observe(NodeId sw, const EthernetFrame& f, SimTime obs_t);
    void nads_on_frame(int m, SimTime ts, std::uint32_t len, std::uint32_t attack_id);

    // --- detection / response ------------------------------------------------
    void interval_close(int m, SimTime t);
    void report_at_controller(std::uint64_t report_idx, SimTime t);
    void issue_countermeasure(const CountermeasureSpec& spec, std::uint32_t attack,
                              const std::string& trigger, SimTime t);
    void sensor_ingest_report(std::uint64_t report_idx, SimTime t);
    void sensor_ingest_violation(int violation_idx, SimTime t);
    void do_ingest(const SecuritySensorReport& rep, std::uint32_t attack, SimTime t);
    void directive_at_actuator(int d_idx, SimTime t);
    void apply_whitelist_install(int idx, SimTime t);

    void finalize(SimTime t);
    nlohmann::ordered_json build_summary(const std::vector<TimingRecord>& timings) const;

    // --- precomputed topology ------------------------------------------------
    int port_of(NodeId on, NodeId toward) const { return port_of_[on * n_ + toward]; }
    SimTime lat(NodeId a, NodeId b) const { return lat_[a * n_ + b]; }

    const Scenario& sc_;
    std::uint64_t seed_;
    RunSinks sinks_;
    const Topology& topo_;
    int n_;
    SimTime end_us_;

    std::vector<int> port_of_;
    std::vector<SimTime> lat_;
    std::vector<std::vector<NodeId>> peer_by_port_;
    std::vector<std::unique_ptr<Switch>> switches_;  // indexed by node id
    std::vector<NodeId> switch_ids_;
    std::vector<NodeId> mirror_of_;
    std::vector<SimTime> mirror_lat_;

    Controller controller_;
    SensorManager sensor_;
    ActuatorManager actuator_;

    std::vector<StreamMonitor> monitors_;
    std::vector<std::int64_t> mon_next_close_idx_;
    std::vector<SimTime> mon_boundary_us_;
    std::vector<std::vector<std::tuple<SimTime, std::uint32_t, std::uint32_t>>> mon_pending_;
    std::vector<Rng> mon_rng_;
    std::vector<NadsGroup> nads_groups_;  // indexed by node id
    SimTime assess_delay_us_ = 1000;

    std::vector<ServiceApp> services_;
    std::string current_mode_;

    std::vector<Emitter> emitters_;
    std::vector<AttackRt> attacks_;
    std::vector<std::vector<EthernetFrame>> replay_buf_;

    std::vector<ReportRt> reports_;
    std::vector<ViolationLog> violations_;
    std::map<std::string, std::uint64_t> violations_by_label_;
    std::vector<CmRt> cms_;
    std::vector<DirectiveRt> directives_;
    std::vector<PendingInstall> pending_installs_;
    std::vector<ReallocRt> reallocs_;
    std::set<std::pair<int, std::string>> issued_cm_keys_;
    std::set<std::uint64_t> open_ports_;  // (node << 16) | port

    std::vector<PinMemo> pin_memo_;  // per node id
    std::vector<std::vector<Emission>> scratch_;

    Rng rng_cm_{0};
    Rng rng_acdc_{0};
    Rng rng_realloc_{0};

    std::priority_queue<Ev, std::vector<Ev>, EvAfter> control_q_;
    std::priority_queue<Ev, std::vector<Ev>, EvAfter> hop_q_;
    SimTime control_horizon_ = 0;  // time of the next queued control event
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_report_id_ = 0;
    std::uint64_t next_directive_id_ = 0;
    SimTime now_ = 0;
    SimTime last_event_t_ = 0;

    EventLog log_;
};

// ---------------------------------------------------------------------------
// setup

void Engine::build_network() {
    port_of_.assign(static_cast<std::size_t>(n_) * n_, -1);
    lat_.assign(static_cast<std::size_t>(n_) * n_, -1);
    peer_by_port_.resize(static_cast<std::size_t>(n_));
    for (const auto& l : topo_.links()) {
        lat_[l.a * n_ + l.b] = l.latency_us;
        lat_[l.b * n_ + l.a] = l.latency_us;
    }
    for (NodeId v = 0; v < n_; ++v) {
        const int pc = topo_.port_count(v);
        peer_by_port_[v].assign(static_cast<std::size_t>(pc) + 1, kNoNode);
        for (int p = 1; p <= pc; ++p) {
            const NodeId peer = topo_.peer_of_port(v, p);
            peer_by_port_[v][static_cast<std::size_t>(p)] = peer;
            port_of_[v * n_ + peer] = p;
        }
    }

    switches_.resize(static_cast<std::size_t>(n_));
    mirror_of_.assign(static_cast<std::size_t>(n_), kNoNode);
    mirror_lat_.assign(static_cast<std::size_t>(n_), 0);
    pin_memo_.resize(static_cast<std::size_t>(n_));
    for (NodeId v = 0; v < n_; ++v) {
        if (topo_.node(v).kind != NodeKind::Switch) continue;
        const NodeId m = topo_.mirror_target(v);
        switches_[v] = std::make_unique<Switch>(v, topo_.port_count(v), m, sc_.mirror_point);
        switch_ids_.push_back(v);
        mirror_of_[v] = m;
        mirror_lat_[v] = lat(v, m) >= 0 ? lat(v, m) : sc_.latency.link_us;
    }

    auto tables = provision_static(sc_.comm_matrix, topo_);
    for (auto& [sw, rules] : tables) {
        for (auto& r : rules) {
            FlowMod mod;
            mod.kind = FlowMod::Kind::Add;
            mod.rule = r;
            switches_[sw]->apply_flow_mod(mod, 0);
        }
        auto& p = log_.emit(0, "provision");
        p["switch"] = topo_.node(sw).name;
        p["rules"] = rules.size();
    }

    for (const auto& os : sc_.open_services)
        open_ports_.insert((static_cast<std::uint64_t>(os.node) << 16) | os.l4_port);

    scratch_.resize(16);
}

void Engine::build_monitors() {
    assess_delay_us_ = us_from_ms(sc_.latency.assessment_delay_ms);
    nads_groups_.resize(static_cast<std::size_t>(n_));
    for (std::size_t i = 0; i < sc_.monitors.size(); ++i) {
        const auto& cfg = sc_.monitors[i];
        monitors_.emplace_back(cfg);
        mon_next_close_idx_.push_back(0);
        mon_boundary_us_.push_back(cfg.interval_us);
        mon_pending_.emplace_back();
        mon_rng_.emplace_back(derive_seed(seed_, "nads/" + cfg.id));
        const NodeId nid = topo_.find(cfg.nads);
        nads_groups_[static_cast<std::size_t>(nid)].monitor_idx.push_back(static_cast<int>(i));
        nads_groups_[static_cast<std::size_t>(nid)].keys.push_back(cfg.stream);
        if (cfg.interval_us <= assess_delay_us_)
            throw ScenarioInvalid("monitor " + cfg.id + ": interval must exceed assessment delay");
        Ev ev;
        ev.kind = EvKind::IntervalClose;
        ev.t = cfg.interval_us + assess_delay_us_;
        ev.idx = static_cast<int>(i);
        push(ev);
    }
    for (NodeId v = 0; v < n_; ++v)
        if (topo_.node(v).kind == NodeKind::Nads) sensor_.register_sensor(topo_.node(v).name);
    sensor_.register_sensor("sdn-controller");
}

void Engine::build_orchestration() {
    services_ = sc_.services;
    current_mode_ = sc_.initial_mode;
}

EthernetFrame Engine::resolve_tuple_frame(const StreamKey& key) const {
    // L2 identity for a forged 5-tuple: prefer the whitelist/matrix entry
    // that carries the flow, else derive from the address owners.
    EthernetFrame f;
    f.ip_src = key.ip_src;
    f.ip_dst = key.ip_dst;
    f.ip_proto = key.ip_proto;
    f.l4_src = key.l4_src;
    f.l4_dst = key.l4_dst;
    for (const auto& w : sc_.whitelist) {
        if (key.ip_src == w.ip_src && key.ip_dst == w.ip_dst && key.ip_proto == w.ip_proto &&
            key.l4_src == w.l4_src && key.l4_dst == w.l4_dst) {
            f.src_mac = w.src_mac;
            f.dst_mac = w.dst_mac;
            f.vlan = w.vlan;
            f.ethertype = w.ethertype;
            return f;
        }
    }
    for (const auto& m : sc_.comm_matrix) {
        if (key.ip_src == m.ip_src && key.ip_dst == m.ip_dst && key.ip_proto == m.ip_proto &&
            key.l4_src == m.l4_src && key.l4_dst == m.l4_dst) {
            f.src_mac = m.src_mac;
            f.dst_mac = m.dst_mac;
            f.vlan = m.vlan ? *m.vlan : 0;
            f.ethertype = m.ethertype;
            return f;
        }
    }
    if (key.ip_src) {
        const NodeId s = topo_.node_by_ip(*key.ip_src);
        f.src_mac = s != kNoNode ? topo_.node(s).mac : 0x02FF00000000ULL | *key.ip_src;
    }
    if (key.ip_dst) {
        const NodeId d = topo_.node_by_ip(*key.ip_dst);
        f.dst_mac = d != kNoNode ? topo_.node(d).mac : 0x02FF00000000ULL | *key.ip_dst;
    }
    return f;
}

void Engine::build_emitters() {
    attacks_.resize(sc_.attacks.size());
    replay_buf_.resize(sc_.attacks.size());

    auto attach = [&](Emitter& e, NodeId src) {
        e.src = src;
        const auto& nb = topo_.neighbors(src);
        if (nb.empty()) throw ScenarioInvalid("node " + topo_.node(src).name + " has no link");
        e.first_hop = nb.front();
        e.link_us = lat(src, e.first_hop);
    };

    for (std::size_t i = 0; i < sc_.can_streams.size(); ++i) {
        const auto& cs = sc_.can_streams[i];
        Emitter e;
        e.type = Emitter::Type::Can;
        e.cfg_index = static_cast<int>(i);
        attach(e, cs.sender);
        e.period_us = us_from_ms(cs.cycle_ms);
        e.start_us = us_from_s(cs.start_s);
        e.jitter_sigma_us = cs.jitter_sigma_pct / 100.0 * 1000.0 * cs.cycle_ms;
        e.rng = Rng(derive_seed(seed_, "stream/" + cs.id));
        const DomainTunnel* tunnel = nullptr;
        for (const auto& t : sc_.tunnels)
            if (t.domain == cs.domain) tunnel = &t;
        CanMessage msg;
        msg.can_id = cs.can_id;
        msg.payload_len = cs.payload_len;
        for (std::uint8_t b = 0; b < cs.payload_len; ++b) msg.payload[b] = 0xA5;
        msg.domain = cs.domain;
        msg.nominal_cycle_ms = cs.cycle_ms;
        e.proto = encapsulate_can(msg, *tunnel, cs.sender, topo_, 0);
        e.next_t = e.start_us;
        emitters_.push_back(std::move(e));
    }

    for (std::size_t i = 0; i < sc_.video_streams.size(); ++i) {
        const auto& vs = sc_.video_streams[i];
        Emitter e;
        e.type = Emitter::Type::Video;
        e.cfg_index = static_cast<int>(i);
        attach(e, vs.src);
        e.period_us = static_cast<SimTime>(std::llround(1e6 / vs.fps));
        e.start_us = us_from_s(vs.start_s);
        e.jitter_sigma_us = vs.jitter_sigma_pct / 100.0 * static_cast<double>(e.period_us);
        e.rng = Rng(derive_seed(seed_, "stream/" + vs.id));
        EthernetFrame f;
        f.src_mac = topo_.node(vs.src).mac;
        f.dst_mac = topo_.node(vs.dst).mac;
        f.vlan = vs.vlan;
        f.ip_src = topo_.node(vs.src).ip;
        f.ip_dst = topo_.node(vs.dst).ip;
        f.ip_proto = kProtoUdp;
        f.l4_src = vs.l4_src;
        f.l4_dst = vs.l4_dst;
        f.payload_len = vs.frame_bytes;
        f.payload_kind = PayloadKind::VideoChunk;
        f.src_node = vs.src;
        e.proto = f;
        e.next_t = e.start_us;
        emitters_.push_back(std::move(e));
    }

    for (std::size_t i = 0; i < sc_.attacks.size(); ++i) {
        const auto& atk = sc_.attacks[i];
        Emitter e;
        e.attack_index = static_cast<int>(i);
        e.cfg_index = static_cast<int>(i);
        attach(e, atk.entry);
        e.rng = Rng(derive_seed(seed_, "attack/" + atk.name));
        SimTime start = us_from_s(atk.start_s);
        if (atk.start_jitter_ms > 0.0)
            start += us_from_ms(e.rng.uniform() * atk.start_jitter_ms);
        e.start_us = start;
        e.next_t = start;
        AttackRt& rt = attacks_[i];

        switch (atk.kind) {
            case AttackConfig::Kind::DosFlood: {
                e.type = Emitter::Type::Dos;
                e.rate_pps = atk.dos.rate_pps;
                e.total = atk.dos.total_frames > 0
                              ? atk.dos.total_frames
                              : static_cast<std::uint64_t>(atk.dos.rate_pps * atk.dos.duration_s +
                                                           1e-9);
                e.proto = resolve_tuple_frame(atk.dos.target);
                e.proto.payload_len = atk.dos.frame_bytes;
                e.proto.payload_kind = PayloadKind::RawBytes;
                e.proto.src_node = atk.entry;
                e.proto.attack_id = atk.id;
                rt.victim = atk.dos.target.ip_dst ? topo_.node_by_ip(*atk.dos.target.ip_dst)
                                                  : kNoNode;
                rt.victim_stream = atk.dos.target;
                rt.has_victim_stream = true;
                break;
            }
            case AttackConfig::Kind::PortScan: {
                e.type = Emitter::Type::Scan;
                for (std::uint32_t ip : atk.scan.target_ips) {
                    if (atk.scan.probe == ProbeKind::Ping) {
                        e.scan_targets.emplace_back(ip, 0);
                    } else {
                        for (int p = atk.scan.port_from; p <= atk.scan.port_to; ++p)
                            e.scan_targets.emplace_back(ip, static_cast<std::uint16_t>(p));
                    }
                }
                e.total = e.scan_targets.size();
                e.period_us = us_from_ms(atk.scan.probe_interval_ms);
                e.proto.src_mac = topo_.node(atk.entry).mac;
                e.proto.ip_src = topo_.node(atk.entry).ip;
                e.proto.payload_kind = PayloadKind::ScanProbe;
                e.proto.src_node = atk.entry;
                e.proto.attack_id = atk.id;
                break;
            }
            case AttackConfig::Kind::Spoof: {
                e.type = Emitter::Type::Spoof;
                e.rate_pps = atk.spoof.rate_pps;
                e.total = static_cast<std::uint64_t>(atk.spoof.rate_pps * atk.spoof.duration_s +
                                                     1e-9);
                e.proto = resolve_tuple_frame(atk.spoof.target);
                if (atk.spoof.forged_src != kNoNode) {
                    e.proto.src_mac = topo_.node(atk.spoof.forged_src).mac;
                    e.proto.ip_src = topo_.node(atk.spoof.forged_src).ip;
                }
                e.proto.payload_len = atk.spoof.frame_bytes;
                e.proto.payload_kind = PayloadKind::RawBytes;
                e.proto.src_node = atk.entry;
                e.proto.attack_id = atk.id;
                rt.victim = atk.spoof.target.ip_dst ? topo_.node_by_ip(*atk.spoof.target.ip_dst)
                                                    : kNoNode;
                break;
            }
            case AttackConfig::Kind::Replay: {
                e.type = Emitter::Type::Replay;
                // Frame count known only at start time; emission draws from
                // the recorded slice.
                e.total = UINT64_MAX;
                break;
            }
        }
        emitters_.push_back(std::move(e));
    }

    for (std::size_t i = 0; i < emitters_.size(); ++i) {
        if (emitters_[i].total == 0) continue;  // e.g. an empty scan range
        if (emitters_[i].next_t > end_us_) continue;
        Ev ev;
        ev.kind = EvKind::EmitterWake;
        ev.t = emitters_[i].next_t;
        ev.idx = static_cast<int>(i);
        push(ev);
    }
}

// ---------------------------------------------------------------------------
// emitters

void Engine::advance_emitter(Emitter& e) {
    ++e.emitted;
    if (e.emitted >= e.total && e.type != Emitter::Type::Can &&
        e.type != Emitter::Type::Video) {
        e.done = true;
        return;
    }
    SimTime next = 0;
    switch (e.type) {
        case Emitter::Type::Can:
        case Emitter::Type::Video: {
            const SimTime nominal = e.start_us + static_cast<SimTime>(e.emitted) * e.period_us;
            SimTime t = nominal;
            if (e.jitter_sigma_us > 0.0)
                t = nominal + static_cast<SimTime>(std::llround(e.rng.normal(0.0, e.jitter_sigma_us)));
            next = std::max(t, e.prev_t + 1);
            break;
        }
        case Emitter::Type::Dos:
        case Emitter::Type::Spoof:
            next = e.start_us +
                   static_cast<SimTime>(std::llround(static_cast<double>(e.emitted) * 1e6 /
                                                     e.rate_pps));
            break;
        case Emitter::Type::Scan:
            next = e.start_us + static_cast<SimTime>(e.emitted) * e.period_us;
            break;
        case Emitter::Type::Replay: {
            const auto& buf = replay_buf_[static_cast<std::size_t>(e.attack_index)];
            if (e.emitted >= buf.size()) {
                e.done = true;
                return;
            }
            next = e.start_us + (buf[e.emitted].timestamp - buf[0].timestamp);
            break;
        }
    }
    if (next > end_us_) {
        e.done = true;
        return;
    }
    e.next_t = next;
}

EthernetFrame Engine::build_frame(Emitter& e, SimTime t) {
    EthernetFrame f = e.proto;
    f.timestamp = t;
    switch (e.type) {
        case Emitter::Type::Scan: {
            const auto& [ip, port] = e.scan_targets[e.emitted];
            const auto& spec = sc_.attacks[static_cast<std::size_t>(e.attack_index)].scan;
            f.ip_dst = ip;
            const NodeId owner = topo_.node_by_ip(ip);
            f.dst_mac = owner != kNoNode ? topo_.node(owner).mac : 0x02FF00000000ULL | ip;
            if (spec.probe == ProbeKind::Ping) {
                f.ip_proto = kProtoIcmp;
                f.probe_kind = ProbeKind::Ping;
                f.payload_len = 64;
            } else {
                f.ip_proto = kProtoTcp;
                f.l4_src = spec.src_port;
                f.l4_dst = port;
                f.probe_kind = ProbeKind::TcpSyn;
                f.payload_len = 60;
            }
            break;
        }
        case Emitter::Type::Replay: {
            const auto& buf = replay_buf_[static_cast<std::size_t>(e.attack_index)];
            f = buf[e.emitted];
            f.timestamp = t;
            f.src_node = e.src;
            f.attack_id = sc_.attacks[static_cast<std::size_t>(e.attack_index)].id;
            break;
        }
        default:
            break;
    }
    return f;
}

void Engine::emit_one(Emitter& e, SimTime t) {
    if (e.attack_index >= 0 && !e.start_logged) {
        e.start_logged = true;
        const auto& atk = sc_.attacks[static_cast<std::size_t>(e.attack_index)];
        attacks_[static_cast<std::size_t>(e.attack_index)].start_actual = t;
        auto& p = log_.emit(t, "attack_start");
        p["attack"] = atk.id;
        p["name"] = atk.name;
        p["kind"] = static_cast<int>(atk.kind);
        p["entry"] = topo_.node(atk.entry).name;
        if (e.type == Emitter::Type::Replay &&
            replay_buf_[static_cast<std::size_t>(e.attack_index)].empty()) {
            p["error"] = "empty_slice";
            e.done = true;
            return;
        }
    }
    EthernetFrame f = build_frame(e, t);
    e.prev_t = t;
    if (e.attack_index >= 0) {
        auto& rt = attacks_[static_cast<std::size_t>(e.attack_index)];
        ++rt.emitted;
        if (e.type == Emitter::Type::Scan) ++rt.probes;
    }
    // Replay taps record live traffic the attacker can later re-emit.
    for (std::size_t a = 0; a < sc_.attacks.size(); ++a) {
        const auto& atk = sc_.attacks[a];
        if (atk.kind != AttackConfig::Kind::Replay || f.attack_id != 0) continue;
        if (t < us_from_s(atk.replay.record_from_s) || t >= us_from_s(atk.replay.record_to_s))
            continue;
        if (atk.replay.slice_stream.matches(f) && replay_buf_[a].size() < 200000)
            replay_buf_[a].push_back(f);
    }
    deliver_frame(f, e.first_hop, e.src, t + e.link_us, 0);
}

void Engine::emitter_wake(int idx) {
    Emitter& e = emitters_[static_cast<std::size_t>(idx)];
    // The popped wake precedes everything still queued, so the first
    // emission is always due; re-queueing it instead would livelock on
    // same-microsecond ties with other control events.
    bool first = true;
    while (!e.done) {
        const SimTime t = e.next_t;
        if (!first && t >= control_horizon_) {
            Ev ev;
            ev.kind = EvKind::EmitterWake;
            ev.t = t;
            ev.idx = idx;
            push(ev);
            return;
        }
        first = false;
        emit_one(e, t);
        if (e.done) return;
        advance_emitter(e);
    }
}

// ---------------------------------------------------------------------------
// frame path

void Engine::deliver_frame(const EthernetFrame& f, NodeId to, NodeId from, SimTime at,
                           int depth) {
    if (at < control_horizon_ && depth < 12) {
        process_arrival(f, to, from, at, depth);
        return;
    }
    Ev ev;
    ev.kind = EvKind::FrameHop;
    ev.t = at;
    ev.frame = f;
    ev.to = to;
    ev.from = from;
    push(ev);
}

void Engine::process_arrival(const EthernetFrame& f, NodeId node, NodeId from, SimTime t,
                             int depth) {
    if (switches_[static_cast<std::size_t>(node)]) {
        process_at_switch(f, node, port_of(node, from), t, depth);
    } else {
        endpoint_delivery(f, node, t, true);
    }
}

void Engine::process_at_switch(const EthernetFrame& f, NodeId node, int in_port, SimTime t,
                               int depth) {
    Switch& sw = *switches_[static_cast<std::size_t>(node)];
    auto& out = scratch_[static_cast<std::size_t>(std::min(depth, 15))];
    const ProcessOutcome outcome = sw.process_frame(f, in_port, out, t);

    if (sw.should_mirror(outcome)) nads_observe(node, f, t + mirror_lat_[static_cast<std::size_t>(node)]);

    if (outcome.packet_in) {
        auto& memo = pin_memo_[static_cast<std::size_t>(node)];
        if (memo.valid && memo.version == controller_.state_version() &&
            memo.in_port == in_port && same_headers(memo.key, f)) {
            // Cached silent drop: the controller verdict cannot have changed.
            if (f.attack_id != 0) ++attacks_[f.attack_id - 1].dropped;
        } else {
            handle_pin(PacketIn{node, in_port, f, t});
        }
    } else if (f.attack_id != 0 && outcome.rule &&
               outcome.rule->action.kind == FlowAction::Kind::Discard) {
        ++attacks_[f.attack_id - 1].dropped;
    }

    if (out.empty()) return;

    bool to_switch = false;
    int to_endpoint = 0;
    for (const auto& em : out) {
        const NodeId peer = peer_by_port_[static_cast<std::size_t>(node)][static_cast<std::size_t>(em.port)];
        if (switches_[static_cast<std::size_t>(peer)]) to_switch = true;
        else ++to_endpoint;
    }
    if (f.attack_id != 0 && !to_switch && to_endpoint > 0)
        ++attacks_[f.attack_id - 1].delivered;  // terminal hop for this frame

    // Emissions: endpoints inline (bookkeeping only), switches via the
    // guarded path so queued control events keep their ordering.
    const std::size_t n_out = out.size();
    for (std::size_t i = 0; i < n_out; ++i) {
        const Emission em = out[i];  // copy: recursion reuses the scratch slot
        const NodeId peer = peer_by_port_[static_cast<std::size_t>(node)][static_cast<std::size_t>(em.port)];
        const SimTime at = t + lat(node, peer);
        if (switches_[static_cast<std::size_t>(peer)])
            deliver_frame(em.frame, peer, node, at, depth + 1);
        else
            endpoint_delivery(em.frame, peer, at, false);
    }
}

void Engine::endpoint_delivery(const EthernetFrame& f, NodeId node, SimTime at,
                               bool count_delivery) {
    if (f.attack_id != 0) {
        auto& rt = attacks_[f.attack_id - 1];
        if (count_delivery) ++rt.delivered;
        if (node == rt.victim) {
            if (rt.first_victim < 0) rt.first_victim = at;
            rt.last_victim = std::max(rt.last_victim, at);
        }
    }
    if (f.scan_response_of != 0) {
        auto& rt = attacks_[f.scan_response_of - 1];
        const auto& atk = sc_.attacks[f.scan_response_of - 1];
        if (node == atk.entry) ++rt.responses;
    }
    for (auto& rt : attacks_) {
        if (rt.has_victim_stream && node == rt.victim && rt.victim_stream.matches(f))
            rt.last_stream_delivery = std::max(rt.last_stream_delivery, at);
    }

    // Scan responders: an open TCP service answers a SYN probe.
    if (f.payload_kind == PayloadKind::ScanProbe && f.probe_kind == ProbeKind::TcpSyn &&
        f.l4_dst &&
        open_ports_.count((static_cast<std::uint64_t>(node) << 16) | *f.l4_dst) > 0) {
        EthernetFrame resp;
        resp.timestamp = at + us_from_ms(sc_.latency.scan_response_ms);
        resp.src_mac = topo_.node(node).mac;
        resp.dst_mac = f.src_mac;
        resp.vlan = f.vlan;
        resp.ip_src = f.ip_dst;
        resp.ip_dst = f.ip_src;
        resp.ip_proto = kProtoTcp;
        resp.l4_src = f.l4_dst;
        resp.l4_dst = f.l4_src;
        resp.payload_len = 60;
        resp.payload_kind = PayloadKind::RawBytes;
        resp.src_node = node;
        resp.scan_response_of = f.attack_id;
        const NodeId hop = topo_.neighbors(node).front();
        deliver_frame(resp, hop, node, resp.timestamp + lat(node, hop), 0);
    }
}

void Engine::handle_pin(const PacketIn& pin) {
    auto& memo = pin_memo_[static_cast<std::size_t>(pin.switch_id)];
    PacketInDecision d = controller_.handle_packet_in(pin);
    switch (d.kind) {
        case PacketInDecision::Kind::Drop: {
            memo.valid = true;
            memo.version = controller_.state_version();
            memo.in_port = pin.in_port;
            memo.key = pin.frame;
            if (pin.frame.attack_id != 0) ++attacks_[pin.frame.attack_id - 1].dropped;
            break;
        }
        case PacketInDecision::Kind::DropAndLog: {
            ViolationLog v = *d.violation;
            v.timestamp = pin.timestamp + sc_.latency.link_us;
            ++violations_by_label_[v.acl_label];
            auto& p = log_.emit(v.timestamp, "acl_violation");
            p["switch"] = topo_.node(v.switch_id).name;
            p["in_port"] = v.in_port;
            p["frame"] = v.frame_summary;
            p["acl"] = v.acl_label;
            violations_.push_back(v);
            Ev ev;
            ev.kind = EvKind::SensorIngestViolation;
            ev.t = v.timestamp + us_from_ms(sc_.latency.cloud_residual_ms);
            ev.idx = static_cast<int>(violations_.size()) - 1;
            push(ev);
            if (pin.frame.attack_id != 0) ++attacks_[pin.frame.attack_id - 1].dropped;
            break;
        }
        case PacketInDecision::Kind::InstallFlows: {
            pending_installs_.push_back({std::move(d), pin});
            Ev ev;
            ev.kind = EvKind::WhitelistInstall;
            ev.t = pin.timestamp + sc_.latency.link_us +
                   us_from_ms(sc_.latency.whitelist_install_ms);
            ev.idx = static_cast<int>(pending_installs_.size()) - 1;
            push(ev);
            break;
        }
    }
}

void Engine::apply_whitelist_install(int idx, SimTime t) {
    const auto& pi = pending_installs_[static_cast<std::size_t>(idx)];
    for (const auto& [sw, mod] : pi.decision.mods) switches_[static_cast<std::size_t>(sw)]->apply_flow_mod(mod, t);
    auto& p = log_.emit(t, "whitelist_install");
    p["whitelist_index"] = pi.decision.whitelist_index;
    p["mods"] = pi.decision.mods.size();
    p["stream"] = pi.pin.frame.ip_dst ? ip_to_string(*pi.pin.frame.ip_dst) : "";

    // The triggering frame is forwarded by the controller (packet-out along
    // the authorized path); it does not re-enter the match pipeline.
    const auto& path = pi.decision.forward_path;
    if (path.size() >= 2) {
        SimTime at = t;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) at += lat(path[i], path[i + 1]);
        endpoint_delivery(pi.pin.frame, path.back(), at, true);
    }
}

void Engine::nads_on_frame(int m, SimTime ts, std::uint32_t len, std::uint32_t attack_id) {
    // Observations buffer per interval and are fed to the monitor in
    // timestamp order at interval close; this makes frame processing
    // order-insensitive, which the inline batching relies on.
    mon_pending_[static_cast<std::size_t>(m)].emplace_back(ts, len, attack_id);
}

void Engine::nads_observe(NodeId sw, const EthernetFrame& f, SimTime obs_t) {
    const NodeId nads = mirror_of_[static_cast<std::size_t>(sw)];
    if (f.attack_id != 0) {
        auto& rt = attacks_[f.attack_id - 1];
        if (rt.first_nads < 0) {
            rt.first_nads = obs_t;
            auto& p = log_.emit(obs_t, "attack_observed");
            p["attack"] = f.attack_id;
            p["nads"] = topo_.node(nads).name;
        }
    }
    auto& g = nads_groups_[static_cast<std::size_t>(nads)];
    if (g.monitor_idx.empty()) return;
    if (!g.memo_valid || !same_headers(g.memo_key, f)) {
        g.memo_key = f;
        g.memo_val = -1;
        for (std::size_t i = 0; i < g.keys.size(); ++i) {
            if (g.keys[i].matches(f)) {
                g.memo_val = g.monitor_idx[i];
                break;  // configs are validated pairwise non-overlapping
            }
        }
        g.memo_valid = true;
    }
    if (g.memo_val >= 0) nads_on_frame(g.memo_val, f.timestamp, f.payload_len, f.attack_id);
}

// ---------------------------------------------------------------------------
// detection & response

void Engine::interval_close(int m, SimTime t) {
    StreamMonitor& mon = monitors_[static_cast<std::size_t>(m)];
    const auto& cfg = mon.config();
    const std::int64_t idx = mon_next_close_idx_[static_cast<std::size_t>(m)]++;
    const SimTime boundary = mon_boundary_us_[static_cast<std::size_t>(m)];

    // Feed this interval's observations in timestamp order; later arrivals
    // stay buffered for the next interval.
    auto& pending = mon_pending_[static_cast<std::size_t>(m)];
    if (!pending.empty()) {
        if (!std::is_sorted(pending.begin(), pending.end(),
                            [](const auto& a, const auto& b) {
                                return std::get<0>(a) < std::get<0>(b);
                            })) {
            std::stable_sort(pending.begin(), pending.end(),
                             [](const auto& a, const auto& b) {
                                 return std::get<0>(a) < std::get<0>(b);
                             });
        }
        std::size_t fed = 0;
        for (; fed < pending.size() && std::get<0>(pending[fed]) < boundary; ++fed) {
            const auto& [ts, len, aid] = pending[fed];
            mon.on_frame(ts, len, aid);
        }
        pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(fed));
    }

    double roll = 1.0;
    if (cfg.drop_probability > 0.0 && mon.state() == ModelState::Working)
        roll = mon_rng_[static_cast<std::size_t>(m)].uniform();

    IntervalRecord rec = mon.close_interval(idx, roll);
    mon_boundary_us_[static_cast<std::size_t>(m)] += cfg.interval_us;

    if (sinks_.nads_csv) {
        const char* verdict = rec.verdict == IntervalRecord::Verdict::Learning ? "learning"
                              : rec.verdict == IntervalRecord::Verdict::Normal ? "normal"
                              : rec.verdict == IntervalRecord::Verdict::Anomaly ? "anomaly"
                                                                                : "skipped";
        auto& os = *sinks_.nads_csv;
        os << rec.nads << ',' << rec.stream << ',' << rec.vector.interval_index << ','
           << format_double(rec.vector.raw_x) << ',' << format_double(rec.vector.raw_y) << ','
           << format_double(rec.vector.x) << ',' << format_double(rec.vector.y) << ','
           << rec.vector.frame_count << ',' << verdict << ',' << format_double(rec.distance)
           << '\n';
    }

    if (rec.verdict == IntervalRecord::Verdict::Anomaly) {
        const double proc_ms = sc_.latency.nads_processing.sample_ms(mon_rng_[static_cast<std::size_t>(m)]);
        const SimTime emission = t + us_from_ms(proc_ms);
        ReportRt rep;
        rep.id = ++next_report_id_;
        rep.monitor = m;
        rep.stream = rec.stream;
        rep.interval = idx;
        rep.attack = rec.attack_id;
        rep.emission = emission;
        reports_.push_back(rep);

        double wait_ms = 0.0;
        if (rec.attack_id != 0) {
            auto& rt = attacks_[rec.attack_id - 1];
            if (rt.first_nads >= 0) wait_ms = ms_from_us(t - rt.first_nads);
            rt.detected = true;
        }
        auto& p = log_.emit(emission, "anomaly_report");
        p["report_id"] = rep.id;
        p["monitor"] = cfg.id;
        p["nads"] = cfg.nads;
        p["stream"] = rec.stream;
        p["interval"] = idx;
        p["distance"] = rec.distance;
        p["x"] = rec.vector.x;
        p["y"] = rec.vector.y;
        p["attack"] = rec.attack_id;
        p["wait_ms"] = wait_ms;
        p["proc_ms"] = proc_ms;

        const double transit_ms =
            sc_.latency.report_transit.sample_ms(mon_rng_[static_cast<std::size_t>(m)]);
        Ev rc;
        rc.kind = EvKind::ReportAtController;
        rc.t = emission + us_from_ms(transit_ms);
        rc.u = reports_.size() - 1;
        push(rc);
        Ev si;
        si.kind = EvKind::SensorIngestReport;
        si.t = emission + us_from_ms(sc_.latency.cloud_residual_ms);
        si.u = reports_.size() - 1;
        push(si);
    }

    const SimTime next_boundary = static_cast<SimTime>(idx + 2) * cfg.interval_us;
    if (next_boundary <= end_us_) {
        Ev ev;
        ev.kind = EvKind::IntervalClose;
        ev.t = next_boundary + assess_delay_us_;
        ev.idx = m;
        push(ev);
    }
}

void Engine::report_at_controller(std::uint64_t report_idx, SimTime t) {
    const ReportRt& rep = reports_[report_idx];
    auto& p = log_.emit(t, "report_at_controller");
    p["report_id"] = rep.id;

    for (std::size_t r = 0; r < sc_.controller_rules.size(); ++r) {
        const auto& rule = sc_.controller_rules[r];
        if (rule.on != "anomaly_report") continue;
        const auto& mon_cfg = monitors_[static_cast<std::size_t>(rep.monitor)].config();
        if (rule.monitor_id && *rule.monitor_id != mon_cfg.id) continue;
        if (rule.stream_contains && rep.stream.find(*rule.stream_contains) == std::string::npos)
            continue;
        const auto key = std::make_pair(static_cast<int>(r), rep.stream);
        if (issued_cm_keys_.count(key)) continue;
        issued_cm_keys_.insert(key);

        CountermeasureSpec spec = rule.countermeasure;
        if (rule.remove_reported_flow) {
            spec.kind = CountermeasureSpec::Kind::RemoveFlow;
            spec.pattern = FlowMatch{};
            spec.pattern.ip_src = mon_cfg.stream.ip_src;
            spec.pattern.ip_dst = mon_cfg.stream.ip_dst;
            spec.pattern.ip_proto = mon_cfg.stream.ip_proto;
            spec.pattern.l4_src = mon_cfg.stream.l4_src;
            spec.pattern.l4_dst = mon_cfg.stream.l4_dst;
        }
        issue_countermeasure(spec, rep.attack, "report:" + std::to_string(rep.id), t);
    }
}

void Engine::issue_countermeasure(const CountermeasureSpec& spec, std::uint32_t attack,
                                  const std::string& trigger, SimTime t) {
    CmRt cm;
    cm.plan = controller_.plan_countermeasure(spec, t, switch_ids_);
    cm.attack = attack;
    cm.issued = t;

    const double total_ms = sc_.latency.countermeasure_total.sample_ms(rng_cm_);
    cm.dispatch_ms = sc_.latency.cm_dispatch_share * total_ms;
    cm.ack_ms = total_ms - cm.dispatch_ms;

    const char* kind_name = spec.kind == CountermeasureSpec::Kind::RemoveFlow ? "remove_flow"
                            : spec.kind == CountermeasureSpec::Kind::DisableDynamic
                                ? "disable_dynamic"
                            : spec.kind == CountermeasureSpec::Kind::BlockSource ? "block_source"
                                                                                 : "fallback_static";
    auto& p = log_.emit(t, "countermeasure");
    p["cm_id"] = cm.plan.cm_id;
    p["kind"] = kind_name;
    p["attack"] = attack;
    p["trigger"] = trigger;
    p["mods"] = cm.plan.mods.size();

    if (cm.plan.mods.empty()) {
        // Nothing to dispatch (e.g. ACL extension or no dynamic rules):
        // the window is controller processing only.
        cm.ack_ms = 0.0;
        cm.complete_at = t + us_from_ms(cm.dispatch_ms);
    } else {
        cm.complete_at = t + us_from_ms(total_ms);
        // Tables update just before the acks return to the controller.
        const SimTime apply_at = std::max(t, cm.complete_at - sc_.latency.link_us);
        for (std::size_t i = 0; i < cm.plan.mods.size(); ++i) {
            Ev ev;
            ev.kind = EvKind::CmApply;
            ev.t = apply_at;
            ev.idx = static_cast<int>(cms_.size());
            ev.idx2 = static_cast<int>(i);
            push(ev);
        }
    }
    Ev done;
    done.kind = EvKind::CmComplete;
    done.t = cm.complete_at;
    done.idx = static_cast<int>(cms_.size());
    push(done);
    Ev dl;
    dl.kind = EvKind::CmDeadline;
    dl.t = t + us_from_ms(sc_.latency.ack_deadline_ms);
    dl.idx = static_cast<int>(cms_.size());
    push(dl);
    cms_.push_back(std::move(cm));
}

void Engine::sensor_ingest_report(std::uint64_t report_idx, SimTime t) {
    const ReportRt& rep = reports_[report_idx];
    const auto& cfg = monitors_[static_cast<std::size_t>(rep.monitor)].config();
    SecuritySensorReport sr;
    sr.id = rep.id;
    sr.vehicle = sc_.vehicle_id;
    sr.sensor = cfg.nads;
    sr.kind = ReportKind::AnomalyReport;
    sr.stream = rep.stream;
    sr.payload = "interval " + std::to_string(rep.interval);
    sr.timestamp = t;
    do_ingest(sr, rep.attack, t);
}

void Engine::sensor_ingest_violation(int violation_idx, SimTime t) {
    const ViolationLog& v = violations_[static_cast<std::size_t>(violation_idx)];
    SecuritySensorReport sr;
    sr.id = 1000000000ULL + static_cast<std::uint64_t>(violation_idx);
    sr.vehicle = sc_.vehicle_id;
    sr.sensor = "sdn-controller";
    sr.kind = ReportKind::AclViolation;
    sr.stream = v.acl_label;
    sr.payload = v.frame_summary;
    sr.timestamp = t;
    do_ingest(sr, 0, t);
}

void Engine::do_ingest(const SecuritySensorReport& sr, std::uint32_t attack, SimTime t) {
    const IngestOutcome outcome = sensor_.ingest(sr);
    auto& p = log_.emit(t, "sensor_ingest");
    p["report_id"] = sr.id;
    p["sensor"] = sr.sensor;
    p["kind"] = report_kind_name(sr.kind);
    p["outcome"] = outcome.kind == IngestOutcome::Kind::Forwarded ? "forwarded"
                   : outcome.kind == IngestOutcome::Kind::Suppressed ? "suppressed"
                                                                     : "escalated";
    p["attack"] = attack;

    if (outcome.kind != IngestOutcome::Kind::Escalated) return;
    const Incident& inc = *outcome.incident;
    auto& ip = log_.emit(t, "incident");
    ip["incident_id"] = inc.id;
    ip["classification"] = inc.classification;
    ip["sensor"] = inc.sensor;
    ip["stream"] = inc.stream;
    ip["contributing"] = inc.contributing_reports.size();
    ip["attack"] = attack;

    ResponseDirective d = backend_decide(inc, sc_.decision_rules);
    d.id = ++next_directive_id_;
    d.issued_at = t;
    DirectiveRt rt;
    rt.directive = d;
    rt.incident = inc;
    rt.attack = attack;
    rt.rtt_ms = sc_.latency.acdc_roundtrip.sample_ms(rng_acdc_);
    directives_.push_back(std::move(rt));

    Ev ev;
    ev.kind = EvKind::DirectiveAtActuator;
    ev.t = t + us_from_ms(directives_.back().rtt_ms);
    ev.idx = static_cast<int>(directives_.size()) - 1;
    push(ev);
}

void Engine::directive_at_actuator(int d_idx, SimTime t) {
    DirectiveRt& rt = directives_[static_cast<std::size_t>(d_idx)];
    const ResponseDirective& d = rt.directive;
    auto& p = log_.emit(t, "directive_at_actuator");
    p["directive_id"] = d.id;
    p["incident_id"] = d.incident_id;
    p["stage"] = response_stage_name(d.stage);
    p["action"] = d.action.kind == ResponseAction::Kind::SetOperationMode ? "set_operation_mode"
                  : d.action.kind == ResponseAction::Kind::SdnCountermeasure
                      ? "sdn_countermeasure"
                      : "noop";
    p["unresolved"] = d.unresolved;
    p["rtt_ms"] = rt.rtt_ms;
    p["attack"] = rt.attack;

    try {
        actuator_.accept(d);
    } catch (const StaleDirective&) {
        auto& sp = log_.emit(t, "stale_directive");
        sp["directive_id"] = d.id;
        sp["incident_id"] = d.incident_id;
        return;
    }

    switch (d.action.kind) {
        case ResponseAction::Kind::NoOp:
            break;
        case ResponseAction::Kind::SdnCountermeasure:
            issue_countermeasure(d.action.sdn, rt.attack,
                                 "directive:" + std::to_string(d.id), t);
            break;
        case ResponseAction::Kind::SetOperationMode: {
            const OperationMode* mode = nullptr;
            for (const auto& m : sc_.modes)
                if (m.name == d.action.mode) mode = &m;
            if (!mode) break;
            const AllocationPlan plan = desired_allocation(*mode, services_, sc_.compute_nodes);
            const auto diff = plan_diff(services_, plan);
            const auto evs = execute_reallocation(diff, sc_.latency.realloc, t, rng_realloc_);
            SimTime complete = t;
            for (const auto& ev : evs) {
                auto& rp = log_.emit(ev.start, "realloc_start");
                rp["service"] = ev.service;
                rp["from"] = ev.from ? nlohmann::ordered_json(*ev.from) : nlohmann::ordered_json(nullptr);
                rp["to"] = ev.to ? nlohmann::ordered_json(*ev.to) : nlohmann::ordered_json(nullptr);
                if (ev.to) {
                    SimTime phase_t = ev.done - us_from_ms(ev.timing.total_ms());
                    const std::pair<const char*, double> phases[] = {
                        {"scheduler", ev.timing.scheduler_ms},
                        {"management", ev.timing.management_ms},
                        {"create", ev.timing.create_ms},
                        {"app_registration", ev.timing.app_registration_ms},
                    };
                    for (const auto& [name, ms] : phases) {
                        phase_t += us_from_ms(ms);
                        auto& pp = log_.emit(phase_t, "realloc_phase");
                        pp["service"] = ev.service;
                        pp["phase"] = name;
                        pp["ms"] = ms;
                    }
                }
                ReallocRt rr;
                rr.ev = ev;
                rr.directive_index = d_idx;
                reallocs_.push_back(rr);
                Ev done;
                done.kind = EvKind::ReallocDone;
                done.t = ev.done;
                done.idx = static_cast<int>(reallocs_.size()) - 1;
                push(done);
                complete = std::max(complete, ev.done);
            }
            current_mode_ = mode->name;
            Ev mc;
            mc.kind = EvKind::ModeChangeComplete;
            mc.t = complete;
            mc.idx = d_idx;
            mc.u = static_cast<std::uint64_t>(complete - t);
            push(mc);
            break;
        }
    }
}

void Engine::dispatch(const Ev& ev) {
    now_ = ev.t;
    last_event_t_ = std::max(last_event_t_, ev.t);
    switch (ev.kind) {
        case EvKind::EmitterWake:
            emitter_wake(ev.idx);
            break;
        case EvKind::FrameHop:
            process_arrival(ev.frame, ev.to, ev.from, ev.t, 0);
            break;
        case EvKind::IntervalClose:
            interval_close(ev.idx, ev.t);
            break;
        case EvKind::ReportAtController:
            report_at_controller(ev.u, ev.t);
            break;
        case EvKind::SensorIngestReport:
            sensor_ingest_report(ev.u, ev.t);
            break;
        case EvKind::SensorIngestViolation:
            sensor_ingest_violation(ev.idx, ev.t);
            break;
        case EvKind::WhitelistInstall:
            apply_whitelist_install(ev.idx, ev.t);
            break;
        case EvKind::CmApply: {
            CmRt& cm = cms_[static_cast<std::size_t>(ev.idx)];
            const auto& [sw, mod] = cm.plan.mods[static_cast<std::size_t>(ev.idx2)];
            const FlowModAck ack = switches_[static_cast<std::size_t>(sw)]->apply_flow_mod(mod, ev.t);
            cm.applied.emplace_back(sw, ack.rules_removed);
            auto& p = log_.emit(ev.t, "flow_mod_applied");
            p["cm_id"] = cm.plan.cm_id;
            p["switch"] = topo_.node(sw).name;
            p["rules_removed"] = ack.rules_removed;
            break;
        }
        case EvKind::CmComplete: {
            CmRt& cm = cms_[static_cast<std::size_t>(ev.idx)];
            cm.complete = true;
            if (cm.attack != 0)
                attacks_[cm.attack - 1].cm_complete = ev.t;
            auto& p = log_.emit(ev.t, "countermeasure_complete");
            p["cm_id"] = cm.plan.cm_id;
            p["attack"] = cm.attack;
            p["dispatch_ms"] = cm.dispatch_ms;
            p["ack_ms"] = cm.ack_ms;
            auto acks = nlohmann::ordered_json::array();
            for (const auto& [sw, removed] : cm.applied) {
                acks.push_back({{"switch", topo_.node(sw).name},
                                {"rules_removed", removed},
                                {"at_us", ev.t}});
            }
            p["acks"] = std::move(acks);
            break;
        }
        case EvKind::CmDeadline: {
            const CmRt& cm = cms_[static_cast<std::size_t>(ev.idx)];
            if (!cm.complete) {
                auto& p = log_.emit(ev.t, "countermeasure_partial_ack");
                p["cm_id"] = cm.plan.cm_id;
                p["acks_received"] = cm.applied.size();
                p["mods_sent"] = cm.plan.mods.size();
            }
            break;
        }
        case EvKind::DirectiveAtActuator:
            directive_at_actuator(ev.idx, ev.t);
            break;
        case EvKind::ReallocDone: {
            const ReallocRt& rr = reallocs_[static_cast<std::size_t>(ev.idx)];
            for (auto& svc : services_)
                if (svc.id == rr.ev.service) svc.current_node = rr.ev.to;
            auto& p = log_.emit(ev.t, "realloc_done");
            p["service"] = rr.ev.service;
            p["to"] = rr.ev.to ? nlohmann::ordered_json(*rr.ev.to) : nlohmann::ordered_json(nullptr);
            p["total_ms"] = rr.ev.timing.total_ms();
            break;
        }
        case EvKind::ModeChangeComplete: {
            const DirectiveRt& rt = directives_[static_cast<std::size_t>(ev.idx)];
            if (rt.attack != 0) attacks_[rt.attack - 1].mode_complete = ev.t;
            auto& p = log_.emit(ev.t, "mode_change_complete");
            p["directive_id"] = rt.directive.id;
            p["mode"] = current_mode_;
            p["attack"] = rt.attack;
            p["realloc_total_ms"] = ms_from_us(static_cast<SimTime>(ev.u));
            break;
        }
    }
}

void Engine::finalize(SimTime t) {
    for (std::size_t i = 0; i < sc_.attacks.size(); ++i) {
        const auto& atk = sc_.attacks[i];
        const AttackRt& rt = attacks_[i];
        auto& p = log_.emit(t, "attack_summary");
        p["attack"] = atk.id;
        p["name"] = atk.name;
        p["emitted"] = rt.emitted;
        p["delivered"] = rt.delivered;
        p["dropped"] = rt.dropped;
        p["in_flight"] = rt.emitted - rt.delivered - rt.dropped;
        p["detected"] = rt.detected;
        p["probes"] = rt.probes;
        p["responses_observed"] = rt.responses;
        p["first_victim_us"] =
            rt.first_victim >= 0 ? nlohmann::ordered_json(rt.first_victim) : nlohmann::ordered_json(nullptr);
        p["last_victim_us"] =
            rt.last_victim >= 0 ? nlohmann::ordered_json(rt.last_victim) : nlohmann::ordered_json(nullptr);
        p["last_stream_delivery_us"] = rt.last_stream_delivery >= 0
                                           ? nlohmann::ordered_json(rt.last_stream_delivery)
                                           : nlohmann::ordered_json(nullptr);
        p["cm_complete_us"] =
            rt.cm_complete >= 0 ? nlohmann::ordered_json(rt.cm_complete) : nlohmann::ordered_json(nullptr);
        p["mode_complete_us"] =
            rt.mode_complete >= 0 ? nlohmann::ordered_json(rt.mode_complete) : nlohmann::ordered_json(nullptr);
    }
    auto& p = log_.emit(t, "run_end");
    p["events"] = log_.records().size();
}

nlohmann::ordered_json Engine::build_summary(const std::vector<TimingRecord>& timings) const {
    nlohmann::ordered_json s;
    s["scenario"] = sc_.name;
    s["seed"] = seed_;
    s["duration_s"] = sc_.duration_s;

    auto switches = nlohmann::ordered_json::object();
    for (NodeId sw : switch_ids_) {
        nlohmann::ordered_json e;
        e["static_rules"] = switches_[static_cast<std::size_t>(sw)]->rule_count(RuleOrigin::Static);
        e["dynamic_rules"] =
            switches_[static_cast<std::size_t>(sw)]->rule_count(RuleOrigin::Dynamic);
        e["packet_in_count"] = switches_[static_cast<std::size_t>(sw)]->packet_in_count();
        e["ingress_frames"] = switches_[static_cast<std::size_t>(sw)]->ingress_count();
        switches[topo_.node(sw).name] = std::move(e);
    }
    s["switches"] = std::move(switches);

    auto monitors = nlohmann::ordered_json::object();
    std::uint64_t reports_total = 0;
    for (const auto& mon : monitors_) {
        nlohmann::ordered_json e;
        e["nads"] = mon.config().nads;
        e["stream"] = mon.config().stream.to_string();
        e["intervals_closed"] = mon.intervals_closed();
        e["assessed"] = mon.assessed();
        e["anomaly_reports"] = mon.anomalies();
        e["false_positives"] = mon.false_positives();
        e["true_positives"] = mon.true_positives();
        e["false_negatives"] = mon.false_negatives();
        monitors[mon.config().id] = std::move(e);
        reports_total += static_cast<std::uint64_t>(mon.anomalies());
    }
    s["monitors"] = std::move(monitors);
    s["anomaly_reports_total"] = reports_total;

    auto violations = nlohmann::ordered_json::object();
    for (const auto& [label, count] : violations_by_label_) violations[label] = count;
    s["acl_violations_total"] = controller_.violations_logged();
    s["acl_violations_by_label"] = std::move(violations);

    nlohmann::ordered_json acdc;
    acdc["forwarded"] = sensor_.forwarded();
    acdc["suppressed"] = sensor_.suppressed();
    acdc["escalated"] = sensor_.escalated();
    acdc["directives_applied"] = actuator_.applied();
    s["acdc"] = std::move(acdc);

    auto attacks = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < sc_.attacks.size(); ++i) {
        const auto& atk = sc_.attacks[i];
        const AttackRt& rt = attacks_[i];
        nlohmann::ordered_json e;
        e["id"] = atk.id;
        e["emitted"] = rt.emitted;
        e["delivered"] = rt.delivered;
        e["dropped"] = rt.dropped;
        e["in_flight"] = rt.emitted - rt.delivered - rt.dropped;
        e["detected"] = rt.detected;
        e["probes"] = rt.probes;
        e["responses_observed"] = rt.responses;
        for (const auto& tr : timings) {
            if (tr.attack_id != atk.id) continue;
            e["path"] = response_path_name(tr.path);
            e["fhti_ms"] = std::isfinite(tr.fhti_ms) ? nlohmann::ordered_json(tr.fhti_ms)
                                                     : nlohmann::ordered_json("inf");
            if (sc_.ftti_budget_ms > 0.0)
                e["within_ftti"] = tr.detected && tr.fhti_ms <= sc_.ftti_budget_ms;
        }
        attacks[atk.name] = std::move(e);
    }
    s["attacks"] = std::move(attacks);

    s["final_mode"] = current_mode_;
    auto running = nlohmann::ordered_json::object();
    for (const auto& svc : services_)
        running[svc.id] = svc.current_node ? nlohmann::ordered_json(*svc.current_node) : nlohmann::ordered_json(nullptr);
    s["running_services"] = std::move(running);
    return s;
}

RunResult Engine::run() {
    build_network();
    build_monitors();
    build_orchestration();
    build_emitters();

    {
        auto& p = log_.emit(0, "run_start");
        p["scenario"] = sc_.name;
        p["seed"] = seed_;
    }

    while (!control_q_.empty() || !hop_q_.empty()) {
        const bool take_hop =
            !hop_q_.empty() &&
            (control_q_.empty() || EvAfter{}(control_q_.top(), hop_q_.top()));
        const Ev ev = take_hop ? hop_q_.top() : control_q_.top();
        if (take_hop) {
            hop_q_.pop();
        } else {
            control_q_.pop();
            control_horizon_ = control_q_.empty() ? kSimTimeMax : control_q_.top().t;
        }
        dispatch(ev);
    }
    finalize(last_event_t_);

    RunResult result;
    result.timings = measure_timings(log_.records(), sc_.name, seed_);
    for (auto& tr : result.timings) {
        auto& p = log_.emit(last_event_t_, "timing_record");
        p["attack"] = tr.attack_id;
        p["path"] = response_path_name(tr.path);
        p["detected"] = tr.detected;
        p["fdti_ms"] = tr.fdti_ms;
        p["frti_ms"] = tr.frti_ms;
        p["fhti_ms"] = std::isfinite(tr.fhti_ms) ? nlohmann::ordered_json(tr.fhti_ms)
                                                 : nlohmann::ordered_json("inf");
    }

    result.summary = build_summary(result.timings);
    if (sinks_.tables_jsonl) {
        for (NodeId sw : switch_ids_) switches_[static_cast<std::size_t>(sw)]->dump_table_jsonl(*sinks_.tables_jsonl);
    }
    result.log = std::move(log_);
    return result;
}

}  // namespace

RunResult run_scenario(const Scenario& sc, std::uint64_t seed, const RunSinks& sinks) {
    Engine engine(sc, seed, sinks);
    return engine.run();
}

}  // namespace ivnsim

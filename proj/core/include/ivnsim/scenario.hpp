#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivnsim/acdc.hpp"
#include "ivnsim/controlplane.hpp"
#include "ivnsim/latency.hpp"
#include "ivnsim/nads.hpp"
#include "ivnsim/net_model.hpp"
#include "ivnsim/orchestrator.hpp"

namespace ivnsim {

struct CanStreamConfig {
    std::string id;
    std::string domain;      // tunnel name
    NodeId sender = kNoNode;
    std::uint32_t can_id = 0;
    std::uint8_t payload_len = 8;
    double cycle_ms = 10.0;
    double jitter_sigma_pct = 0.0;  // gaussian timing noise, % of cycle
    double start_s = 0.0;
};

struct VideoStreamConfig {
    std::string id;
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    double fps = 25.0;
    std::uint32_t frame_bytes = 1500;
    std::uint16_t vlan = 0;
    std::uint16_t l4_src = 0;
    std::uint16_t l4_dst = 0;
    double jitter_sigma_pct = 0.0;
    double start_s = 0.0;
};

struct DosFloodSpec {
    StreamKey target;           // fully specified 5-tuple of the victim stream
    double rate_pps = 0.0;      // derived from total_frames when given
    std::uint64_t total_frames = 0;  // 0 = use rate * duration
    double duration_s = 0.0;
    std::uint32_t frame_bytes = 60;
};

struct PortScanSpec {
    std::vector<std::uint32_t> target_ips;
    std::uint16_t port_from = 0, port_to = 0;  // inclusive; from > to = empty range
    ProbeKind probe = ProbeKind::TcpSyn;
    std::uint16_t src_port = 54321;
    double probe_interval_ms = 1.0;
};

struct SpoofSpec {
    NodeId forged_src = kNoNode;  // node whose L2/L3 identity is forged
    StreamKey target;             // flow tuple to imitate
    double rate_pps = 100.0;
    double duration_s = 1.0;
    std::uint32_t frame_bytes = 100;
};

struct ReplaySpec {
    StreamKey slice_stream;  // stream to record
    double record_from_s = 0.0;
    double record_to_s = 1.0;
};

struct AttackConfig {
    enum class Kind : std::uint8_t { DosFlood, PortScan, Spoof, Replay };
    std::uint32_t id = 0;  // 1-based, assigned by the loader
    std::string name;
    Kind kind = Kind::DosFlood;
    NodeId entry = kNoNode;
    double start_s = 0.0;
    double start_jitter_ms = 0.0;  // uniform per-seed phase offset
    DosFloodSpec dos;
    PortScanSpec scan;
    SpoofSpec spoof;
    ReplaySpec replay;
};

struct ControllerRule {
    std::string on = "anomaly_report";
    std::optional<std::string> monitor_id;  // restrict to one monitor's reports
    std::optional<std::string> stream_contains;
    bool remove_reported_flow = false;  // pattern derived from the reported stream
    CountermeasureSpec countermeasure;
};

struct OpenService {
    NodeId node = kNoNode;
    std::uint16_t l4_port = 0;
};

struct LatencyConfig {
    SimTime link_us = 100;
    LatencyModel nads_processing = LatencyModel::from_triple(30, 113, 150);
    LatencyModel report_transit = LatencyModel::constant(112);
    // The countermeasure pipeline (controller processing + dispatch + switch
    // processing + ack return) is sampled as one bounded total and split into
    // dispatch/ack shares for the breakdown; see the engine notes.
    LatencyModel countermeasure_total = LatencyModel::from_triple(9, 15, 23);
    double cm_dispatch_share = 2.0 / 3.0;
    LatencyModel acdc_roundtrip = LatencyModel::from_triple(237, 379, 504);
    double cloud_residual_ms = 435.0;  // unmeasured edge/cloud transport, folded
    ReallocPhaseModels realloc = ReallocPhaseModels::defaults();
    double whitelist_install_ms = 5.0;
    double assessment_delay_ms = 1.0;  // interval close lag behind the boundary
    double ack_deadline_ms = 1000.0;
    double scan_response_ms = 0.5;
};

struct OutputConfig {
    bool events = true;
    bool nads_csv = true;
    bool timing_csv = true;
    bool tables = true;
};

struct Scenario {
    std::string name;
    double duration_s = 10.0;
    std::uint64_t seed = 1;
    std::string vehicle_id = "prototype-1";
    bool log_unknown = false;
    MirrorPoint mirror_point = MirrorPoint::Ingress;
    double ftti_budget_ms = 0.0;  // 0 = no fault-tolerance budget configured

    Topology topology;
    std::vector<DomainTunnel> tunnels;
    std::vector<std::uint16_t> reserved_udp_ports;
    std::vector<CommMatrixEntry> comm_matrix;
    std::vector<CanStreamConfig> can_streams;
    std::vector<VideoStreamConfig> video_streams;
    std::vector<StreamMonitorConfig> monitors;
    std::vector<AclRule> acl;
    std::vector<WhitelistEntry> whitelist;
    LatencyConfig latency;
    std::vector<ComputeNode> compute_nodes;
    std::vector<ServiceApp> services;
    std::vector<OperationMode> modes;
    std::string initial_mode;
    FusionPolicy fusion;
    std::vector<DecisionRule> decision_rules;
    std::vector<ControllerRule> controller_rules;
    std::vector<AttackConfig> attacks;
    std::vector<OpenService> open_services;
    OutputConfig output;
};

struct LoadResult {
    Scenario scenario;
    std::vector<std::string> errors;  // "<json-pointer>: <message>" per finding
    bool ok() const { return errors.empty(); }
};

/// Parses and validates a scenario file. All schema and cross-reference
/// problems are reported with their JSON-pointer location; an ok() result
/// cannot fail scenario validation at run time.
LoadResult load_scenario_file(const std::string& path);
LoadResult load_scenario_text(const std::string& text, const std::string& origin = "<inline>");

}  // namespace ivnsim

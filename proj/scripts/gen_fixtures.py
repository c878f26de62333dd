#!/usr/bin/env python3
"""Regenerates the shipped scenario fixtures under scenarios/.

The fixtures share one reference vehicle: two backbone switches, four zone
controllers, a camera, an infotainment unit, an online gateway, a three-node
HPC cluster, two NADS taps, an SDN controller, and the cloud edge module.
Run from the repository root: python3 scripts/gen_fixtures.py
"""

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "scenarios")

LAT = {
    "link_us": 100,
    "nads_processing": {"min": 30, "avg": 113, "max": 150},
    "report_transit": {"const": 112},
    "countermeasure_total": {"min": 9, "avg": 15, "max": 23},
    "cm_dispatch_share": 0.6667,
    "acdc_roundtrip": {"min": 237, "avg": 379, "max": 504},
    "cloud_residual_ms": 435,
    "realloc": {
        "scheduler": {"min": 108, "avg": 124, "max": 157},
        "management": {"min": 540, "avg": 590, "max": 637},
        "create": {"min": 637, "avg": 703, "max": 975},
        "app_registration": {"min": 6, "avg": 8, "max": 9},
    },
}

NODES = [
    ("sw1", "switch", "10.0.0.1"),
    ("sw2", "switch", "10.0.0.2"),
    ("zc_fl", "zone_controller", "10.0.1.11"),
    ("zc_fr", "zone_controller", "10.0.1.12"),
    ("camera", "camera", "10.0.1.20"),
    ("gateway", "online_gateway", "10.0.1.30"),
    ("sdnctl", "sdn_controller", "10.0.1.40"),
    ("nads1", "nads", "10.0.1.50"),
    ("zc_rl", "zone_controller", "10.0.2.11"),
    ("zc_rr", "zone_controller", "10.0.2.12"),
    ("infotainment", "infotainment", "10.0.2.20"),
    ("hpc1", "hpc", "10.0.2.31"),
    ("hpc2", "hpc", "10.0.2.32"),
    ("hpc3", "hpc", "10.0.2.33"),
    ("nads2", "nads", "10.0.2.50"),
    ("acdc", "acdc_edge", "10.0.2.60"),
]

SW1_SIDE = ["zc_fl", "zc_fr", "camera", "gateway", "sdnctl", "nads1"]
SW2_SIDE = ["zc_rl", "zc_rr", "infotainment", "hpc1", "hpc2", "hpc3", "nads2", "acdc"]


def topology():
    links = [{"a": "sw1", "b": "sw2", "latency_us": 100}]
    links += [{"a": n, "b": "sw1", "latency_us": 100} for n in SW1_SIDE]
    links += [{"a": n, "b": "sw2", "latency_us": 100} for n in SW2_SIDE]
    return {
        "nodes": [{"id": n, "kind": k, "ip": ip} for n, k, ip in NODES],
        "links": links,
        "mirrors": [{"switch": "sw1", "nads": "nads1"}, {"switch": "sw2", "nads": "nads2"}],
    }


TUNNELS = [
    {"domain": "powertrain", "multicast_ip": "239.10.0.1", "udp_port": 30491,
     "members": ["zc_fl", "zc_fr", "zc_rl", "zc_rr", "hpc1"]},
    {"domain": "chassis", "multicast_ip": "239.10.0.2", "udp_port": 30492,
     "members": ["zc_fl", "zc_fr", "zc_rl", "zc_rr"]},
    {"domain": "comfort", "multicast_ip": "239.10.0.3", "udp_port": 30493,
     "members": ["zc_fl", "zc_fr"]},
    {"domain": "telemetry", "multicast_ip": "239.10.0.4", "udp_port": 30494,
     "members": ["zc_rl", "zc_rr", "hpc1", "hpc2"]},
]

RESERVED_PORTS = [30491, 30492, 30493, 30494]

# Directed unicast relations; each becomes one fully-specified matrix entry.
UNICAST = [
    # backbone-crossing service relations
    ("camera", "hpc1", "vision feed"),
    ("hpc1", "zc_fl", "actuation front-left"),
    ("hpc1", "zc_fr", "actuation front-right"),
    ("gateway", "hpc3", "ota download"),
    ("hpc3", "gateway", "ota status"),
    ("nads2", "sdnctl", "anomaly reports"),
    ("nads1", "acdc", "sensor forwarding"),
    ("sdnctl", "acdc", "violation forwarding"),
    ("acdc", "gateway", "cloud uplink"),
    ("gateway", "acdc", "cloud downlink"),
    ("zc_fl", "hpc2", "diagnostics front-left"),
    ("zc_fr", "hpc2", "diagnostics front-right"),
    ("hpc2", "gateway", "telemetry upload"),
    ("gateway", "hpc2", "remote config"),
    ("infotainment", "gateway", "internet access"),
    ("gateway", "infotainment", "internet access return"),
    ("sdnctl", "nads2", "monitor config"),
    # rear-switch local relations
    ("hpc1", "hpc2", "cluster api"),
    ("hpc2", "hpc1", "cluster api return"),
    ("hpc1", "hpc3", "cluster api"),
    ("hpc3", "hpc1", "cluster api return"),
    ("hpc2", "hpc3", "cluster state sync"),
    ("hpc3", "hpc2", "cluster state sync return"),
    ("zc_rl", "hpc2", "diagnostics rear-left"),
    ("zc_rr", "hpc2", "diagnostics rear-right"),
    ("hpc2", "infotainment", "media ui"),
    ("infotainment", "hpc2", "ui events"),
    ("nads2", "acdc", "sensor forwarding"),
    ("zc_rl", "zc_rr", "zone crosslink rear"),
    ("zc_rr", "zc_rl", "zone crosslink rear return"),
    # front-switch local relations
    ("nads1", "sdnctl", "anomaly reports"),
    ("sdnctl", "nads1", "monitor config"),
    ("zc_fl", "zc_fr", "zone crosslink front"),
    ("zc_fr", "zc_fl", "zone crosslink front return"),
    ("camera", "gateway", "clip upload"),
    ("gateway", "camera", "remote camera config"),
    ("camera", "sdnctl", "health heartbeat"),
    ("gateway", "sdnctl", "link state"),
    ("sdnctl", "gateway", "uplink config"),
    ("sdnctl", "camera", "stream config"),
    ("camera", "gateway", "firmware telemetry"),
]


def comm_matrix():
    entries = []
    for t in TUNNELS:
        for sender in t["members"]:
            entries.append({"src": sender, "tunnel": t["domain"],
                            "description": f"{t['domain']} CAN tunnel ({sender})"})
    for i, (src, dst, desc) in enumerate(UNICAST):
        entries.append({
            "src": src, "dst": dst, "ip_proto": "udp",
            "l4_src": 40000 + i, "l4_dst": 9000 + i,
            "description": desc,
        })
    return entries


VIDEO_TUPLE = {"ip_src": "10.0.1.20", "ip_dst": "10.0.2.20", "ip_proto": "udp",
               "l4_src": 5004, "l4_dst": 5004}

VIDEO_WHITELIST = {"src": "camera", "dst": "infotainment", "vlan": 10,
                   "ip_proto": "udp", "l4_src": 5004, "l4_dst": 5004,
                   "description": "camera video to infotainment"}

VIDEO_STREAM = {"id": "video-main", "src": "camera", "dst": "infotainment",
                "fps": 30, "frame_bytes": 1500, "vlan": 10,
                "l4_src": 5004, "l4_dst": 5004}

CONTROL_STREAM = {"id": "can-powertrain-fl", "domain": "powertrain", "sender": "zc_fl",
                  "can_id": 416, "payload_len": 8, "cycle_ms": 10}

CONTROL_MONITOR = {
    "id": "control-nads1", "nads": "nads1",
    "stream": {"ip_src": "10.0.1.11", "ip_dst": "239.10.0.1", "ip_proto": "udp",
               "l4_src": 30491, "l4_dst": 30491},
    "metric_x": "frame_size", "metric_y": "cycle_deviation",
    "interval_ms": 1000, "learning_intervals": 30,
    "bandwidth": {"fixed_h": 0.6}, "nominal_cycle_ms": 10,
}

VIDEO_MONITOR = {
    "id": "video-nads1", "nads": "nads1",
    "stream": dict(VIDEO_TUPLE),
    "metric_x": "frame_size", "metric_y": "bandwidth",
    "interval_ms": 100, "learning_intervals": 120,
    "bandwidth": {"fixed_h": 0.2},
}

ORCHESTRATION = {
    "compute_nodes": [
        {"id": "hpc1", "role": "master", "capacity": 4},
        {"id": "hpc2", "role": "worker", "capacity": 4},
        {"id": "hpc3", "role": "worker", "capacity": 4},
    ],
    "services": [
        {"id": "drive-assist", "criticality": "critical",
         "allowed_nodes": ["hpc1", "hpc2", "hpc3"], "node": "hpc1"},
        {"id": "map-sync", "criticality": "optional", "node": "hpc2"},
        {"id": "media-server", "criticality": "optional", "node": "hpc3"},
    ],
    "modes": [
        {"name": "Normal", "policy": {"drive-assist": "hpc1", "map-sync": "hpc2",
                                      "media-server": "hpc3"}},
        {"name": "FailSafe", "policy": {"drive-assist": "hpc2", "map-sync": "disabled",
                                        "media-server": "disabled"}},
    ],
    "initial_mode": "Normal",
}


def base(name, duration_s, seed=42):
    return {
        "name": name,
        "duration_s": duration_s,
        "seed": seed,
        "vehicle_id": "prototype-1",
        "topology": topology(),
        "reserved_udp_ports": RESERVED_PORTS,
        "tunnels": TUNNELS,
        "comm_matrix": comm_matrix(),
        "latency": LAT,
    }


def fixture_static_provisioning():
    sc = base("static_provisioning", 1.0)
    sc["output"] = {"events": True, "nads_csv": False, "timing_csv": True, "tables": True}
    return sc


def fixture_regular_8h(jitter=False):
    # 8h plus a margin so both monitors assess their full interval budget
    # after the learning window.
    sc = base("regular_8h_jitter" if jitter else "regular_8h", 28815.0)
    control = dict(CONTROL_STREAM)
    if jitter:
        control["jitter_sigma_pct"] = 5.0
    sc["can_streams"] = [control]
    sc["video_streams"] = [dict(VIDEO_STREAM)]
    sc["whitelist"] = [dict(VIDEO_WHITELIST)]
    sc["acl"] = [{"proto": "icmp", "label": "icmp"}]
    sc["monitors"] = [dict(CONTROL_MONITOR), dict(VIDEO_MONITOR)]
    sc["fusion"] = {"window_s": 300, "k_threshold": 1}
    return sc


def fixture_local_dos():
    sc = base("local_dos", 150.0)
    sc["ftti_budget_ms"] = 500.0
    sc["video_streams"] = [dict(VIDEO_STREAM)]
    sc["whitelist"] = [dict(VIDEO_WHITELIST)]
    sc["acl"] = [{"proto": "icmp", "label": "icmp"}]
    monitor = dict(VIDEO_MONITOR)
    monitor["learning_intervals"] = 50
    sc["monitors"] = [monitor]
    sc["controller_rules"] = [
        {"on": "anomaly_report", "monitor": "video-nads1", "remove_reported_flow": True}
    ]
    sc["fusion"] = {"window_s": 300, "k_threshold": 1}
    sc["attacks"] = [{
        "name": "video-dos", "kind": "dos_flood", "entry": "gateway",
        "start_s": 10.0, "start_jitter_ms": 100.0,
        "target": dict(VIDEO_TUPLE),
        "rate_pps": 75077, "duration_s": 134.0, "frame_bytes": 60,
    }]
    return sc


def fixture_cloud_dos():
    sc = base("cloud_dos", 20.0)
    sc["ftti_budget_ms"] = 3000.0
    sc["video_streams"] = [dict(VIDEO_STREAM)]
    sc["whitelist"] = [dict(VIDEO_WHITELIST)]
    sc["acl"] = [{"proto": "icmp", "label": "icmp"}]
    monitor = dict(VIDEO_MONITOR)
    monitor["learning_intervals"] = 30
    sc["monitors"] = [monitor]
    sc.update(json.loads(json.dumps(ORCHESTRATION)))
    sc["fusion"] = {"window_s": 300, "k_threshold": 1}
    sc["decision_rules"] = [
        {"classification": "anomaly_report", "stage": "containment", "set_mode": "FailSafe"}
    ]
    sc["attacks"] = [{
        "name": "video-dos-cloud", "kind": "dos_flood", "entry": "gateway",
        "start_s": 5.0, "start_jitter_ms": 100.0,
        "target": dict(VIDEO_TUPLE),
        "rate_pps": 75077, "duration_s": 10.0, "frame_bytes": 60,
    }]
    return sc


def fixture_port_scan(permissive=False):
    sc = base("port_scan_open" if permissive else "port_scan", 5.0)
    sc["acl"] = [{"proto": "icmp", "label": "icmp"}, {"l4_port": 22, "label": "ssh"}]
    sc["log_unknown"] = True
    targets = ["10.0.1.11", "10.0.2.11", "10.0.2.31", "10.0.2.20"]
    port_from, port_to = (9000, 9019) if permissive else (20, 39)
    sc["attacks"] = [
        {"name": "tcp-scan", "kind": "port_scan", "entry": "gateway", "start_s": 0.5,
         "target_ips": targets, "port_from": port_from, "port_to": port_to,
         "probe": "tcp_syn", "src_port": 54321, "probe_interval_ms": 1.0},
        {"name": "ping-sweep", "kind": "port_scan", "entry": "gateway", "start_s": 0.2,
         "target_ips": targets, "probe": "ping", "probe_interval_ms": 1.0},
    ]
    if permissive:
        sc["whitelist"] = [
            {"src": "gateway", "dst": "hpc1", "ip_proto": "tcp",
             "l4_src": 54321, "l4_dst": 9010,
             "description": "deliberately permissive entry (negative control)"},
            {"src": "hpc1", "dst": "gateway", "ip_proto": "tcp",
             "l4_src": 9010, "l4_dst": 54321,
             "description": "return path for the negative control"},
        ]
        sc["open_services"] = [{"node": "hpc1", "l4_port": 9010}]
    return sc


def main():
    os.makedirs(OUT, exist_ok=True)
    fixtures = {
        "static_provisioning.json": fixture_static_provisioning(),
        "regular_8h.json": fixture_regular_8h(False),
        "regular_8h_jitter.json": fixture_regular_8h(True),
        "local_dos.json": fixture_local_dos(),
        "cloud_dos.json": fixture_cloud_dos(),
        "port_scan.json": fixture_port_scan(False),
        "port_scan_open.json": fixture_port_scan(True),
    }
    for name, sc in fixtures.items():
        path = os.path.join(OUT, name)
        with open(path, "w") as f:
            json.dump(sc, f, indent=2)
            f.write("\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()

#include "ivnsim/timing.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace ivnsim {

std::string response_path_name(ResponsePath p) {
    switch (p) {
        case ResponsePath::Local: return "local";
        case ResponsePath::Cloud: return "cloud";
        case ResponsePath::None: return "none";
    }
    return "?";
}

bool TimingRecord::breakdown_consistent(double tol_ms) const {
    if (!detected || !std::isfinite(fhti_ms)) return true;
    const double fdti_sum = detect_wait_ms + detect_proc_ms;
    const double frti_sum =
        path == ResponsePath::Cloud ? acdc_rtt_ms + realloc_ms : cm_dispatch_ms + cm_ack_ms;
    const double fhti_sum = fdti_ms + report_transit_ms + frti_ms + residual_ms;
    return std::abs(fdti_sum - fdti_ms) <= tol_ms && std::abs(frti_sum - frti_ms) <= tol_ms &&
           std::abs(fhti_sum - fhti_ms) <= tol_ms;
}

namespace {

struct AttackTrace {
    std::string name;
    SimTime start = -1;
    SimTime first_nads = -1;
    SimTime first_victim = -1;
    SimTime last_victim = -1;
    // detection
    bool detected = false;
    std::uint64_t first_report = 0;
    SimTime report_emission = -1;
    double wait_ms = 0.0, proc_ms = 0.0;
    SimTime report_at_controller = -1;
    SimTime sensor_ingest = -1;
    // local response
    SimTime cm_issued = -1;
    SimTime cm_complete = -1;
    double cm_dispatch_ms = 0.0, cm_ack_ms = 0.0;
    // cloud response
    double rtt_ms = 0.0;
    double realloc_ms = 0.0;
    SimTime mode_complete = -1;
};

}  // namespace

std::vector<TimingRecord> measure_timings(const std::vector<EventRecord>& events,
                                          const std::string& scenario, std::uint64_t seed) {
    std::map<std::uint32_t, AttackTrace> traces;
    std::map<std::uint64_t, std::uint32_t> report_attack;  // first-report ids only

    for (const auto& ev : events) {
        const auto& p = ev.payload;
        auto attack_of = [&]() -> std::uint32_t {
            return p.contains("attack") ? p["attack"].get<std::uint32_t>() : 0;
        };
        if (ev.type == "attack_start") {
            auto& tr = traces[p["attack"].get<std::uint32_t>()];
            tr.start = ev.time_us;
            tr.name = p.value("name", "");
        } else if (ev.type == "attack_observed") {
            auto& tr = traces[p["attack"].get<std::uint32_t>()];
            if (tr.first_nads < 0) tr.first_nads = ev.time_us;
        } else if (ev.type == "anomaly_report") {
            const std::uint32_t a = attack_of();
            if (a == 0) continue;
            auto& tr = traces[a];
            if (!tr.detected) {
                tr.detected = true;
                tr.first_report = p["report_id"].get<std::uint64_t>();
                tr.report_emission = ev.time_us;
                tr.wait_ms = p.value("wait_ms", 0.0);
                tr.proc_ms = p.value("proc_ms", 0.0);
                report_attack[tr.first_report] = a;
            }
        } else if (ev.type == "report_at_controller") {
            const auto rid = p["report_id"].get<std::uint64_t>();
            auto it = report_attack.find(rid);
            if (it != report_attack.end()) {
                auto& tr = traces[it->second];
                if (tr.report_at_controller < 0) tr.report_at_controller = ev.time_us;
            }
        } else if (ev.type == "sensor_ingest") {
            const auto rid = p.value("report_id", std::uint64_t{0});
            auto it = report_attack.find(rid);
            if (it != report_attack.end()) {
                auto& tr = traces[it->second];
                if (tr.sensor_ingest < 0) tr.sensor_ingest = ev.time_us;
            }
        } else if (ev.type == "countermeasure") {
            const std::uint32_t a = attack_of();
            if (a == 0) continue;
            auto& tr = traces[a];
            if (tr.cm_issued < 0) tr.cm_issued = ev.time_us;
        } else if (ev.type == "countermeasure_complete") {
            const std::uint32_t a = attack_of();
            if (a == 0) continue;
            auto& tr = traces[a];
            if (tr.cm_complete < 0) {
                tr.cm_complete = ev.time_us;
                tr.cm_dispatch_ms = p.value("dispatch_ms", 0.0);
                tr.cm_ack_ms = p.value("ack_ms", 0.0);
            }
        } else if (ev.type == "directive_at_actuator") {
            const std::uint32_t a = attack_of();
            if (a == 0) continue;
            traces[a].rtt_ms = p.value("rtt_ms", 0.0);
        } else if (ev.type == "mode_change_complete") {
            const std::uint32_t a = attack_of();
            if (a == 0) continue;
            auto& tr = traces[a];
            if (tr.mode_complete < 0) {
                tr.mode_complete = ev.time_us;
                tr.realloc_ms = p.value("realloc_total_ms", 0.0);
            }
        } else if (ev.type == "attack_summary") {
            auto& tr = traces[p["attack"].get<std::uint32_t>()];
            if (p.contains("first_victim_us") && !p["first_victim_us"].is_null())
                tr.first_victim = p["first_victim_us"].get<SimTime>();
            if (p.contains("last_victim_us") && !p["last_victim_us"].is_null())
                tr.last_victim = p["last_victim_us"].get<SimTime>();
        }
    }

    std::vector<TimingRecord> out;
    for (const auto& [attack_id, tr] : traces) {
        TimingRecord r;
        r.scenario = scenario;
        r.seed = seed;
        r.attack_id = attack_id;
        r.attack_name = tr.name;
        r.detected = tr.detected;

        if (!tr.detected) {
            r.path = ResponsePath::None;
            r.fhti_ms = std::numeric_limits<double>::infinity();
            out.push_back(std::move(r));
            continue;
        }

        r.detect_wait_ms = tr.wait_ms;
        r.detect_proc_ms = tr.proc_ms;
        r.fdti_ms = tr.first_nads >= 0 ? ms_from_us(tr.report_emission - tr.first_nads)
                                       : tr.wait_ms + tr.proc_ms;

        if (tr.mode_complete >= 0) {
            r.path = ResponsePath::Cloud;
            r.acdc_rtt_ms = tr.rtt_ms;
            r.realloc_ms = tr.realloc_ms;
            r.frti_ms = tr.rtt_ms + tr.realloc_ms;
            r.report_transit_ms = tr.sensor_ingest >= 0
                                      ? ms_from_us(tr.sensor_ingest - tr.report_emission)
                                      : 0.0;
            // Safe state: the directive is fully applied (last reallocation
            // registered). The attack may still be running; the flow-level
            // drain is the local path's concern.
            const SimTime begin = tr.first_victim >= 0 ? tr.first_victim : tr.start;
            r.fhti_ms = ms_from_us(tr.mode_complete - begin);
        } else if (tr.cm_complete >= 0) {
            r.path = ResponsePath::Local;
            r.cm_dispatch_ms = tr.cm_dispatch_ms;
            r.cm_ack_ms = tr.cm_ack_ms;
            r.frti_ms = ms_from_us(tr.cm_complete - tr.cm_issued);
            r.report_transit_ms = tr.report_at_controller >= 0
                                      ? ms_from_us(tr.report_at_controller - tr.report_emission)
                                      : 0.0;
            const SimTime begin = tr.first_victim >= 0 ? tr.first_victim : tr.start;
            const SimTime end = tr.last_victim >= 0 ? tr.last_victim : tr.cm_complete;
            r.fhti_ms = ms_from_us(end - begin);
        } else {
            r.path = ResponsePath::None;
            r.report_transit_ms = tr.report_at_controller >= 0
                                      ? ms_from_us(tr.report_at_controller - tr.report_emission)
                                      : 0.0;
            const SimTime begin = tr.first_victim >= 0 ? tr.first_victim : tr.start;
            const SimTime end = tr.last_victim >= 0 ? tr.last_victim : begin;
            r.fhti_ms = ms_from_us(end - begin);
        }
        r.residual_ms = r.fhti_ms - r.fdti_ms - r.report_transit_ms - r.frti_ms;
        out.push_back(std::move(r));
    }
    return out;
}

void write_timing_csv_header(std::ostream& os) {
    os << "scenario,seed,attack,attack_name,path,detected,fdti_ms,frti_ms,fhti_ms,"
          "detect_wait_ms,detect_proc_ms,report_transit_ms,cm_dispatch_ms,cm_ack_ms,"
          "acdc_rtt_ms,realloc_ms,residual_ms\n";
}

void write_timing_csv_row(std::ostream& os, const TimingRecord& r) {
    os << r.scenario << ',' << r.seed << ',' << r.attack_id << ',' << r.attack_name << ','
       << response_path_name(r.path) << ',' << (r.detected ? 1 : 0) << ','
       << format_double(r.fdti_ms) << ',' << format_double(r.frti_ms) << ','
       << format_double(r.fhti_ms) << ',' << format_double(r.detect_wait_ms) << ','
       << format_double(r.detect_proc_ms) << ',' << format_double(r.report_transit_ms) << ','
       << format_double(r.cm_dispatch_ms) << ',' << format_double(r.cm_ack_ms) << ','
       << format_double(r.acdc_rtt_ms) << ',' << format_double(r.realloc_ms) << ','
       << format_double(r.residual_ms) << '\n';
}

}  // namespace ivnsim

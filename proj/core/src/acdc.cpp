#include "ivnsim/acdc.hpp"

#include <algorithm>
#include <cmath>

namespace ivnsim {

std::string report_kind_name(ReportKind k) {
    switch (k) {
        case ReportKind::AnomalyReport: return "anomaly_report";
        case ReportKind::AclViolation: return "acl_violation";
        case ReportKind::Log: return "log";
    }
    return "?";
}

std::string response_stage_name(ResponseStage s) {
    switch (s) {
        case ResponseStage::Containment: return "containment";
        case ResponseStage::Eradication: return "eradication";
        case ResponseStage::Recovery: return "recovery";
    }
    return "?";
}

IngestOutcome SensorManager::ingest(const SecuritySensorReport& report) {
    if (!registered(report.sensor))
        throw UnknownSensor("sensor " + report.sensor + " is not registered");

    auto& st = keys_[{report.sensor, report.stream}];
    const bool window_expired = st.count > 0 &&
                                report.timestamp - st.window_start >= policy_.window_us;
    if (st.count == 0 || window_expired) {
        st = KeyState{};
        st.window_start = report.timestamp;
        st.first_ts = report.timestamp;
    }
    ++st.count;
    st.contributing.push_back(report.id);

    IngestOutcome out;
    if (!st.escalated && st.count >= policy_.k_threshold) {
        st.escalated = true;
        Incident inc;
        inc.id = next_incident_id_++;
        inc.vehicle = report.vehicle;
        inc.classification = report_kind_name(report.kind);
        inc.sensor = report.sensor;
        inc.stream = report.stream;
        inc.contributing_reports = st.contributing;
        inc.first_ts = st.first_ts;
        inc.last_ts = report.timestamp;
        out.kind = IngestOutcome::Kind::Escalated;
        out.incident = std::move(inc);
        ++escalated_;
        return out;
    }
    if (st.count == 1) {
        out.kind = IngestOutcome::Kind::Forwarded;
        ++forwarded_;
    } else {
        out.kind = IngestOutcome::Kind::Suppressed;
        ++suppressed_;
    }
    return out;
}

ResponseDirective backend_decide(const Incident& incident,
                                 const std::vector<DecisionRule>& rules) {
    ResponseDirective d;
    d.id = incident.id;  // one directive per incident; caller may renumber
    d.incident_id = incident.id;
    for (const auto& rule : rules) {
        if (rule.classification != incident.classification) continue;
        if (rule.stream_contains &&
            incident.stream.find(*rule.stream_contains) == std::string::npos)
            continue;
        if (rule.sensor_prefix && incident.sensor.rfind(*rule.sensor_prefix, 0) != 0) continue;
        d.stage = rule.stage;
        d.action = rule.action;
        return d;
    }
    d.stage = ResponseStage::Containment;
    d.action.kind = ResponseAction::Kind::NoOp;
    d.unresolved = true;  // queued for manual analysis, never simulated as waiting
    return d;
}

void ActuatorManager::accept(const ResponseDirective& directive) {
    if (applied_incidents_.count(directive.incident_id))
        throw StaleDirective("incident " + std::to_string(directive.incident_id) +
                             " already has an applied directive");
    applied_incidents_.insert(directive.incident_id);
    ++applied_count_;
}

std::vector<FleetLogRecord> generate_fleet_logs(int n_vehicles, double duration_s,
                                                const std::vector<FleetAttackSpec>& attack_mix,
                                                std::uint64_t seed,
                                                const FleetLogOptions& opts) {
    if (n_vehicles < 1) throw Error("fleet log generation needs at least one vehicle");
    std::vector<FleetLogRecord> all;
    std::uint64_t next_report_id = 1;

    for (int v = 0; v < n_vehicles; ++v) {
        const std::string vehicle = "vehicle-" + std::to_string(v + 1);
        Rng rng(derive_seed(seed, "fleet/" + vehicle));
        std::vector<FleetLogRecord> records;

        // Benign background: exponential inter-arrivals.
        const double rate_per_s = opts.benign_rate_per_hour / 3600.0;
        if (rate_per_s > 0.0) {
            double t = 0.0;
            for (;;) {
                double u = rng.uniform();
                while (u <= 0.0) u = rng.uniform();
                t += -std::log(u) / rate_per_s;
                if (t >= duration_s) break;
                FleetLogRecord rec;
                rec.vehicle = vehicle;
                rec.timestamp = us_from_s(t);
                rec.report.vehicle = vehicle;
                rec.report.sensor = "nads-1";
                rec.report.kind = ReportKind::Log;
                rec.report.stream = "telemetry";
                rec.report.payload = "periodic status";
                rec.report.timestamp = rec.timestamp;
                records.push_back(std::move(rec));
            }
        }

        for (const auto& atk : attack_mix) {
            for (int b = 0; b < atk.bursts_per_vehicle; ++b) {
                const double start = rng.uniform(0.0, std::max(0.0, duration_s * 0.9));
                for (int r = 0; r < atk.reports_per_burst; ++r) {
                    const double t = start + r / std::max(1e-9, atk.burst_rate_per_s);
                    if (t >= duration_s) break;
                    FleetLogRecord rec;
                    rec.vehicle = vehicle;
                    rec.timestamp = us_from_s(t);
                    rec.report.vehicle = vehicle;
                    rec.report.sensor = "nads-1";
                    rec.report.kind = ReportKind::AnomalyReport;
                    rec.report.stream = "stream-" + atk.type;
                    rec.report.payload = atk.type + " burst";
                    rec.report.timestamp = rec.timestamp;
                    rec.ground_truth.attack = true;
                    rec.ground_truth.attack_type = atk.type;
                    records.push_back(std::move(rec));
                }
            }
        }

        std::stable_sort(records.begin(), records.end(),
                         [](const FleetLogRecord& a, const FleetLogRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
        for (auto& rec : records) {
            rec.report.id = next_report_id++;
            all.push_back(std::move(rec));
        }
    }
    return all;
}

std::vector<FleetSummaryRow> replay_fleet_logs(const std::vector<FleetLogRecord>& records,
                                               const FusionPolicy& policy) {
    std::map<std::string, FleetSummaryRow> rows;
    std::map<std::string, SensorManager> managers;
    for (const auto& rec : records) {
        auto [it, fresh] = managers.try_emplace(rec.vehicle, policy);
        if (fresh) it->second.register_sensor(rec.report.sensor);
        auto& row = rows[rec.vehicle];
        row.vehicle = rec.vehicle;
        if (rec.ground_truth.attack) ++row.attack;
        else ++row.benign;
        const auto outcome = it->second.ingest(rec.report);
        switch (outcome.kind) {
            case IngestOutcome::Kind::Forwarded: ++row.forwarded; break;
            case IngestOutcome::Kind::Suppressed: ++row.suppressed; break;
            case IngestOutcome::Kind::Escalated:
                ++row.escalated;
                ++row.incidents;
                break;
        }
    }
    std::vector<FleetSummaryRow> out;
    out.reserve(rows.size());
    for (auto& [_, row] : rows) out.push_back(std::move(row));
    return out;
}

}  // namespace ivnsim

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ivnsim/controlplane.hpp"
#include "ivnsim/errors.hpp"
#include "ivnsim/rng.hpp"
#include "ivnsim/time.hpp"

namespace ivnsim {

enum class ReportKind : std::uint8_t { AnomalyReport, AclViolation, Log };

std::string report_kind_name(ReportKind k);

struct SecuritySensorReport {
    std::uint64_t id = 0;
    std::string vehicle;
    std::string sensor;   // nads instance, sdn controller, ...
    ReportKind kind = ReportKind::Log;
    std::string stream;   // dedup component; empty for unkeyed reports
    std::string payload;
    SimTime timestamp = 0;
};

struct FusionPolicy {
    SimTime window_us = 60'000'000;
    int k_threshold = 1;  // reports of one (sensor, stream) key needed to escalate
};

inline void validate(const FusionPolicy& p) {
    if (p.k_threshold < 1) throw Error("fusion k_threshold must be >= 1");
    if (p.window_us <= 0) throw Error("fusion window must be positive");
}

struct Incident {
    std::uint64_t id = 0;
    std::string vehicle;
    std::string classification;  // report-kind tag the decision rules match on
    std::string sensor;
    std::string stream;
    std::vector<std::uint64_t> contributing_reports;
    SimTime first_ts = 0;
    SimTime last_ts = 0;
};

struct IngestOutcome {
    enum class Kind : std::uint8_t { Forwarded, Suppressed, Escalated };
    Kind kind = Kind::Forwarded;
    std::optional<Incident> incident;
};

/// In-vehicle security-sensor manager: registration, dedup filtering and
/// k-threshold escalation per (sensor, stream) key within a time window.
class SensorManager {
public:
    explicit SensorManager(FusionPolicy policy) : policy_(policy) { validate(policy_); }

    void register_sensor(const std::string& sensor) { sensors_.insert(sensor); }
    bool registered(const std::string& sensor) const { return sensors_.count(sensor) > 0; }

    /// Throws UnknownSensor for unregistered sensors.
    IngestOutcome ingest(const SecuritySensorReport& report);

    std::uint64_t forwarded() const { return forwarded_; }
    std::uint64_t suppressed() const { return suppressed_; }
    std::uint64_t escalated() const { return escalated_; }

private:
    struct KeyState {
        SimTime window_start = 0;
        int count = 0;
        bool escalated = false;
        std::vector<std::uint64_t> contributing;
        SimTime first_ts = 0;
    };

    FusionPolicy policy_;
    std::set<std::string> sensors_;
    std::map<std::pair<std::string, std::string>, KeyState> keys_;
    std::uint64_t next_incident_id_ = 1;
    std::uint64_t forwarded_ = 0;
    std::uint64_t suppressed_ = 0;
    std::uint64_t escalated_ = 0;
};

enum class ResponseStage : std::uint8_t { Containment, Eradication, Recovery };

std::string response_stage_name(ResponseStage s);

struct ResponseAction {
    enum class Kind : std::uint8_t { SetOperationMode, SdnCountermeasure, NoOp };
    Kind kind = Kind::NoOp;
    std::string mode;             // SetOperationMode
    CountermeasureSpec sdn;       // SdnCountermeasure
};

struct DecisionRule {
    std::string classification;            // matches Incident.classification
    std::optional<std::string> stream_contains;
    std::optional<std::string> sensor_prefix;
    ResponseStage stage = ResponseStage::Containment;
    ResponseAction action;
};

struct ResponseDirective {
    std::uint64_t id = 0;
    std::uint64_t incident_id = 0;
    ResponseStage stage = ResponseStage::Containment;
    ResponseAction action;
    bool unresolved = false;  // NoOp pending manual review
    SimTime issued_at = 0;
};

/// First matching rule wins; unmatched incidents get a NoOp directive
/// flagged for manual review. Autonomy is restricted to rule matches.
ResponseDirective backend_decide(const Incident& incident,
                                 const std::vector<DecisionRule>& rules);

/// Vehicle-side distribution point: rejects a second directive for an
/// incident that has already been acted on.
class ActuatorManager {
public:
    /// Throws StaleDirective when the incident already has an applied
    /// directive.
    void accept(const ResponseDirective& directive);

    std::uint64_t applied() const { return applied_count_; }

private:
    std::set<std::uint64_t> applied_incidents_;
    std::uint64_t applied_count_ = 0;
};

// ---------------------------------------------------------------------------
// Fleet log generation

struct GroundTruth {
    bool attack = false;
    std::string attack_type;  // empty when benign
};

struct FleetLogRecord {
    std::string vehicle;
    SimTime timestamp = 0;
    SecuritySensorReport report;
    GroundTruth ground_truth;
};

struct FleetAttackSpec {
    std::string type;            // label carried in the ground truth
    int bursts_per_vehicle = 1;
    int reports_per_burst = 10;
    double burst_rate_per_s = 10.0;
};

struct FleetLogOptions {
    double benign_rate_per_hour = 60.0;
};

/// Synthesizes labeled security-report streams for a fleet: Poisson benign
/// background plus injected attack bursts. Per-vehicle sub-seeds keep the
/// output independent of vehicle count ordering.
std::vector<FleetLogRecord> generate_fleet_logs(int n_vehicles, double duration_s,
                                                const std::vector<FleetAttackSpec>& attack_mix,
                                                std::uint64_t seed,
                                                const FleetLogOptions& opts = {});

struct FleetSummaryRow {
    std::string vehicle;
    std::uint64_t benign = 0;
    std::uint64_t attack = 0;
    std::uint64_t incidents = 0;
    std::uint64_t escalated = 0;
    std::uint64_t suppressed = 0;
    std::uint64_t forwarded = 0;
};

/// Replays generated logs through a fusion policy per vehicle. The decision
/// path never sees the ground-truth labels.
std::vector<FleetSummaryRow> replay_fleet_logs(const std::vector<FleetLogRecord>& records,
                                               const FusionPolicy& policy);

}  // namespace ivnsim

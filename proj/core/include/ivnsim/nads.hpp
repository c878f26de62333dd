#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ivnsim/mean_shift.hpp"
#include "ivnsim/net_model.hpp"
#include "ivnsim/rng.hpp"

namespace ivnsim {

enum class MetricKind : std::uint8_t { FrameSize, Bandwidth, PacketGap, CycleDeviation };

std::string metric_name(MetricKind m);

struct BandwidthMode {
    enum class Kind : std::uint8_t { Fixed, FromData };
    Kind kind = Kind::Fixed;
    double h = 0.2;          // Fixed
    double factor = 3.0;     // FromData: h = factor * mean NN distance
};

struct StreamMonitorConfig {
    std::string id;
    std::string nads;              // NADS node name this monitor runs on
    StreamKey stream;
    MetricKind metric_x = MetricKind::FrameSize;
    MetricKind metric_y = MetricKind::Bandwidth;
    SimTime interval_us = 100'000;
    int learning_intervals = 30;
    BandwidthMode bandwidth;
    double nominal_cycle_ms = 0.0;  // CycleDeviation reference
    double drop_probability = 0.0;  // chance an assessment interval is skipped
};

void validate(const StreamMonitorConfig& cfg);

struct MetricVector {
    std::int64_t interval_index = 0;
    double x = 0.0, y = 0.0;        // normalized, clamped to [0, 1]
    double raw_x = 0.0, raw_y = 0.0;
    std::uint64_t frame_count = 0;
    bool x_clamped = false, y_clamped = false;
};

struct NormBounds {
    double min_x = 0.0, max_x = 0.0;
    double min_y = 0.0, max_y = 0.0;
};

enum class ModelState : std::uint8_t { Learning, Working };

struct MeanShiftModel {
    std::vector<Point2> modes;
    double h = 0.0;
    NormBounds bounds;
    ModelState state = ModelState::Learning;
};

struct Assessment {
    bool anomaly = false;
    double distance = 0.0;  // to the nearest mode
};

struct AnomalyReport {
    std::uint64_t report_id = 0;
    SimTime timestamp = 0;      // emission time at the NADS
    std::string monitor_id;
    std::string nads;
    std::string stream;
    std::int64_t interval_index = 0;
    MetricVector vector;
    double distance = 0.0;
};

/// Raw per-interval aggregation; cheap enough to run per mirrored frame.
struct IntervalAccumulator {
    std::uint64_t count = 0;
    std::uint64_t attack_count = 0;
    std::uint32_t last_attack_id = 0;
    double sum_len = 0.0;
    SimTime prev_ts = -1;
    double sum_gap_us = 0.0;
    double sum_absdev_us = 0.0;
    std::uint64_t n_gaps = 0;

    void add(SimTime ts, std::uint32_t payload_len, double nominal_cycle_us,
             std::uint32_t attack_id) {
        ++count;
        if (attack_id != 0) {
            ++attack_count;
            last_attack_id = attack_id;
        }
        sum_len += payload_len;
        if (prev_ts >= 0) {
            const double gap = static_cast<double>(ts - prev_ts);
            sum_gap_us += gap;
            if (nominal_cycle_us > 0.0) sum_absdev_us += std::abs(gap - nominal_cycle_us);
            ++n_gaps;
        }
        prev_ts = ts;
    }

    void reset() { *this = IntervalAccumulator{}; }
};

double raw_metric(MetricKind kind, const IntervalAccumulator& acc,
                  const StreamMonitorConfig& cfg);

/// Interval metrics from a frame list (offline form used by tests and the
/// report tooling; the engine aggregates incrementally with the same math).
MetricVector compute_metrics(const std::vector<EthernetFrame>& frames,
                             const StreamMonitorConfig& cfg, std::int64_t interval_index);

/// Min-max normalization against learned bounds with clamping; a degenerate
/// learned span maps the learned value to 0.5 and any deviation to the
/// nearest extreme.
double normalize_clamped(double raw, double lo, double hi, bool& clamped);

/// Distance-to-nearest-mode thresholding: anomaly iff the distance exceeds
/// the bandwidth (strictly). Throws NotTrained while the model is learning.
Assessment assess(const MetricVector& v, const MeanShiftModel& model);

struct IntervalRecord {
    std::string monitor_id;
    std::string nads;
    std::string stream;
    MetricVector vector;
    enum class Verdict : std::uint8_t { Learning, Normal, Anomaly, Skipped } verdict;
    double distance = 0.0;
    bool attack_present = false;
    std::uint32_t attack_id = 0;
};

/// Per-stream detector instance: learning window, model fit, assessment.
class StreamMonitor {
public:
    explicit StreamMonitor(StreamMonitorConfig cfg);

    const StreamMonitorConfig& config() const { return cfg_; }
    const MeanShiftModel& model() const { return model_; }
    ModelState state() const { return model_.state; }

    void on_frame(SimTime ts, std::uint32_t payload_len, std::uint32_t attack_id = 0) {
        acc_.add(ts, payload_len, nominal_cycle_us_, attack_id);
    }

    /// Closes the current interval: trains while learning, assesses once
    /// working. `drop_roll` in [0,1) models lost assessment intervals.
    IntervalRecord close_interval(std::int64_t interval_index, double drop_roll);

    MetricVector vector_from_acc(std::int64_t interval_index) const;

    std::int64_t intervals_closed() const { return intervals_closed_; }
    std::int64_t assessed() const { return assessed_; }
    std::int64_t anomalies() const { return anomalies_; }
    std::int64_t false_positives() const { return false_positives_; }
    std::int64_t true_positives() const { return true_positives_; }
    std::int64_t false_negatives() const { return false_negatives_; }

private:
    void finish_learning();

    StreamMonitorConfig cfg_;
    double nominal_cycle_us_ = 0.0;
    MeanShiftModel model_;
    IntervalAccumulator acc_;
    std::vector<MetricVector> training_;
    std::int64_t intervals_closed_ = 0;
    std::int64_t assessed_ = 0;
    std::int64_t anomalies_ = 0;
    std::int64_t false_positives_ = 0;
    std::int64_t true_positives_ = 0;
    std::int64_t false_negatives_ = 0;
};

struct PipelineResult {
    std::vector<IntervalRecord> records;
    std::vector<AnomalyReport> reports;
};

/// Offline pipeline (metric recording -> algorithm -> logging -> reporting)
/// over a recorded frame trace. Frames must be timestamp-ordered. Reports
/// carry the interval-close timestamp; transport and processing delays are
/// the simulation engine's concern.
PipelineResult run_pipeline(const std::vector<EthernetFrame>& frames,
                            const std::vector<StreamMonitorConfig>& cfgs,
                            SimTime trace_end = -1);

}  // namespace ivnsim

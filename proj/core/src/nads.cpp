#include "ivnsim/nads.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ivnsim {

std::string metric_name(MetricKind m) {
    switch (m) {
        case MetricKind::FrameSize: return "frame_size";
        case MetricKind::Bandwidth: return "bandwidth";
        case MetricKind::PacketGap: return "packet_gap";
        case MetricKind::CycleDeviation: return "cycle_deviation";
    }
    return "?";
}

void validate(const StreamMonitorConfig& cfg) {
    if (cfg.interval_us <= 0) throw Error("monitor " + cfg.id + ": interval must be positive");
    if (cfg.learning_intervals < 10)
        throw Error("monitor " + cfg.id + ": learning_intervals must be >= 10");
    if (cfg.metric_x == cfg.metric_y)
        throw Error("monitor " + cfg.id + ": metrics X and Y must differ");
    if ((cfg.metric_x == MetricKind::CycleDeviation ||
         cfg.metric_y == MetricKind::CycleDeviation) &&
        cfg.nominal_cycle_ms <= 0.0)
        throw Error("monitor " + cfg.id + ": cycle_deviation needs a nominal cycle");
    if (cfg.drop_probability < 0.0 || cfg.drop_probability > 1.0)
        throw Error("monitor " + cfg.id + ": drop_probability outside [0, 1]");
    if (cfg.bandwidth.kind == BandwidthMode::Kind::Fixed && cfg.bandwidth.h <= 0.0)
        throw DegenerateBandwidth("monitor " + cfg.id + ": fixed bandwidth must be positive");
}

double raw_metric(MetricKind kind, const IntervalAccumulator& acc,
                  const StreamMonitorConfig& cfg) {
    if (acc.count == 0) return 0.0;  // silence is a defined all-zero vector
    switch (kind) {
        case MetricKind::FrameSize:
            return acc.sum_len / static_cast<double>(acc.count);
        case MetricKind::Bandwidth:
            return acc.sum_len / s_from_us(cfg.interval_us);
        case MetricKind::PacketGap:
            return acc.n_gaps == 0 ? 0.0
                                   : (acc.sum_gap_us / static_cast<double>(acc.n_gaps)) / 1e6;
        case MetricKind::CycleDeviation: {
            if (acc.n_gaps == 0) return 0.0;
            const double nominal_us = cfg.nominal_cycle_ms * 1000.0;
            return (acc.sum_absdev_us / static_cast<double>(acc.n_gaps)) / nominal_us;
        }
    }
    return 0.0;
}

MetricVector compute_metrics(const std::vector<EthernetFrame>& frames,
                             const StreamMonitorConfig& cfg, std::int64_t interval_index) {
    IntervalAccumulator acc;
    const double cycle_us = cfg.nominal_cycle_ms * 1000.0;
    for (const auto& f : frames) acc.add(f.timestamp, f.payload_len, cycle_us, f.attack_id);
    MetricVector v;
    v.interval_index = interval_index;
    v.frame_count = acc.count;
    v.raw_x = raw_metric(cfg.metric_x, acc, cfg);
    v.raw_y = raw_metric(cfg.metric_y, acc, cfg);
    return v;
}

double normalize_clamped(double raw, double lo, double hi, bool& clamped) {
    clamped = false;
    const double span = hi - lo;
    if (span <= 0.0) {
        if (raw == lo) return 0.5;
        clamped = true;
        return raw < lo ? 0.0 : 1.0;
    }
    const double n = (raw - lo) / span;
    if (n < 0.0) {
        clamped = true;
        return 0.0;
    }
    if (n > 1.0) {
        clamped = true;
        return 1.0;
    }
    return n;
}

Assessment assess(const MetricVector& v, const MeanShiftModel& model) {
    if (model.state != ModelState::Working)
        throw NotTrained("assessment requested while the model is still learning");
    const Point2 p{v.x, v.y};
    double best2 = std::numeric_limits<double>::infinity();
    for (const Point2& m : model.modes) best2 = std::min(best2, sq_dist(p, m));
    Assessment a;
    a.distance = std::sqrt(best2);
    a.anomaly = a.distance > model.h;  // strictly greater: distance == h is normal
    return a;
}

StreamMonitor::StreamMonitor(StreamMonitorConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    nominal_cycle_us_ = cfg_.nominal_cycle_ms * 1000.0;
    training_.reserve(static_cast<std::size_t>(cfg_.learning_intervals));
}

MetricVector StreamMonitor::vector_from_acc(std::int64_t interval_index) const {
    MetricVector v;
    v.interval_index = interval_index;
    v.frame_count = acc_.count;
    v.raw_x = raw_metric(cfg_.metric_x, acc_, cfg_);
    v.raw_y = raw_metric(cfg_.metric_y, acc_, cfg_);
    if (model_.state == ModelState::Working) {
        v.x = normalize_clamped(v.raw_x, model_.bounds.min_x, model_.bounds.max_x, v.x_clamped);
        v.y = normalize_clamped(v.raw_y, model_.bounds.min_y, model_.bounds.max_y, v.y_clamped);
    }
    return v;
}

void StreamMonitor::finish_learning() {
    NormBounds b;
    b.min_x = b.max_x = training_.front().raw_x;
    b.min_y = b.max_y = training_.front().raw_y;
    for (const auto& t : training_) {
        b.min_x = std::min(b.min_x, t.raw_x);
        b.max_x = std::max(b.max_x, t.raw_x);
        b.min_y = std::min(b.min_y, t.raw_y);
        b.max_y = std::max(b.max_y, t.raw_y);
    }
    model_.bounds = b;

    std::vector<Point2> normalized;
    normalized.reserve(training_.size());
    for (auto& t : training_) {
        bool cx = false, cy = false;
        t.x = normalize_clamped(t.raw_x, b.min_x, b.max_x, cx);
        t.y = normalize_clamped(t.raw_y, b.min_y, b.max_y, cy);
        normalized.push_back({t.x, t.y});
    }

    double h = cfg_.bandwidth.h;
    if (cfg_.bandwidth.kind == BandwidthMode::Kind::FromData) {
        const double nn = mean_nearest_neighbor_distance(normalized);
        h = cfg_.bandwidth.factor * nn;
        if (h <= 0.0) h = 0.05;  // all training points identical
    }
    model_.h = h;
    model_.modes = mean_shift_fit(normalized, h);
    model_.state = ModelState::Working;
}

IntervalRecord StreamMonitor::close_interval(std::int64_t interval_index, double drop_roll) {
    IntervalRecord rec;
    rec.monitor_id = cfg_.id;
    rec.nads = cfg_.nads;
    rec.stream = cfg_.stream.to_string();
    rec.attack_present = acc_.attack_count > 0;
    rec.attack_id = acc_.last_attack_id;
    ++intervals_closed_;

    if (model_.state == ModelState::Learning) {
        rec.vector = vector_from_acc(interval_index);
        rec.verdict = IntervalRecord::Verdict::Learning;
        training_.push_back(rec.vector);
        if (static_cast<int>(training_.size()) >= cfg_.learning_intervals) finish_learning();
        acc_.reset();
        return rec;
    }

    rec.vector = vector_from_acc(interval_index);
    acc_.reset();

    if (cfg_.drop_probability > 0.0 && drop_roll < cfg_.drop_probability) {
        rec.verdict = IntervalRecord::Verdict::Skipped;
        return rec;
    }

    const Assessment a = assess(rec.vector, model_);
    rec.distance = a.distance;
    ++assessed_;
    if (a.anomaly) {
        rec.verdict = IntervalRecord::Verdict::Anomaly;
        ++anomalies_;
        if (rec.attack_present) ++true_positives_;
        else ++false_positives_;
    } else {
        rec.verdict = IntervalRecord::Verdict::Normal;
        if (rec.attack_present) ++false_negatives_;
    }
    return rec;
}

PipelineResult run_pipeline(const std::vector<EthernetFrame>& frames,
                            const std::vector<StreamMonitorConfig>& cfgs, SimTime trace_end) {
    PipelineResult out;
    std::vector<StreamKey> keys;
    keys.reserve(cfgs.size());
    for (const auto& c : cfgs) keys.push_back(c.stream);

    std::vector<StreamMonitor> monitors;
    monitors.reserve(cfgs.size());
    for (const auto& c : cfgs) monitors.emplace_back(c);
    std::vector<std::int64_t> next_interval(cfgs.size(), 0);
    std::uint64_t report_id = 1;

    auto close_through = [&](std::size_t m, std::int64_t limit) {
        // Close every interval that ends at or before `limit`.
        const SimTime iv = cfgs[m].interval_us;
        while ((next_interval[m] + 1) * iv <= limit) {
            const std::int64_t idx = next_interval[m]++;
            IntervalRecord rec = monitors[m].close_interval(idx, 1.0);
            if (rec.verdict == IntervalRecord::Verdict::Anomaly) {
                AnomalyReport rep;
                rep.report_id = report_id++;
                rep.timestamp = (idx + 1) * iv;
                rep.monitor_id = rec.monitor_id;
                rep.nads = rec.nads;
                rep.stream = rec.stream;
                rep.interval_index = idx;
                rep.vector = rec.vector;
                rep.distance = rec.distance;
                out.reports.push_back(std::move(rep));
            }
            out.records.push_back(std::move(rec));
        }
    };

    for (const auto& f : frames) {
        const auto hit = stream_key_of(f, keys);
        if (!hit) continue;
        close_through(*hit, f.timestamp);
        monitors[*hit].on_frame(f.timestamp, f.payload_len, f.attack_id);
    }
    const SimTime end = trace_end >= 0 ? trace_end
                        : frames.empty() ? 0 : frames.back().timestamp;
    for (std::size_t m = 0; m < monitors.size(); ++m) close_through(m, end);
    return out;
}

}  // namespace ivnsim

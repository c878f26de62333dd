#pragma once

#include <stdexcept>
#include <vector>

#include "ivnsim/rng.hpp"

namespace ivnsim {

/// Latency model for one delay source. Pert is the modified-PERT (Beta
/// shaped on [min, max] with weight 4 on the mode), so
/// mean = (min + 4*mode + max) / 6.
struct LatencyModel {
    enum class Kind { Constant, Pert, Empirical };

    Kind kind = Kind::Constant;
    double value_ms = 0.0;                 // Constant
    double min_ms = 0.0, mode_ms = 0.0, max_ms = 0.0;  // Pert
    std::vector<double> samples_ms;        // Empirical (sampled uniformly)

    static LatencyModel constant(double ms) {
        LatencyModel m;
        m.kind = Kind::Constant;
        m.value_ms = ms;
        return m;
    }

    static LatencyModel pert(double min_ms, double mode_ms, double max_ms);

    /// Builds a Pert from a measured (min, avg, max) triple using
    /// mode = (6*avg - min - max) / 4, which reproduces the average exactly.
    static LatencyModel from_triple(double min_ms, double avg_ms, double max_ms);

    static LatencyModel empirical(std::vector<double> samples);

    double sample_ms(Rng& rng) const;
    double mean_ms() const;
};

}  // namespace ivnsim

#include "ivnsim/latency.hpp"

#include <numeric>

namespace ivnsim {

LatencyModel LatencyModel::pert(double min_ms, double mode_ms, double max_ms) {
    if (!(min_ms <= mode_ms && mode_ms <= max_ms))
        throw std::invalid_argument("pert latency requires min <= mode <= max");
    LatencyModel m;
    m.kind = Kind::Pert;
    m.min_ms = min_ms;
    m.mode_ms = mode_ms;
    m.max_ms = max_ms;
    return m;
}

LatencyModel LatencyModel::from_triple(double min_ms, double avg_ms, double max_ms) {
    const double mode = (6.0 * avg_ms - min_ms - max_ms) / 4.0;
    if (!(min_ms <= mode && mode <= max_ms))
        throw std::invalid_argument("latency triple admits no PERT mode within [min, max]");
    return pert(min_ms, mode, max_ms);
}

LatencyModel LatencyModel::empirical(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("empirical latency needs samples");
    LatencyModel m;
    m.kind = Kind::Empirical;
    m.samples_ms = std::move(samples);
    return m;
}

double LatencyModel::sample_ms(Rng& rng) const {
    switch (kind) {
        case Kind::Constant:
            return value_ms;
        case Kind::Pert: {
            const double span = max_ms - min_ms;
            if (span <= 0.0) return min_ms;
            const double a = 1.0 + 4.0 * (mode_ms - min_ms) / span;
            const double b = 1.0 + 4.0 * (max_ms - mode_ms) / span;
            return min_ms + span * rng.beta(a, b);
        }
        case Kind::Empirical:
            return samples_ms[rng.uniform_u64(samples_ms.size())];
    }
    return 0.0;
}

double LatencyModel::mean_ms() const {
    switch (kind) {
        case Kind::Constant:
            return value_ms;
        case Kind::Pert:
            return (min_ms + 4.0 * mode_ms + max_ms) / 6.0;
        case Kind::Empirical:
            return std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) /
                   static_cast<double>(samples_ms.size());
    }
    return 0.0;
}

}  // namespace ivnsim

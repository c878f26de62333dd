#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ivnsim {

/// splitmix64; used to derive independent sub-seeds from (master seed, label)
/// so that adding one stream to a scenario does not shift every other
/// stream's samples.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
    // FNV-1a, stable across platforms.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return splitmix64(master ^ hash_label(label));
}

/// Deterministic random source. mt19937_64 has a standard-specified output
/// sequence; all distribution transforms are implemented here because the
/// std::*_distribution algorithms are implementation-defined and would break
/// the byte-identical-output contract across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of entropy.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t uniform_u64(std::uint64_t n) {
        // Modulo bias is irrelevant for simulation purposes at n << 2^64.
        return n == 0 ? 0 : engine_() % n;
    }

    /// Box-Muller; one value per call (the twin is discarded to keep the
    /// consumption pattern independent of call history).
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Marsaglia-Tsang for alpha >= 1, boosted for alpha < 1.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = uniform();
            return gamma(alpha + 1.0) * std::pow(u <= 0.0 ? 1e-300 : u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    /// Poisson via inversion (small means) / normal approximation fallback.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 60.0) {
            const double limit = std::exp(-mean);
            double prod = uniform();
            std::uint64_t n = 0;
            while (prod > limit) {
                prod *= uniform();
                ++n;
            }
            return n;
        }
        const double v = normal(mean, std::sqrt(mean));
        return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(v));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ivnsim

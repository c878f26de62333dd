#pragma once

// Test-only oracles, kept independent of the implementation paths they
// check.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ivnsim/mean_shift.hpp"

namespace ivnsim::testing {

/// Flat-kernel mean shift is hill climbing on the Epanechnikov shadow
/// density f(x) = sum_i max(0, 1 - |x - xi|^2 / h^2). This oracle finds the
/// modes reachable from the samples by numerical gradient ascent on that
/// density (central finite differences with backtracking line search) —
/// a different route to the same stationary points.
class DensityAscentOracle {
public:
    DensityAscentOracle(std::vector<Point2> samples, double h)
        : samples_(std::move(samples)), h_(h) {}

    double density(const Point2& p) const {
        const double h2 = h_ * h_;
        double f = 0.0;
        for (const Point2& s : samples_) {
            const double d2 = sq_dist(p, s);
            if (d2 < h2) f += 1.0 - d2 / h2;
        }
        return f;
    }

    Point2 ascend(Point2 p) const {
        const double fd_step = 1e-6;
        double step = h_ / 4.0;
        for (int it = 0; it < 20000 && step > 1e-10; ++it) {
            const double fx = density(p);
            const double gx = (density({p.x + fd_step, p.y}) - density({p.x - fd_step, p.y})) /
                              (2.0 * fd_step);
            const double gy = (density({p.x, p.y + fd_step}) - density({p.x, p.y - fd_step})) /
                              (2.0 * fd_step);
            const double norm = std::sqrt(gx * gx + gy * gy);
            if (norm < 1e-9) break;
            Point2 trial{p.x + step * gx / norm, p.y + step * gy / norm};
            if (density(trial) > fx + 1e-12) {
                p = trial;
            } else {
                step *= 0.5;
            }
        }
        return p;
    }

    /// Modes reachable from the sample set, merged within merge_radius.
    std::vector<Point2> modes(double merge_radius) const {
        std::vector<Point2> found;
        for (const Point2& s : samples_) {
            const Point2 m = ascend(s);
            bool merged = false;
            for (Point2& g : found) {
                if (sq_dist(m, g) <= merge_radius * merge_radius) {
                    merged = true;
                    break;
                }
            }
            if (!merged) found.push_back(m);
        }
        return found;
    }

private:
    std::vector<Point2> samples_;
    double h_;
};

/// Mixture-of-blobs dataset generator for the oracle-equivalence checks.
/// Blob centers are kept well separated relative to the bandwidth so the
/// density has clean, isolated maxima.
inline std::vector<Point2> random_blob_dataset(std::uint64_t seed, int max_points, double h,
                                               int* n_blobs_out = nullptr) {
    std::mt19937_64 eng(seed);
    auto unif = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(eng() >> 11) * 0x1.0p-53;
    };
    const int n_blobs = 1 + static_cast<int>(eng() % 3);
    std::vector<Point2> centers;
    // Centers at least 2.5h apart keep the kernels disjoint; give up after a
    // bounded number of attempts rather than forcing an infeasible layout.
    for (int attempts = 0; static_cast<int>(centers.size()) < n_blobs && attempts < 500;
         ++attempts) {
        Point2 c{unif(0.1, 0.9), unif(0.1, 0.9)};
        bool ok = true;
        for (const Point2& o : centers)
            if (std::sqrt(sq_dist(c, o)) < 2.5 * h) ok = false;
        if (ok) centers.push_back(c);
    }
    if (n_blobs_out) *n_blobs_out = static_cast<int>(centers.size());
    const int total = 20 + static_cast<int>(eng() % static_cast<std::uint64_t>(max_points - 20));
    std::vector<Point2> points;
    const double spread = h / 4.0;
    for (int i = 0; i < total; ++i) {
        const Point2& c = centers[static_cast<std::size_t>(i) % centers.size()];
        // Box-Muller with the raw engine keeps the dataset reproducible.
        double u1 = unif(1e-12, 1.0), u2 = unif(0.0, 1.0);
        const double r = std::sqrt(-2.0 * std::log(u1)) * spread;
        points.push_back({c.x + r * std::cos(6.2831853 * u2), c.y + r * std::sin(6.2831853 * u2)});
    }
    return points;
}

}  // namespace ivnsim::testing

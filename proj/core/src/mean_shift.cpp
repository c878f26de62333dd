#include "ivnsim/mean_shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ivnsim {

std::vector<Point2> mean_shift_fit(const std::vector<Point2>& samples, double h,
                                   const MeanShiftOptions& opts) {
    if (h <= 0.0) throw DegenerateBandwidth("mean shift bandwidth must be positive");
    if (samples.empty()) throw Error("mean shift requires at least one sample");

    const double h2 = h * h;
    const double eps2 = opts.convergence_eps * opts.convergence_eps;

    std::vector<Point2> converged;
    converged.reserve(samples.size());
    for (const Point2& start : samples) {
        Point2 p = start;
        for (int it = 0; it < opts.max_iterations; ++it) {
            double sx = 0.0, sy = 0.0;
            int n = 0;
            for (const Point2& s : samples) {
                if (sq_dist(p, s) <= h2) {
                    sx += s.x;
                    sy += s.y;
                    ++n;
                }
            }
            // The climbing point always counts itself once it sits on a
            // sample, but an isolated start with no neighbors stays put.
            if (n == 0) break;
            const Point2 next{sx / n, sy / n};
            const double shift2 = sq_dist(p, next);
            p = next;
            if (shift2 < eps2) break;
        }
        converged.push_back(p);
    }

    // Merge in sample-index order; the first member of a group anchors it
    // and later members fold into the running centroid.
    const double merge_r = opts.merge_radius_factor * h;
    const double merge_r2 = merge_r * merge_r;
    std::vector<Point2> modes;
    std::vector<int> counts;
    for (const Point2& p : converged) {
        bool merged = false;
        for (std::size_t g = 0; g < modes.size(); ++g) {
            if (sq_dist(p, modes[g]) <= merge_r2) {
                const int n = counts[g];
                modes[g].x = (modes[g].x * n + p.x) / (n + 1);
                modes[g].y = (modes[g].y * n + p.y) / (n + 1);
                counts[g] = n + 1;
                merged = true;
                break;
            }
        }
        if (!merged) {
            modes.push_back(p);
            counts.push_back(1);
        }
    }

    // Centroid drift can pull two groups inside the merge radius of each
    // other; fold until the pairwise separation invariant holds.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < modes.size() && !changed; ++i) {
            for (std::size_t j = i + 1; j < modes.size() && !changed; ++j) {
                if (sq_dist(modes[i], modes[j]) <= merge_r2) {
                    const int ni = counts[i], nj = counts[j];
                    modes[i].x = (modes[i].x * ni + modes[j].x * nj) / (ni + nj);
                    modes[i].y = (modes[i].y * ni + modes[j].y * nj) / (ni + nj);
                    counts[i] = ni + nj;
                    modes.erase(modes.begin() + static_cast<std::ptrdiff_t>(j));
                    counts.erase(counts.begin() + static_cast<std::ptrdiff_t>(j));
                    changed = true;
                }
            }
        }
    }
    return modes;
}

double mean_nearest_neighbor_distance(const std::vector<Point2>& points) {
    if (points.size() < 2) return 0.0;
    double total = 0.0;
    int counted = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, sq_dist(points[i], points[j]));
        }
        if (std::isfinite(best)) {
            total += std::sqrt(best);
            ++counted;
        }
    }
    return counted == 0 ? 0.0 : total / counted;
}

}  // namespace ivnsim

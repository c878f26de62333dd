#pragma once

#include <vector>

#include "ivnsim/errors.hpp"

namespace ivnsim {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double sq_dist(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

struct MeanShiftOptions {
    double convergence_eps = 1e-4;
    int max_iterations = 100;
    double merge_radius_factor = 0.5;  // merge radius = factor * h
};

/// Flat-kernel mean shift: every sample climbs to the centroid of its
/// h-neighborhood until the shift falls below convergence_eps; converged
/// points within h/2 are merged to their centroid in sample-index order.
/// Throws DegenerateBandwidth when h <= 0.
std::vector<Point2> mean_shift_fit(const std::vector<Point2>& samples, double h,
                                   const MeanShiftOptions& opts = {});

/// Mean nearest-neighbor distance; 0 for fewer than two distinct points.
/// Used by the data-driven bandwidth heuristic.
double mean_nearest_neighbor_distance(const std::vector<Point2>& points);

}  // namespace ivnsim

#include "doctest.h"

#include <cmath>

#include "ivnsim/mean_shift.hpp"
#include "support/oracles.hpp"

using namespace ivnsim;

namespace {

bool modes_match(const std::vector<Point2>& got, const std::vector<Point2>& expected,
                 double tol) {
    if (got.size() != expected.size()) return false;
    std::vector<bool> used(expected.size(), false);
    for (const Point2& g : got) {
        bool found = false;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (used[i]) continue;
            if (std::abs(g.x - expected[i].x) <= tol && std::abs(g.y - expected[i].y) <= tol) {
                used[i] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("identical samples collapse to a single mode") {
    std::vector<Point2> pts(25, Point2{0.4, 0.7});
    const auto modes = mean_shift_fit(pts, 0.1);
    REQUIRE(modes.size() == 1);
    CHECK(modes[0].x == doctest::Approx(0.4));
    CHECK(modes[0].y == doctest::Approx(0.7));
}

TEST_CASE("a single sample is its own mode") {
    const auto modes = mean_shift_fit({{0.25, 0.75}}, 0.2);
    REQUIRE(modes.size() == 1);
    CHECK(modes[0].x == doctest::Approx(0.25));
    CHECK(modes[0].y == doctest::Approx(0.75));
}

TEST_CASE("non-positive bandwidth is rejected") {
    CHECK_THROWS_AS(mean_shift_fit({{0, 0}}, 0.0), DegenerateBandwidth);
    CHECK_THROWS_AS(mean_shift_fit({{0, 0}}, -1.0), DegenerateBandwidth);
}

TEST_CASE("two tight blobs produce two modes near the blob means") {
    // Expected values computed with the density-ascent oracle on the same
    // samples; the blob means themselves are accurate to ~1e-3 because the
    // blobs are tight and far apart relative to h.
    std::vector<Point2> pts;
    const double off[5][2] = {{0, 0}, {4e-4, 2e-4}, {-3e-4, 4e-4}, {2e-4, -4e-4}, {-2e-4, -1e-4}};
    for (const auto& o : off) pts.push_back({0.2 + o[0], 0.2 + o[1]});
    for (const auto& o : off) pts.push_back({0.8 + o[0], 0.8 + o[1]});

    const auto modes = mean_shift_fit(pts, 0.15);
    REQUIRE(modes.size() == 2);
    CHECK(modes_match(modes, {{0.2, 0.2}, {0.8, 0.8}}, 1e-3));

    testing::DensityAscentOracle oracle(pts, 0.15);
    const auto expected = oracle.modes(0.075);
    CHECK(modes_match(modes, expected, 1e-3));
}

TEST_CASE("modes agree with the density-ascent oracle on random datasets") {
    // Smoke subset here; the acceptance suite runs the full 50-dataset check.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const double h = 0.1 + 0.02 * static_cast<double>(seed % 5);
        const auto pts = testing::random_blob_dataset(seed * 7919, 200, h);
        const auto modes = mean_shift_fit(pts, h);
        testing::DensityAscentOracle oracle(pts, h);
        const auto expected = oracle.modes(0.5 * h);
        INFO("seed ", seed, " points ", pts.size(), " modes ", modes.size(), " oracle ",
             expected.size());
        CHECK(modes_match(modes, expected, 1e-3));
    }
}

TEST_CASE("modes respect the pairwise separation bound") {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const double h = 0.12;
        const auto pts = testing::random_blob_dataset(seed, 150, h);
        const auto modes = mean_shift_fit(pts, h);
        for (std::size_t i = 0; i < modes.size(); ++i)
            for (std::size_t j = i + 1; j < modes.size(); ++j)
                CHECK(std::sqrt(sq_dist(modes[i], modes[j])) > h / 2.0);
    }
}

TEST_CASE("mean nearest-neighbor distance handles degenerate inputs") {
    CHECK(mean_nearest_neighbor_distance({}) == 0.0);
    CHECK(mean_nearest_neighbor_distance({{1, 1}}) == 0.0);
    CHECK(mean_nearest_neighbor_distance({{0, 0}, {0, 1}}) == doctest::Approx(1.0));
}

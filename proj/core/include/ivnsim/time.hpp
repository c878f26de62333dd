#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ivnsim {

/// Simulation time in integer microseconds. Virtual time only; never tied
/// to the wall clock.
using SimTime = std::int64_t;

constexpr SimTime kSimTimeMax = std::numeric_limits<SimTime>::max();

constexpr SimTime us_from_ms(double ms) {
    return static_cast<SimTime>(std::llround(ms * 1000.0));
}

constexpr SimTime us_from_s(double s) {
    return static_cast<SimTime>(std::llround(s * 1'000'000.0));
}

constexpr double ms_from_us(SimTime t) {
    return static_cast<double>(t) / 1000.0;
}

constexpr double s_from_us(SimTime t) {
    return static_cast<double>(t) / 1'000'000.0;
}

}  // namespace ivnsim

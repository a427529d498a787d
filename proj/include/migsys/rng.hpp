// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <random>

namespace migsys {

// All randomness in the library flows through std::mt19937_64 plus the two
// helpers below. Distribution sampling is hand-rolled (not <random>
// distributions, whose output is implementation-defined) so a seed produces
// the same stream on every platform.

/// Uniform double in [0, 1) using the top 53 bits of one engine output.
inline double uniform53(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform53(gen);
}

/// Standard normal draw via Box-Muller. Consumes exactly two engine outputs.
inline double standard_normal(std::mt19937_64& gen) {
    // Shift u1 away from 0 so the log is finite.
    const double u1 = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = uniform53(gen);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace migsys

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace splitflow::test {

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

inline bool close(double a, double b, double abs_tol, double rel_tol) {
    return std::abs(a - b) <= abs_tol + rel_tol * std::max(std::abs(a), std::abs(b));
}

// Paper-figure channel parameters used throughout the tests.
inline constexpr double kMuI = 30.0;
inline constexpr double kSigmaI = 2.0;
inline constexpr double kMuJ = 20.0;
inline constexpr double kSigmaJ = 6.0;

}  // namespace splitflow::test

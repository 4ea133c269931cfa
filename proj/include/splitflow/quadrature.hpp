#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace splitflow::quad {

/// Evaluates an integrand at a batch of abscissae: out[i] = g(x[i]).
using BatchIntegrand = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Integrals of g(x) and x g(x) over [lower, upper] with their error bounds.
struct MomentIntegrals {
    double zeroth = 0.0;
    double first = 0.0;
    double zeroth_error = 0.0;
    double first_error = 0.0;
    std::size_t panels = 0;
    bool converged = false;
};

/// Globally adaptive Gauss-Legendre integration of g and x*g sharing one set
/// of integrand evaluations. Each panel is scored by comparing the 15-point
/// rule on the whole panel against the sum over its two halves; the panel
/// with the largest error is bisected until both totals are within abs_tol or
/// max_panels is reached (converged = false).
///
/// breakpoints inside (lower, upper) seed the initial partition.
MomentIntegrals integrate_moments(const BatchIntegrand& g, double lower, double upper, double abs_tol,
                                  std::size_t max_panels, std::span<const double> breakpoints = {});

/// 15-point Gauss-Legendre nodes and weights on [-1, 1] (computed once).
std::span<const double> gauss_legendre_nodes();
std::span<const double> gauss_legendre_weights();

}  // namespace splitflow::quad

#pragma once

// Mean-variance sweeps over partition fractions and their efficient frontier.

#include "splitflow/model.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace splitflow {

/// One evaluated partition. For two channels fractions = {f, 1 - f}.
struct MomentPoint {
    std::vector<double> fractions;
    double mean = 0.0;
    double variance = 0.0;
    bool pareto = false;

    double f() const { return fractions.front(); }
};

class Objective {
public:
    enum class Kind { MinMean, MinVariance, MeanPlusKSigma, Scalarized };

    static Objective min_mean() { return Objective(Kind::MinMean, 0.0); }
    static Objective min_variance() { return Objective(Kind::MinVariance, 0.0); }
    /// mean + k * sqrt(variance); k >= 0.
    static Objective mean_plus_k_sigma(double k);
    /// mean + lambda * variance; lambda >= 0.
    static Objective scalarized(double lambda);

    /// "min-mean", "min-variance", "mean-plus-k-sigma:<k>", "scalarized:<lambda>".
    static Objective parse(const std::string& text);

    Kind kind() const noexcept { return kind_; }
    double parameter() const noexcept { return param_; }
    double score(const MomentPoint& p) const;

private:
    Objective(Kind kind, double param) : kind_(kind), param_(param) {}

    Kind kind_;
    double param_;
};

struct SweepOptions {
    QuadratureSettings quad;
    /// Cap on simplex lattice points.
    std::size_t max_lattice_points = 1'000'000;
};

/// Evaluates f in {0, step, ..., 1} for two channels, ordered by f, Pareto flags set.
/// step must lie in (0, 0.5] and divide 1.
std::vector<MomentPoint> sweep_curve(const ChannelProfile& i, const ChannelProfile& j, double step,
                                     const SweepOptions& opts = {});

/// Same as sweep_curve for an explicit list of f values (kept in the given order).
std::vector<MomentPoint> sweep_fractions(const ChannelProfile& i, const ChannelProfile& j,
                                         std::span<const double> f_values, const SweepOptions& opts = {});

/// Enumerates every fraction vector whose entries are multiples of resolution
/// (2 <= N <= 4), in lexicographic order, with Pareto flags set.
std::vector<MomentPoint> sweep_simplex(std::span<const ChannelProfile> profiles, double resolution,
                                       const SweepOptions& opts = {});

/// Number of lattice points sweep_simplex would evaluate.
std::size_t simplex_lattice_size(std::size_t channels, std::size_t divisions);

/// Sets pareto = true exactly on the points no other point dominates.
void mark_pareto(std::span<MomentPoint> points);

/// Non-dominated subset, sorted by mean ascending with strictly decreasing
/// variance; duplicate (mean, variance) pairs keep their first occurrence.
std::vector<MomentPoint> pareto_frontier(std::span<const MomentPoint> points);

/// Objective minimizer; ties go to the lexicographically smallest fraction vector.
MomentPoint select_fraction(std::span<const MomentPoint> points, const Objective& objective);

}  // namespace splitflow

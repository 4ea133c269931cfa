#include "splitflow/frontier.hpp"

#include "splitflow/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace splitflow {

namespace {

// Number of lattice divisions for a step that must divide 1.
std::size_t divisions_for(double step, double max_step) {
    if (!(step > 0.0 && step <= max_step)) {
        std::ostringstream msg;
        msg << "grid step must lie in (0, " << max_step << "] (got " << step << ")";
        throw DomainError(msg.str());
    }
    const double n = std::round(1.0 / step);
    if (std::abs(n * step - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "grid step " << step << " does not divide 1";
        throw DomainError(msg.str());
    }
    return static_cast<std::size_t>(n);
}

MomentPoint evaluate(std::span<const ChannelProfile> profiles, std::vector<double> fractions,
                     const QuadratureSettings& quad) {
    const auto model = PartitionedModel::make({profiles.begin(), profiles.end()}, fractions);
    CompletionMoments r;
    try {
        r = completion_moments(model, quad);
    } catch (const NumericError& e) {
        std::ostringstream msg;
        msg << e.what() << " at fractions [";
        for (std::size_t k = 0; k < fractions.size(); ++k) msg << (k ? ", " : "") << fractions[k];
        msg << "]";
        throw NumericError(msg.str(), e.estimate(), e.error_bound());
    }
    return MomentPoint{std::move(fractions), r.moments.mean, r.moments.variance, false};
}

// Fractions built from integer counts so every sweep constructs them identically.
std::vector<double> lattice_fractions(std::span<const std::size_t> counts, std::size_t divisions) {
    std::vector<double> out;
    out.reserve(counts.size());
    const double n = static_cast<double>(divisions);
    for (std::size_t c : counts) out.push_back(static_cast<double>(c) / n);
    return out;
}

}  // namespace

Objective Objective::mean_plus_k_sigma(double k) {
    if (!std::isfinite(k) || k < 0.0) throw DomainError("mean-plus-k-sigma needs a finite k >= 0");
    return Objective(Kind::MeanPlusKSigma, k);
}

Objective Objective::scalarized(double lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0) throw DomainError("scalarized objective needs a finite lambda >= 0");
    return Objective(Kind::Scalarized, lambda);
}

Objective Objective::parse(const std::string& text) {
    if (text == "min-mean") return min_mean();
    if (text == "min-variance") return min_variance();
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string head = text.substr(0, colon);
        const std::string tail = text.substr(colon + 1);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), value);
        if (ec == std::errc() && ptr == tail.data() + tail.size()) {
            if (head == "mean-plus-k-sigma") return mean_plus_k_sigma(value);
            if (head == "scalarized") return scalarized(value);
        }
    }
    throw DomainError("unknown objective '" + text +
                      "' (expected min-mean, min-variance, mean-plus-k-sigma:<k> or scalarized:<lambda>)");
}

double Objective::score(const MomentPoint& p) const {
    switch (kind_) {
        case Kind::MinMean: return p.mean;
        case Kind::MinVariance: return p.variance;
        case Kind::MeanPlusKSigma: return p.mean + param_ * std::sqrt(p.variance);
        case Kind::Scalarized: return p.mean + param_ * p.variance;
    }
    return p.mean;
}

std::vector<MomentPoint> sweep_curve(const ChannelProfile& i, const ChannelProfile& j, double step,
                                     const SweepOptions& opts) {
    const std::size_t n = divisions_for(step, 0.5);
    const ChannelProfile profiles[] = {i, j};
    std::vector<MomentPoint> points;
    points.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const std::size_t counts[] = {k, n - k};
        points.push_back(evaluate(profiles, lattice_fractions(counts, n), opts.quad));
    }
    mark_pareto(points);
    return points;
}

std::vector<MomentPoint> sweep_fractions(const ChannelProfile& i, const ChannelProfile& j,
                                         std::span<const double> f_values, const SweepOptions& opts) {
    if (f_values.empty()) throw DomainError("f grid is empty");
    const ChannelProfile profiles[] = {i, j};
    std::vector<MomentPoint> points;
    points.reserve(f_values.size());
    for (double f : f_values) {
        if (!(f >= 0.0 && f <= 1.0)) throw DomainError("f grid values must lie in [0, 1]");
        points.push_back(evaluate(profiles, {f, 1.0 - f}, opts.quad));
    }
    mark_pareto(points);
    return points;
}

std::size_t simplex_lattice_size(std::size_t channels, std::size_t divisions) {
    // C(divisions + channels - 1, channels - 1), saturating.
    const std::size_t k = channels - 1;
    long double c = 1.0L;
    for (std::size_t m = 1; m <= k; ++m) c = c * static_cast<long double>(divisions + m) / static_cast<long double>(m);
    if (c > 1e18L) return static_cast<std::size_t>(1e18);
    return static_cast<std::size_t>(std::llround(c));
}

std::vector<MomentPoint> sweep_simplex(std::span<const ChannelProfile> profiles, double resolution,
                                       const SweepOptions& opts) {
    const std::size_t channels = profiles.size();
    if (channels < 2 || channels > 4) {
        std::ostringstream msg;
        msg << "simplex sweeps support 2 to 4 channels (got " << channels << ")";
        if (channels > 4) throw ResourceError(msg.str());
        throw DomainError(msg.str());
    }
    const std::size_t n = divisions_for(resolution, 1.0);
    const std::size_t total = simplex_lattice_size(channels, n);
    if (total > opts.max_lattice_points) {
        std::ostringstream msg;
        msg << "simplex lattice has " << total << " points, above the cap of " << opts.max_lattice_points;
        throw ResourceError(msg.str());
    }

    std::vector<MomentPoint> points;
    points.reserve(total);
    std::vector<std::size_t> counts(channels, 0);
    // Lexicographic enumeration of compositions of n into `channels` parts.
    auto recurse = [&](auto&& self, std::size_t pos, std::size_t remaining) -> void {
        if (pos + 1 == channels) {
            counts[pos] = remaining;
            points.push_back(evaluate(profiles, lattice_fractions(counts, n), opts.quad));
            return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
            counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
    };
    recurse(recurse, 0, n);
    mark_pareto(points);
    return points;
}

void mark_pareto(std::span<MomentPoint> points) {
    // Sort indices by (mean, variance); a point is dominated iff an earlier
    // point in that order has variance <= its variance with one strict inequality.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].mean != points[b].mean) return points[a].mean < points[b].mean;
        return points[a].variance < points[b].variance;
    });
    double best_var = INFINITY;
    double best_mean = -INFINITY;
    for (std::size_t idx : order) {
        MomentPoint& p = points[idx];
        const bool dominated =
            p.variance > best_var || (p.variance == best_var && p.mean > best_mean);
        p.pareto = !dominated;
        if (p.variance < best_var || (p.variance == best_var && p.mean < best_mean)) {
            best_var = p.variance;
            best_mean = p.mean;
        }
    }
}

std::vector<MomentPoint> pareto_frontier(std::span<const MomentPoint> points) {
    if (points.empty()) throw DomainError("pareto_frontier needs at least one point");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].mean != points[b].mean) return points[a].mean < points[b].mean;
        return points[a].variance < points[b].variance;
    });
    // Walking by ascending mean, a point survives only if it strictly lowers the
    // best variance seen so far. This also drops repeated (mean, variance) pairs.
    std::vector<MomentPoint> out;
    double best_var = INFINITY;
    for (std::size_t idx : order) {
        if (points[idx].variance < best_var) {
            best_var = points[idx].variance;
            out.push_back(points[idx]);
            out.back().pareto = true;
        }
    }
    return out;
}

MomentPoint select_fraction(std::span<const MomentPoint> points, const Objective& objective) {
    if (points.empty()) throw DomainError("select_fraction needs at least one point");
    const MomentPoint* best = &points[0];
    double best_score = objective.score(*best);
    for (const MomentPoint& p : points.subspan(1)) {
        const double s = objective.score(p);
        if (s < best_score || (s == best_score && p.fractions < best->fractions)) {
            best = &p;
            best_score = s;
        }
    }
    return *best;
}

}  // namespace splitflow

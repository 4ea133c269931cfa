#include "splitflow/model.hpp"

#include "splitflow/error.hpp"
#include "splitflow/kernels.hpp"
#include "splitflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace splitflow {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kTruncationThreshold = 1e-6;

double std_normal_cdf(double u) { return 0.5 * std::erfc(-u * kInvSqrt2); }

double std_normal_pdf(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

double scaled_cdf(const ScaledProfile& p, double t) {
    if (p.point_mass()) return t >= 0.0 ? 1.0 : 0.0;
    if (p.sd == 0.0) return t >= p.mean ? 1.0 : 0.0;
    return std_normal_cdf((t - p.mean) / p.sd);
}

bool scaled_truncation_biased(const ScaledProfile& p) {
    return p.sd > 0.0 && std_normal_cdf(-p.mean / p.sd) > kTruncationThreshold;
}

}  // namespace

ChannelProfile ChannelProfile::make(double mu, double sigma) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || mu <= 0.0 || sigma <= 0.0) {
        std::ostringstream msg;
        msg << "channel profile requires mu > 0 and sigma > 0 (got mu=" << mu << ", sigma=" << sigma << ")";
        throw DomainError(msg.str());
    }
    return ChannelProfile(mu, sigma);
}

ChannelProfile ChannelProfile::limit(double mu) {
    if (!std::isfinite(mu) || mu <= 0.0) throw DomainError("limit profile requires mu > 0");
    return ChannelProfile(mu, 0.0);
}

bool ChannelProfile::truncation_biased() const noexcept {
    return sigma_ > 0.0 && std_normal_cdf(-mu_ / sigma_) > kTruncationThreshold;
}

ScaledProfile scale_profile(const ChannelProfile& profile, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        std::ostringstream msg;
        msg << "fraction must lie in [0, 1] (got " << fraction << ")";
        throw DomainError(msg.str());
    }
    return ScaledProfile{fraction * profile.mu(), fraction * profile.sigma(), fraction};
}

PartitionedModel PartitionedModel::make(std::vector<ChannelProfile> channels, std::vector<double> fractions) {
    if (channels.size() < 2) throw DomainError("a partitioned model needs at least two channels");
    if (channels.size() != fractions.size())
        throw DomainError("channel and fraction lists differ in length");
    double total = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) throw DomainError("every fraction must lie in [0, 1]");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "fractions must sum to 1 (sum=" << total << ")";
        throw DomainError(msg.str());
    }
    return PartitionedModel(std::move(channels), std::move(fractions));
}

PartitionedModel PartitionedModel::pair(const ChannelProfile& i, const ChannelProfile& j, double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("fraction must lie in [0, 1]");
    return make({i, j}, {f, 1.0 - f});
}

std::vector<ScaledProfile> PartitionedModel::scaled() const {
    std::vector<ScaledProfile> out;
    out.reserve(channels_.size());
    for (std::size_t k = 0; k < channels_.size(); ++k) out.push_back(scale_profile(channels_[k], fractions_[k]));
    return out;
}

std::vector<ScaledProfile> PartitionedModel::active() const {
    std::vector<ScaledProfile> out = scaled();
    std::erase_if(out, [](const ScaledProfile& p) { return p.point_mass(); });
    return out;
}

double joint_cdf(const PartitionedModel& model, double epsilon) {
    if (!(epsilon >= 0.0)) throw DomainError("joint_cdf requires epsilon >= 0");
    double p = 1.0;
    for (const ScaledProfile& s : model.active()) p *= scaled_cdf(s, epsilon);
    return p;
}

double joint_pdf(const PartitionedModel& model, double t) {
    if (!(t >= 0.0)) throw DomainError("joint_pdf requires t >= 0");
    const std::vector<ScaledProfile> scaled = model.scaled();
    const bool has_point_mass =
        std::any_of(scaled.begin(), scaled.end(), [](const ScaledProfile& s) { return s.point_mass(); });
    if (has_point_mass && t == 0.0)
        throw UnsupportedPointError("joint_pdf is undefined at t = 0 with a zero-fraction channel");

    std::vector<ScaledProfile> active = model.active();
    for (const ScaledProfile& s : active)
        if (s.sd == 0.0) throw UnsupportedPointError("joint_pdf is undefined for deterministic channels");

    std::vector<double> cdf(active.size());
    std::vector<double> pdf(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
        const double u = (t - active[k].mean) / active[k].sd;
        cdf[k] = std_normal_cdf(u);
        pdf[k] = std_normal_pdf(u) / active[k].sd;
    }
    double density = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
        double term = pdf[k];
        for (std::size_t m = 0; m < active.size(); ++m)
            if (m != k) term *= cdf[m];
        density += term;
    }
    return density;
}

double integration_cutoff(std::span<const ScaledProfile> active) {
    double top = 0.0;
    double var = 0.0;
    for (const ScaledProfile& s : active) {
        top = std::max(top, s.mean);
        var += s.sd * s.sd;
    }
    return top + 10.0 * std::sqrt(var);
}

CompletionMoments completion_moments(const PartitionedModel& model, const QuadratureSettings& quad) {
    if (!(quad.abs_tol > 0.0)) throw DomainError("quadrature tolerance must be positive");

    const std::vector<ScaledProfile> active = model.active();
    CompletionMoments out;
    out.truncation_biased = std::any_of(active.begin(), active.end(), scaled_truncation_biased);

    if (active.size() == 1) {
        out.degenerate = true;
        out.moments = {active[0].mean, active[0].sd * active[0].sd};
        return out;
    }

    std::vector<double> means;
    std::vector<double> sds;
    std::vector<double> breakpoints;
    for (const ScaledProfile& s : active) {
        means.push_back(s.mean);
        sds.push_back(s.sd);
        breakpoints.push_back(s.mean);
    }
    const kernels::KernelTable& k = kernels::active();
    const quad::BatchIntegrand survival = [&](std::span<const double> x, std::span<double> y) {
        k.survival(means, sds, x, y);
    };

    const double upper = integration_cutoff(active);
    const quad::MomentIntegrals r =
        quad::integrate_moments(survival, 0.0, upper, quad.abs_tol, quad.max_panels, breakpoints);

    const double mean = r.zeroth;
    const double second = 2.0 * r.first;
    out.mean_error = r.zeroth_error;
    out.second_moment_error = 2.0 * r.first_error;
    if (!r.converged) {
        std::ostringstream msg;
        msg << "survival-function quadrature did not reach tolerance " << quad.abs_tol << " within "
            << r.panels << " panels (mean error bound " << r.zeroth_error << ")";
        throw NumericError(msg.str(), mean, r.zeroth_error);
    }

    double variance = second - mean * mean;
    if (variance < 0.0) {
        variance = 0.0;
        out.variance_clamped = true;
    }
    out.moments = {mean, variance};
    return out;
}

double expected_completion(const PartitionedModel& model, const QuadratureSettings& quad) {
    return completion_moments(model, quad).moments.mean;
}

double completion_variance(const PartitionedModel& model, const QuadratureSettings& quad) {
    return completion_moments(model, quad).moments.variance;
}

MomentPair clark_moments(const ScaledProfile& a, const ScaledProfile& b) {
    if (!(a.sd > 0.0) || !(b.sd > 0.0))
        throw DomainError("clark_moments needs both standard deviations > 0; use the point-mass shortcut");
    const double theta = std::sqrt(a.sd * a.sd + b.sd * b.sd);
    const double alpha = (a.mean - b.mean) / theta;
    const double pa = std_normal_cdf(alpha);
    const double pb = std_normal_cdf(-alpha);
    const double dens = std_normal_pdf(alpha);
    const double mean = a.mean * pa + b.mean * pb + theta * dens;
    const double second = (a.mean * a.mean + a.sd * a.sd) * pa + (b.mean * b.mean + b.sd * b.sd) * pb +
                          (a.mean + b.mean) * theta * dens;
    return {mean, std::max(0.0, second - mean * mean)};
}

}  // namespace splitflow

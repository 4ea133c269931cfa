#pragma once

// Completion-time model for a workflow split across parallel channels.
//
// Each channel's completion time for the full workflow is Normal(mu, sigma^2).
// Assigning a fraction f of the workflow scales both parameters by f. The
// joint completion time is the maximum over channels, so its CDF is the
// product of the per-channel CDFs.

#include <cstddef>
#include <span>
#include <vector>

namespace splitflow {

/// Full-workflow completion-time statistics of one channel (time units > 0).
class ChannelProfile {
public:
    /// Throws DomainError unless mu > 0 and sigma > 0 (both finite).
    static ChannelProfile make(double mu, double sigma);

    /// Deterministic limit profile (sigma = 0). Sampling and quadrature accept
    /// it; joint_pdf and clark_moments reject it.
    static ChannelProfile limit(double mu);

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }
    bool deterministic() const noexcept { return sigma_ == 0.0; }

    /// Phi(-mu/sigma) > 1e-6: integrating from 0 drops noticeable mass.
    bool truncation_biased() const noexcept;

    friend bool operator==(const ChannelProfile&, const ChannelProfile&) = default;

private:
    ChannelProfile(double mu, double sigma) : mu_(mu), sigma_(sigma) {}

    double mu_;
    double sigma_;
};

/// A channel's distribution after assigning it a fraction of the workflow.
/// fraction == 0 is a point mass at t = 0.
struct ScaledProfile {
    double mean = 0.0;
    double sd = 0.0;
    double fraction = 0.0;

    bool point_mass() const noexcept { return fraction == 0.0; }
};

ScaledProfile scale_profile(const ChannelProfile& profile, double fraction);

/// Channel profiles plus the fractions assigned to them (workflow size normalized to 1).
class PartitionedModel {
public:
    /// Throws DomainError on length mismatch, fewer than 2 channels, fractions
    /// outside [0,1] or not summing to 1 within 1e-12.
    static PartitionedModel make(std::vector<ChannelProfile> channels, std::vector<double> fractions);

    /// Two channels with fractions {f, 1 - f}.
    static PartitionedModel pair(const ChannelProfile& i, const ChannelProfile& j, double f);

    std::span<const ChannelProfile> channels() const noexcept { return channels_; }
    std::span<const double> fractions() const noexcept { return fractions_; }
    std::size_t size() const noexcept { return channels_.size(); }

    /// Scaled profiles in channel order, point masses included.
    std::vector<ScaledProfile> scaled() const;

    /// Scaled profiles with point masses removed.
    std::vector<ScaledProfile> active() const;

private:
    PartitionedModel(std::vector<ChannelProfile> channels, std::vector<double> fractions)
        : channels_(std::move(channels)), fractions_(std::move(fractions)) {}

    std::vector<ChannelProfile> channels_;
    std::vector<double> fractions_;
};

struct MomentPair {
    double mean = 0.0;
    double variance = 0.0;
};

struct QuadratureSettings {
    double abs_tol = 1e-9;
    std::size_t max_panels = 20000;
};

/// Moments of the joint completion time with the diagnostics gathered while
/// computing them.
struct CompletionMoments {
    MomentPair moments;
    double mean_error = 0.0;          ///< quadrature error bound on the mean
    double second_moment_error = 0.0; ///< quadrature error bound on E[t^2]
    bool degenerate = false;          ///< single active channel, closed form used
    bool truncation_biased = false;   ///< some active channel has Phi(-m/s) > 1e-6
    bool variance_clamped = false;    ///< raw variance was negative and set to 0
};

/// P(t <= epsilon) = prod_k Phi((epsilon - f_k mu_k) / (f_k sigma_k)). epsilon >= 0.
double joint_cdf(const PartitionedModel& model, double epsilon);

/// d/dt of joint_cdf by the product rule. Throws UnsupportedPointError at t = 0
/// when the model has a point-mass channel, and for deterministic channels.
double joint_pdf(const PartitionedModel& model, double t);

/// Upper integration cutoff: max_k(f_k mu_k) + 10 sqrt(sum_k (f_k sigma_k)^2).
double integration_cutoff(std::span<const ScaledProfile> active);

/// Mean and variance of the joint completion time from the survival-function
/// integrals over [0, cutoff]. A single active channel returns its (mean, sd^2)
/// exactly. Throws NumericError when the quadrature does not converge.
CompletionMoments completion_moments(const PartitionedModel& model, const QuadratureSettings& quad = {});

double expected_completion(const PartitionedModel& model, const QuadratureSettings& quad = {});
double completion_variance(const PartitionedModel& model, const QuadratureSettings& quad = {});

/// Closed-form mean/variance of max(A, B) over the whole real line for two
/// independent Normals. Throws DomainError when either sd is 0.
MomentPair clark_moments(const ScaledProfile& a, const ScaledProfile& b);

}  // namespace splitflow

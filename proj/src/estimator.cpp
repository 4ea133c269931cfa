#include "splitflow/estimator.hpp"

#include "splitflow/error.hpp"
#include "splitflow/kernels.hpp"

#include <cmath>
#include <sstream>

namespace splitflow {

// Update and merge formulas after Pebay (2008), "Formulas for robust, one-pass
// parallel computation of covariances and arbitrary-order statistical moments".
void MomentAccumulator::add(double x) noexcept {
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ - 4.0 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
    m2_ += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& o) noexcept {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double delta = o.mean_ - mean_;
    const double d2 = delta * delta;
    const double d3 = d2 * delta;
    const double d4 = d2 * d2;

    const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) +
                      3.0 * delta * (na * o.m2_ - nb * m2_) / n;
    const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                      4.0 * delta * (na * o.m3_ - nb * m3_) / n;
    mean_ += delta * nb / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
    n_ += o.n_;
}

MomentAccumulator MomentAccumulator::from_batch(std::span<const double> xs) {
    MomentAccumulator acc;
    acc.n_ = xs.size();
    if (xs.empty()) return acc;
    const kernels::KernelTable& k = kernels::active();
    acc.mean_ = k.sum(xs) / static_cast<double>(xs.size());
    acc.m2_ = k.sum_sq_dev(xs, acc.mean_);
    for (double x : xs) {
        const double d = x - acc.mean_;
        const double d3 = d * d * d;
        acc.m3_ += d3;
        acc.m4_ += d3 * d;
    }
    return acc;
}

double MomentAccumulator::variance() const noexcept {
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double MomentAccumulator::skewness() const noexcept {
    if (m2_ <= 0.0) return std::nan("");
    return std::sqrt(static_cast<double>(n_)) * m3_ / std::pow(m2_, 1.5);
}

double MomentAccumulator::excess_kurtosis() const noexcept {
    if (m2_ <= 0.0) return std::nan("");
    return static_cast<double>(n_) * m4_ / (m2_ * m2_) - 3.0;
}

ChannelProfile FitReport::profile() const {
    if (std_dev == 0.0) return ChannelProfile::limit(mean);
    return ChannelProfile::make(mean, std_dev);
}

FitReport report_from(const MomentAccumulator& acc) {
    FitReport r;
    r.sample_count = acc.count();
    r.mean = acc.mean();
    r.std_dev = std::sqrt(acc.variance());
    r.skewness = acc.skewness();
    r.excess_kurtosis = acc.excess_kurtosis();
    // NaN statistics (zero spread) compare false and leave the flag unset.
    r.normality_flag = std::abs(r.skewness) < kSkewnessLimit && std::abs(r.excess_kurtosis) < kExcessKurtosisLimit;
    return r;
}

FitReport fit_profile(std::span<const double> samples) {
    if (samples.size() < 2) throw DomainError("fit_profile needs at least 2 samples");
    MomentAccumulator acc;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = samples[i];
        if (!std::isfinite(x) || x < 0.0) {
            std::ostringstream msg;
            msg << "sample " << i << " is negative or not finite (" << x << ")";
            throw DataError(msg.str());
        }
        acc.add(x);
    }
    return report_from(acc);
}

ChannelProfile rescale_to_full(const FitReport& report, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("rescale_to_full needs a fraction in (0, 1]");
    const double mu = report.mean / fraction;
    const double sigma = report.std_dev / fraction;
    if (sigma == 0.0) return ChannelProfile::limit(mu);
    return ChannelProfile::make(mu, sigma);
}

}  // namespace splitflow

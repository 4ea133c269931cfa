#pragma once

// Channel profiles fitted from observed completion times, with a moment-based
// check of the Normality assumption.

#include "splitflow/model.hpp"

#include <cstddef>
#include <span>

namespace splitflow {

/// Running central moments (count, mean, M2, M3, M4) with single-sample
/// updates and pairwise merging, so partial states from parallel ingestion
/// combine into the same result as one pass.
class MomentAccumulator {
public:
    void add(double x) noexcept;
    void merge(const MomentAccumulator& other) noexcept;

    /// Two-pass evaluation of the same statistics over a whole batch.
    static MomentAccumulator from_batch(std::span<const double> xs);

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double m2() const noexcept { return m2_; }
    double m3() const noexcept { return m3_; }
    double m4() const noexcept { return m4_; }

    /// Unbiased (n - 1) variance; 0 when count < 2.
    double variance() const noexcept;
    /// sqrt(n) M3 / M2^(3/2); NaN when M2 == 0.
    double skewness() const noexcept;
    /// n M4 / M2^2 - 3; NaN when M2 == 0.
    double excess_kurtosis() const noexcept;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
    double m4_ = 0.0;
};

struct FitReport {
    double mean = 0.0;
    double std_dev = 0.0;  ///< unbiased sample standard deviation
    std::size_t sample_count = 0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    bool normality_flag = false;

    /// The fitted ChannelProfile; a zero spread gives the deterministic limit
    /// profile. Throws DomainError when the mean is not positive.
    ChannelProfile profile() const;
};

inline constexpr double kSkewnessLimit = 0.5;
inline constexpr double kExcessKurtosisLimit = 1.0;

FitReport report_from(const MomentAccumulator& acc);

/// Throws DomainError for fewer than 2 samples and DataError for negative or
/// non-finite samples.
FitReport fit_profile(std::span<const double> samples);

/// Full-workflow profile from statistics measured at workload fraction f in (0, 1].
ChannelProfile rescale_to_full(const FitReport& report, double fraction);

}  // namespace splitflow

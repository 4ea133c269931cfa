#pragma once

// Data-parallel inner loops shared by the quadrature, Monte Carlo and
// least-squares code. Every kernel has a scalar reference implementation;
// an AVX2+FMA variant is selected at runtime when the CPU supports it.
//
// Selection can be forced with the environment variable SPLITFLOW_KERNELS
// ("scalar" or "avx2"); an unavailable request falls back to scalar.

#include <cstddef>
#include <span>
#include <string_view>

namespace splitflow::kernels {

struct KernelTable {
    std::string_view name;

    // out[i] = Phi((x[i] - mean) / sd). sd == 0 is a unit step at mean (Phi = 1 for x >= mean).
    void (*normal_cdf)(double mean, double sd, std::span<const double> x, std::span<double> out);

    // out[i] = 1 - prod_k Phi((x[i] - means[k]) / sds[k]); sds[k] == 0 as in normal_cdf.
    void (*survival)(std::span<const double> means, std::span<const double> sds,
                     std::span<const double> x, std::span<double> out);

    // out[i] = max_k columns[k][i]; with clamp, negative maxima become 0.
    // Returns the number of clamped entries.
    std::size_t (*row_max)(std::span<const double* const> columns, bool clamp,
                           std::span<double> out);

    double (*sum)(std::span<const double> x);

    // sum_i (x[i] - center)^2
    double (*sum_sq_dev)(std::span<const double> x, double center);

    double (*dot)(std::span<const double> a, std::span<const double> b);

    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table chosen for this process (resolved once).
const KernelTable& active();

}  // namespace splitflow::kernels

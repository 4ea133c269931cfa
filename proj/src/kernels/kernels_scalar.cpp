#include "kernels_impl.hpp"

#include <algorithm>
#include <cmath>

namespace splitflow::kernels {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

inline double phi_cdf(double mean, double sd, double x) {
    if (sd == 0.0) return x >= mean ? 1.0 : 0.0;
    return 0.5 * std::erfc(-((x - mean) / sd) * kInvSqrt2);
}

void normal_cdf(double mean, double sd, std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = phi_cdf(mean, sd, x[i]);
}

void survival(std::span<const double> means, std::span<const double> sds,
              std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (std::size_t k = 0; k < means.size(); ++k) p *= phi_cdf(means[k], sds[k], x[i]);
        out[i] = 1.0 - p;
    }
}

std::size_t row_max(std::span<const double* const> columns, bool clamp, std::span<double> out) {
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double m = columns[0][i];
        for (std::size_t k = 1; k < columns.size(); ++k) m = std::max(m, columns[k][i]);
        if (clamp && m < 0.0) {
            m = 0.0;
            ++clamped;
        }
        out[i] = m;
    }
    return clamped;
}

double sum(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

double sum_sq_dev(std::span<const double> x, double center) {
    double s = 0.0;
    for (double v : x) {
        const double d = v - center;
        s += d * d;
    }
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        "scalar", &normal_cdf, &survival, &row_max, &sum, &sum_sq_dev, &dot, &axpy,
    };
    return table;
}

}  // namespace splitflow::kernels

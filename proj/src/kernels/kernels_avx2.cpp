// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and must only be reached through avx2_table(), which checks the CPU first.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cmath>

namespace splitflow::kernels {

namespace {

#include "erfc_cheb.inc"

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr std::size_t kLanes = 4;

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x in [-708, 709]. Cody-Waite reduction, degree-13 Taylor
// polynomial on |r| <= ln2/2 (truncation < 1e-17 relative).
inline __m256d exp_pd(__m256d x) {
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, splat(1.4426950408889634074)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, splat(6.93147180369123816490e-01), x);
    r = _mm256_fnmadd_pd(n, splat(1.90821492927058770002e-10), r);

    constexpr double c[] = {
        1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
        1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,      1.0 / 720.0,
        1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,         0.5,
        1.0,                1.0,
    };
    __m256d p = splat(c[0]);
    for (std::size_t i = 1; i < std::size(c); ++i) p = _mm256_fmadd_pd(p, r, splat(c[i]));

    const __m128i ni = _mm256_cvtpd_epi32(n);
    __m256i bits = _mm256_cvtepi32_epi64(ni);
    bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
    bits = _mm256_slli_epi64(bits, 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// erfc(z) for z >= 0 via erfc(z) = t exp(-z^2 + g(2t - 1)), t = 2 / (2 + z).
// z^2 is split into its rounded value and the exact FMA residual so the
// large exponent does not lose precision.
inline __m256d erfc_nonneg(__m256d z) {
    const __m256d two = splat(2.0);
    const __m256d t = _mm256_div_pd(two, _mm256_add_pd(two, z));
    const __m256d x = _mm256_fmsub_pd(two, t, splat(1.0));
    const __m256d x2 = _mm256_add_pd(x, x);

    constexpr std::size_t n = std::size(kErfcCheb);
    __m256d b1 = _mm256_setzero_pd();
    __m256d b2 = _mm256_setzero_pd();
    for (std::size_t k = n - 1; k >= 1; --k) {
        const __m256d b0 = _mm256_add_pd(_mm256_fmsub_pd(x2, b1, b2), splat(kErfcCheb[k]));
        b2 = b1;
        b1 = b0;
    }
    const __m256d g = _mm256_sub_pd(_mm256_fmadd_pd(x, b1, splat(kErfcCheb[0])), b2);

    const __m256d zz = _mm256_mul_pd(z, z);
    const __m256d zz_err = _mm256_fmsub_pd(z, z, zz);
    const __m256d underflow = _mm256_cmp_pd(zz, splat(708.0), _CMP_GT_OQ);
    const __m256d zz_safe = _mm256_min_pd(zz, splat(708.0));
    const __m256d tail = _mm256_mul_pd(exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), zz_safe)),
                                       exp_pd(_mm256_sub_pd(g, zz_err)));
    const __m256d result = _mm256_mul_pd(t, tail);
    return _mm256_andnot_pd(underflow, result);
}

inline __m256d phi_cdf_pd(__m256d mean, __m256d sd, __m256d x) {
    const __m256d u = _mm256_div_pd(_mm256_sub_pd(x, mean), sd);
    const __m256d w = _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), u), splat(kInvSqrt2));
    const __m256d sign_mask = splat(-0.0);
    const __m256d a = _mm256_andnot_pd(sign_mask, w);
    const __m256d e = erfc_nonneg(a);
    const __m256d negative = _mm256_cmp_pd(w, _mm256_setzero_pd(), _CMP_LT_OQ);
    const __m256d full = _mm256_blendv_pd(e, _mm256_sub_pd(splat(2.0), e), negative);
    return _mm256_mul_pd(full, splat(0.5));
}

inline __m256d step_cdf_pd(__m256d mean, __m256d x) {
    return _mm256_and_pd(_mm256_cmp_pd(x, mean, _CMP_GE_OQ), splat(1.0));
}

// Tails go through a padded vector so both paths use the same approximation.
template <typename Fn>
inline void for_each_block(std::span<const double> x, std::span<double> out, Fn&& fn) {
    std::size_t i = 0;
    for (; i + kLanes <= x.size(); i += kLanes)
        _mm256_storeu_pd(out.data() + i, fn(_mm256_loadu_pd(x.data() + i)));
    if (i < x.size()) {
        alignas(32) double in[kLanes];
        alignas(32) double res[kLanes];
        const std::size_t rest = x.size() - i;
        std::fill(std::begin(in), std::end(in), x[i]);
        std::copy_n(x.data() + i, rest, in);
        _mm256_store_pd(res, fn(_mm256_load_pd(in)));
        std::copy_n(res, rest, out.data() + i);
    }
}

void normal_cdf(double mean, double sd, std::span<const double> x, std::span<double> out) {
    const __m256d m = splat(mean);
    if (sd == 0.0) {
        for_each_block(x, out, [&](__m256d v) { return step_cdf_pd(m, v); });
        return;
    }
    const __m256d s = splat(sd);
    for_each_block(x, out, [&](__m256d v) { return phi_cdf_pd(m, s, v); });
}

void survival(std::span<const double> means, std::span<const double> sds,
              std::span<const double> x, std::span<double> out) {
    for_each_block(x, out, [&](__m256d v) {
        __m256d p = splat(1.0);
        for (std::size_t k = 0; k < means.size(); ++k) {
            const __m256d m = splat(means[k]);
            const __m256d c = sds[k] == 0.0 ? step_cdf_pd(m, v) : phi_cdf_pd(m, splat(sds[k]), v);
            p = _mm256_mul_pd(p, c);
        }
        return _mm256_sub_pd(splat(1.0), p);
    });
}

std::size_t row_max(std::span<const double* const> columns, bool clamp, std::span<double> out) {
    const std::size_t n = out.size();
    const __m256d zero = _mm256_setzero_pd();
    std::size_t clamped = 0;
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        __m256d m = _mm256_loadu_pd(columns[0] + i);
        for (std::size_t k = 1; k < columns.size(); ++k)
            m = _mm256_max_pd(m, _mm256_loadu_pd(columns[k] + i));
        if (clamp) {
            const int neg = _mm256_movemask_pd(_mm256_cmp_pd(m, zero, _CMP_LT_OQ));
            clamped += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(neg)));
            m = _mm256_max_pd(m, zero);
        }
        _mm256_storeu_pd(out.data() + i, m);
    }
    for (; i < n; ++i) {
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
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 * kLanes <= x.size(); i += 2 * kLanes) {
        a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x.data() + i));
        a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x.data() + i + kLanes));
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < x.size(); ++i) s += x[i];
    return s;
}

double sum_sq_dev(std::span<const double> x, double center) {
    const __m256d c = splat(center);
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 * kLanes <= x.size(); i += 2 * kLanes) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), c);
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i + kLanes), c);
        a0 = _mm256_fmadd_pd(d0, d0, a0);
        a1 = _mm256_fmadd_pd(d1, d1, a1);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < x.size(); ++i) {
        const double d = x[i] - center;
        s += d * d;
    }
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 * kLanes <= a.size(); i += 2 * kLanes) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + kLanes),
                             _mm256_loadu_pd(b.data() + i + kLanes), a1);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    const __m256d a = splat(alpha);
    std::size_t i = 0;
    for (; i + kLanes <= x.size(); i += kLanes) {
        const __m256d r = _mm256_fmadd_pd(a, _mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i));
        _mm256_storeu_pd(y.data() + i, r);
    }
    for (; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

namespace detail {

const KernelTable& avx2_table_unchecked() {
    static const KernelTable table{
        "avx2", &normal_cdf, &survival, &row_max, &sum, &sum_sq_dev, &dot, &axpy,
    };
    return table;
}

}  // namespace detail

}  // namespace splitflow::kernels

#include "splitflow/kernels.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using splitflow::kernels::KernelTable;
using splitflow::test::close;
using splitflow::test::uniform_vector;

namespace {

const KernelTable& scalar() { return splitflow::kernels::scalar_table(); }

// Runs the body against every compiled-in variant other than scalar.
template <typename Fn>
void for_each_fast_variant(Fn&& fn) {
    if (const KernelTable* t = splitflow::kernels::avx2_table()) {
        CAPTURE(t->name);
        fn(*t);
    } else {
        MESSAGE("AVX2 variant unavailable on this host; equivalence checks skipped");
    }
}

}  // namespace

TEST_CASE("active table is one of the known variants") {
    const auto& a = splitflow::kernels::active();
    CHECK((a.name == "scalar" || a.name == "avx2"));
}

TEST_CASE("scalar normal_cdf reference values") {
    std::vector<double> x{30.0, 28.0, 36.0};
    std::vector<double> out(3);
    scalar().normal_cdf(30.0, 2.0, x, out);
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(0.15865525393145705).epsilon(1e-14));
    CHECK(out[2] == doctest::Approx(0.9986501019683699).epsilon(1e-14));
}

TEST_CASE("normal_cdf matches scalar across the full range") {
    for_each_fast_variant([](const KernelTable& fast) {
        std::mt19937_64 rng(11);
        for (std::size_t n = 0; n < 40; ++n) {
            // u from -40 to 40 standard deviations exercises both tails and the underflow cut
            auto x = uniform_vector(rng, n, -70.0, 90.0);
            std::vector<double> a(n), b(n);
            scalar().normal_cdf(10.0, 2.0, x, a);
            fast.normal_cdf(10.0, 2.0, x, b);
            for (std::size_t i = 0; i < n; ++i) {
                CAPTURE(x[i]);
                CHECK(close(a[i], b[i], 1e-300, 2e-13));
            }
        }
        // dense sweep through the body of the distribution
        std::vector<double> x(4001);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = -10.0 + 0.005 * static_cast<double>(i);
        std::vector<double> a(x.size()), b(x.size());
        scalar().normal_cdf(0.0, 1.0, x, a);
        fast.normal_cdf(0.0, 1.0, x, b);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CAPTURE(x[i]);
            CHECK(std::abs(a[i] - b[i]) <= 1e-15);
            CHECK(close(a[i], b[i], 0.0, 1e-13));
        }
    });
}

TEST_CASE("step channels (sd = 0) are unit steps") {
    std::vector<double> x{0.9, 1.0, 1.1};
    std::vector<double> out(3);
    scalar().normal_cdf(1.0, 0.0, x, out);
    CHECK(out == std::vector<double>{0.0, 1.0, 1.0});
    for_each_fast_variant([&](const KernelTable& fast) {
        std::vector<double> v(3);
        fast.normal_cdf(1.0, 0.0, x, v);
        CHECK(v == out);
    });
}

TEST_CASE("survival matches scalar for mixed channel sets") {
    for_each_fast_variant([](const KernelTable& fast) {
        std::mt19937_64 rng(5);
        for (int round = 0; round < 200; ++round) {
            const std::size_t channels = 1 + static_cast<std::size_t>(round % 4);
            auto means = uniform_vector(rng, channels, 0.1, 40.0);
            auto sds = uniform_vector(rng, channels, 0.01, 8.0);
            if (round % 7 == 0) sds[0] = 0.0;
            const std::size_t n = static_cast<std::size_t>(round % 33);
            auto x = uniform_vector(rng, n, 0.0, 80.0);
            std::vector<double> a(n), b(n);
            scalar().survival(means, sds, x, a);
            fast.survival(means, sds, x, b);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-14);
        }
    });
}

TEST_CASE("row_max agrees exactly including clamp counts") {
    std::mt19937_64 rng(3);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u}) {
        auto c0 = uniform_vector(rng, n, -3.0, 3.0);
        auto c1 = uniform_vector(rng, n, -3.0, 3.0);
        auto c2 = uniform_vector(rng, n, -3.0, 3.0);
        const std::vector<const double*> cols{c0.data(), c1.data(), c2.data()};
        std::vector<double> ref(n);
        const std::size_t ref_clamped = scalar().row_max(cols, true, ref);
        std::size_t expected_clamped = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::max({c0[i], c1[i], c2[i]});
            if (m < 0) ++expected_clamped;
            CHECK(ref[i] == std::max(m, 0.0));
        }
        CHECK(ref_clamped == expected_clamped);

        for_each_fast_variant([&](const KernelTable& fast) {
            std::vector<double> out(n);
            CHECK(fast.row_max(cols, true, out) == ref_clamped);
            CHECK(out == ref);
            std::vector<double> raw_a(n), raw_b(n);
            CHECK(fast.row_max(cols, false, raw_a) == 0);
            scalar().row_max(cols, false, raw_b);
            CHECK(raw_a == raw_b);
        });
    }
}

TEST_CASE("reductions and axpy agree within rounding") {
    std::mt19937_64 rng(9);
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 100u, 10007u}) {
        auto a = uniform_vector(rng, n, -5.0, 5.0);
        auto b = uniform_vector(rng, n, -5.0, 5.0);
        const double s = scalar().sum(a);
        const double d = scalar().dot(a, b);
        const double q = scalar().sum_sq_dev(a, 0.25);
        for_each_fast_variant([&](const KernelTable& fast) {
            const double scale = static_cast<double>(n + 1) * 25.0;
            CHECK(std::abs(fast.sum(a) - s) <= 1e-14 * scale);
            CHECK(std::abs(fast.dot(a, b) - d) <= 1e-14 * scale);
            CHECK(std::abs(fast.sum_sq_dev(a, 0.25) - q) <= 1e-14 * scale);
            std::vector<double> y1 = b, y2 = b;
            scalar().axpy(-1.5, a, y1);
            fast.axpy(-1.5, a, y2);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-14);
        });
    }
}

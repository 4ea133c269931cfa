#include "splitflow/error.hpp"
#include "splitflow/opt/experiment.hpp"
#include "splitflow/opt/least_squares.hpp"
#include "splitflow/rng.hpp"
#include "opt_oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

using namespace splitflow;
using namespace splitflow::opt;
using splitflow::test::conditioned_instance;
using splitflow::test::oracle_gap;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("shard sizes and split") {
    const auto p = make_synthetic(100, 3, 0.1, 1);
    const auto [a, b] = split_dataset(p.data, 0.3, 42);
    CHECK(a.rows() == 30);
    CHECK(b.rows() == 70);
    CHECK(shard_sizes(1001, 0.5) == std::pair<std::size_t, std::size_t>{501, 500});
    CHECK_THROWS_AS(split_dataset(p.data, 0.02, 42), DomainError);
    CHECK_THROWS_AS(split_dataset(p.data, 0.99, 42), DomainError);
    CHECK_THROWS_AS(shard_sizes(100, 1.5), DomainError);
}

TEST_CASE("split is disjoint, exhaustive and seeded") {
    const auto p = make_synthetic(200, 2, 0.1, 9);
    // Targets are continuous draws, so they identify rows.
    const auto [a, b] = split_dataset(p.data, 0.45, 7);
    std::multiset<double> seen(a.targets().begin(), a.targets().end());
    seen.insert(b.targets().begin(), b.targets().end());
    const std::multiset<double> all(p.data.targets().begin(), p.data.targets().end());
    CHECK(seen == all);

    const auto [a2, b2] = split_dataset(p.data, 0.45, 7);
    CHECK(std::equal(a.targets().begin(), a.targets().end(), a2.targets().begin(), a2.targets().end()));
    CHECK(std::equal(a.column(1).begin(), a.column(1).end(), a2.column(1).begin(), a2.column(1).end()));
    const auto [a3, b3] = split_dataset(p.data, 0.45, 8);
    CHECK_FALSE(std::equal(a.targets().begin(), a.targets().end(), a3.targets().begin(), a3.targets().end()));
}

TEST_CASE("dataset validation") {
    CHECK_THROWS_AS(Dataset::make(1, 2, {1, 2}, {1}), DomainError);
    CHECK_THROWS_AS(Dataset::make(2, 1, {1, NAN}, {1, 2}), DomainError);
    CHECK_THROWS_AS(Dataset::make(2, 1, {1, 2}, {1}), DomainError);
    CHECK_THROWS_AS(Dataset::from_rows({{1, 2}, {3}}, {1, 2}), DomainError);
}

TEST_CASE("solver: hand examples") {
    const auto line = Dataset::from_rows({{1.0}, {2.0}}, {2.0, 4.0});
    const auto r = solve_least_squares(line);
    REQUIRE(r.theta.size() == 1);
    CHECK(r.theta[0] == doctest::Approx(2.0).epsilon(1e-8));

    const auto zeros = Dataset::from_rows({{1.0, 0.5}, {2.0, -1.0}, {0.3, 0.7}}, {0.0, 0.0, 0.0});
    const auto z = solve_least_squares(zeros);
    CHECK(z.theta == std::vector<double>{0.0, 0.0});
    CHECK(z.iterations == 0);
}

TEST_CASE("solver: seeded synthetic recovers theta*") {
    const auto p = make_synthetic(10'000, 5, 0.01, 2024);
    const auto r = solve_least_squares(p.data);
    CHECK(relative_error(r.theta, p.theta_star) < 0.01);
    CHECK(oracle_gap(p.data, r.theta) <= 10 * 1e-8 / gram_eigen_range(p.data).first);
}

TEST_CASE("solver matches the normal equations on 100 conditioned instances") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    std::uniform_int_distribution<std::size_t> extra(0, 60);
    for (int c = 0; c < 100; ++c) {
        const std::size_t d = dim(rng);
        const std::size_t n = d + extra(rng) + 1;
        const Dataset data = conditioned_instance(rng, n, d, 1e3);
        const auto [lo, hi] = gram_eigen_range(data);
        REQUIRE(hi / lo <= 1e3 * (1 + 1e-9));
        const SolveResult r = solve_least_squares(data);
        CHECK(r.gradient_norm <= 1e-8);
        const double err = oracle_gap(data, r.theta);
        CHECK_MESSAGE(err <= 10 * 1e-8 / lo, "case ", c, " n=", n, " d=", d);
    }
}

TEST_CASE("solver errors") {
    // Second column is twice the first.
    const auto dup = Dataset::from_rows({{1, 2}, {2, 4}, {3, 6}}, {1, 2, 3});
    CHECK_THROWS_AS(solve_least_squares(dup), DataError);

    const auto p = make_synthetic(50, 3, 0.1, 5);
    SolverOptions opts;
    opts.max_iter = 2;
    try {
        solve_least_squares(p.data, opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.last_iterate().size() == 3);
    }
}

TEST_CASE("combine identities") {
    const std::vector<double> v{0.1, -3.7, 1e-300, 12345.678};
    for (double f : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 0.123456789}) CHECK(combine(v, v, f).theta == v);

    const std::vector<double> a{0.1, 0.2, -0.3};
    const std::vector<double> b{7.0, -1.0, 0.3};
    CHECK(combine(a, b, 1.0).theta == a);
    CHECK(combine(a, b, 0.0).theta == b);
    CHECK(combine(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 0.5).theta == std::vector<double>{0.5, 0.5});

    const auto c = combine(a, b, 0.25);
    CHECK(c.theta_i == a);
    CHECK(c.theta_j == b);
    CHECK(c.fraction == 0.25);

    CHECK_THROWS_AS(combine(a, std::vector<double>{1, 2}, 0.5), DomainError);
    CHECK_THROWS_AS(combine(a, b, -0.1), DomainError);
}

TEST_CASE("combine is order-symmetric under swap and f -> 1-f") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_real_distribution<double> uf(0.0, 1.0);
    for (int c = 0; c < 200; ++c) {
        std::vector<double> a(4);
        std::vector<double> b(4);
        for (double& x : a) x = u(rng);
        for (double& x : b) x = u(rng);
        // Dyadic f: 1 - f is exact, and so is the swapped result.
        const double f = std::ldexp(std::floor(uf(rng) * 1024.0), -10);
        const auto x = combine(a, b, f).theta;
        const auto y = combine(b, a, 1.0 - f).theta;
        for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(x[k] - y[k]) <= 4e-15 * (std::abs(a[k]) + std::abs(b[k])));

        const double g = uf(rng);
        const auto p = combine(a, b, g).theta;
        const auto q = combine(b, a, 1.0 - g).theta;
        for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-14 * (std::abs(a[k]) + std::abs(b[k])));
    }
}

TEST_CASE("combined solution quality at n = 1e4, f = 0.5") {
    const auto p = make_synthetic(10'000, 5, 0.1, 31);
    const auto full = solve_least_squares(p.data);
    const auto [a, b] = split_dataset(p.data, 0.5, 99);
    const auto c = combine(solve_least_squares(a).theta, solve_least_squares(b).theta, 0.5);
    CHECK(relative_error(c.theta, full.theta) < 0.05);
}

TEST_CASE("quality gap shrinks with n") {
    std::vector<double> gaps_small;
    std::vector<double> gaps_large;
    for (std::uint64_t s = 0; s < 9; ++s) {
        for (const std::size_t n : {std::size_t{1000}, std::size_t{10'000}}) {
            const auto p = make_synthetic(n, 5, 1.0, 100 + s);
            const auto full = solve_least_squares(p.data);
            const auto [a, b] = split_dataset(p.data, 0.3, s);
            const auto c = combine(solve_least_squares(a).theta, solve_least_squares(b).theta, 0.3);
            (n == 1000 ? gaps_small : gaps_large).push_back(relative_error(c.theta, full.theta));
        }
    }
    CHECK(median(gaps_large) < median(gaps_small));
}

TEST_CASE("jitter profile parsing") {
    const auto j = JitterProfile::parse("3:0.25");
    CHECK(j.mean_ms == 3.0);
    CHECK(j.sigma_ms == 0.25);
    CHECK_THROWS_AS(JitterProfile::parse("3"), DomainError);
    CHECK_THROWS_AS(JitterProfile::parse("3:-1"), DomainError);
    CHECK_THROWS_AS(JitterProfile::parse("a:1"), DomainError);
    CHECK_THROWS_AS(JitterProfile::parse("1:2x"), DomainError);
}

TEST_CASE("deterministic jitter: completion follows the larger shard's delay budget") {
    const auto p = make_synthetic(400, 3, 0.1, 3);
    OptExperimentConfig cfg;
    cfg.jitter_i = {5.0, 0.0};
    cfg.jitter_j = {5.0, 0.0};
    const auto full = solve_least_squares(p.data);
    std::vector<std::pair<double, double>> budget_and_time;
    for (const double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto rec = run_opt_trial(p.data, full.theta, f, 0, cfg);
        REQUIRE(rec.ok);
        CHECK(rec.rows_i + rec.rows_j == 400);
        const double budget_i = 5e6 * static_cast<double>(rec.rows_i) / 400.0 * static_cast<double>(rec.iterations_i);
        const double budget_j = 5e6 * static_cast<double>(rec.rows_j) / 400.0 * static_cast<double>(rec.iterations_j);
        const double bound = std::max(budget_i, budget_j);
        CHECK(static_cast<double>(rec.completion_ns) >= bound);
        budget_and_time.emplace_back(bound, static_cast<double>(rec.completion_ns));
        if (f == 0.0) CHECK(rec.iterations_i == 0);
        if (f == 1.0) CHECK(rec.iterations_j == 0);
    }
    // Clearly smaller budgets finish sooner.
    for (const auto& [ba, ta] : budget_and_time)
        for (const auto& [bb, tb] : budget_and_time)
            if (ba < 0.8 * bb) CHECK(ta < tb);
}

TEST_CASE("experiment bookkeeping and failures") {
    const auto p = make_synthetic(60, 4, 0.1, 8);
    OptExperimentConfig cfg;
    cfg.f_grid = {0.0, 0.05, 0.5, 1.0};
    cfg.trials_per_f = 3;
    cfg.seed = 12;
    const auto recs = run_opt_experiment(p.data, cfg);
    REQUIRE(recs.size() == 12);
    std::size_t failed = 0;
    for (std::size_t t = 0; t < recs.size(); ++t) {
        CHECK(recs[t].trial_id == t);
        // 0.05 * 60 = 3 rows < d = 4
        if (recs[t].fraction == 0.05) {
            CHECK_FALSE(recs[t].ok);
            ++failed;
        } else {
            CHECK(recs[t].ok);
            CHECK(recs[t].quality_gap >= 0.0);
        }
        if (recs[t].fraction == 0.0 || recs[t].fraction == 1.0) CHECK(recs[t].quality_gap <= 1e-6);
    }
    CHECK(failed == 3);

    const auto again = run_opt_experiment(p.data, cfg);
    for (std::size_t t = 0; t < recs.size(); ++t) {
        CHECK(again[t].fraction == recs[t].fraction);
        CHECK(again[t].quality_gap == recs[t].quality_gap);
    }
}

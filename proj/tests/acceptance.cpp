// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include "splitflow/error.hpp"
#include "splitflow/estimator.hpp"
#include "splitflow/frontier.hpp"
#include "splitflow/model.hpp"
#include "splitflow/montecarlo.hpp"
#include "splitflow/net/experiment.hpp"
#include "splitflow/opt/experiment.hpp"
#include "splitflow/rng.hpp"
#include "opt_oracle.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace splitflow;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            note << " [failed: " << what << "]";
        }
    }
};

const ChannelProfile kI = ChannelProfile::make(test::kMuI, test::kSigmaI);
const ChannelProfile kJ = ChannelProfile::make(test::kMuJ, test::kSigmaJ);

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::size_t argmin(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k] / n;
        my += y[k] / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Interior minimum strictly below both endpoints.
bool interior_minimum(const std::vector<double>& v) {
    const std::size_t m = argmin(v);
    return m > 0 && m + 1 < v.size() && v[m] < v.front() && v[m] < v.back();
}

void criterion1(Verdict& v) {
    double worst = 0.0;
    for (int k = 1; k <= 99; ++k) {
        const double f = k / 100.0;
        const auto model = PartitionedModel::pair(kI, kJ, f);
        const auto q = completion_moments(model).moments;
        const auto c = clark_moments(scale_profile(kI, f), scale_profile(kJ, 1.0 - f));
        worst = std::max({worst, rel_diff(q.mean, c.mean), rel_diff(q.variance, c.variance)});
    }
    v.note << "max relative deviation " << worst << " over 99 fractions";
    v.require(worst <= 1e-6, "relative deviation <= 1e-6");
}

void criterion2(Verdict& v) {
    const auto m0 = completion_moments(PartitionedModel::pair(kI, kJ, 0.0)).moments;
    const auto m1 = completion_moments(PartitionedModel::pair(kI, kJ, 1.0)).moments;
    v.note << "mu(0)=" << m0.mean << " var(0)=" << m0.variance << " mu(1)=" << m1.mean << " var(1)=" << m1.variance;
    v.require(m0.mean == 20.0 && m0.variance == 36.0 && m1.mean == 30.0 && m1.variance == 4.0, "exact endpoints");
}

void criterion3(Verdict& v) {
    const auto pts = sweep_curve(kI, kJ, 0.01);
    bool dominates_both = false;
    for (const auto& p : pts) dominates_both = dominates_both || (p.mean < 20.0 && p.variance < 4.0);
    const MomentPoint mm = select_fraction(pts, Objective::min_mean());
    const MomentPoint mv = select_fraction(pts, Objective::min_variance());
    const auto cm = clark_moments(scale_profile(kI, mm.f()), scale_profile(kJ, 1.0 - mm.f()));
    const auto cv = clark_moments(scale_profile(kI, mv.f()), scale_profile(kJ, 1.0 - mv.f()));
    v.note << "min mean " << mm.mean << " at f=" << mm.f() << " (Clark " << cm.mean << "), min variance "
           << mv.variance << " at f=" << mv.f() << " (Clark " << cv.variance << ")";
    v.require(dominates_both, "some f has mean < 20 and variance < 4");
    v.require(std::abs(mm.mean - cm.mean) <= 1e-3 && std::abs(mv.variance - cv.variance) <= 1e-3,
              "minima match Clark within 1e-3");
    v.require(std::abs(mm.f() - 0.40) <= 0.02 + 1e-12 && std::abs(mv.f() - 0.50) <= 0.02 + 1e-12,
              "minimizers within 0.02 of 0.40 and 0.50");
    v.require(mm.f() != mv.f(), "distinct minimizers");
}

void criterion4(Verdict& v) {
    const auto pts = sweep_curve(kI, kJ, 0.01);
    std::vector<double> brute;
    for (const auto& p : pts) {
        bool dominated = false;
        for (const auto& q : pts)
            dominated = dominated || (q.mean <= p.mean && q.variance <= p.variance &&
                                      (q.mean < p.mean || q.variance < p.variance));
        if (!dominated) brute.push_back(p.f());
    }
    std::vector<double> fast;
    for (const auto& p : pareto_frontier(pts)) fast.push_back(p.f());
    std::sort(fast.begin(), fast.end());
    std::vector<double> flagged;
    for (const auto& p : pts)
        if (p.pareto) flagged.push_back(p.f());

    const double f_mean = select_fraction(pts, Objective::min_mean()).f();
    const double f_var = select_fraction(pts, Objective::min_variance()).f();
    std::vector<double> expected;
    for (const auto& p : pts)
        if (p.f() >= std::min(f_mean, f_var) && p.f() <= std::max(f_mean, f_var)) expected.push_back(p.f());

    v.note << fast.size() << " frontier points, f in [" << (fast.empty() ? NAN : fast.front()) << ", "
           << (fast.empty() ? NAN : fast.back()) << "]";
    v.require(brute == fast, "pareto_frontier equals brute force");
    v.require(brute == flagged, "sweep pareto flags equal brute force");
    v.require(fast == expected, "frontier is the contiguous interval between the minimizers");
}

void criterion5(Verdict& v) {
    const auto start = Clock::now();
    bool ok = true;
    for (const double f : {0.2, 0.4, 0.5, 0.6, 0.8}) {
        const auto model = PartitionedModel::pair(kI, kJ, f);
        const auto exact = completion_moments(model).moments;
        SimConfig cfg;
        cfg.trials = 100'000;
        cfg.seed = 20240 + static_cast<std::uint64_t>(f * 100);
        const SimResult r = estimate_moments(model, cfg);
        const double z = (r.empirical_mean - exact.mean) / r.std_error_mean;
        const double dv = rel_diff(r.empirical_variance, exact.variance);
        v.note << "f=" << f << ": z=" << z << " dvar=" << dv << "; ";
        ok = ok && std::abs(z) <= 4.0 && dv <= 0.10;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    v.note << secs << " s";
    v.require(ok, "means within 4 stderr and variances within 10%");
    v.require(secs < 30.0, "runtime < 30 s");
}

void criterion6(Verdict& v) {
    const auto start = Clock::now();
    net::NetExperimentConfig cfg;
    // A: slow and steady, about 125 ms for the whole file. B (relayed): fast
    // and noisy, about 65 ms with 3 ms of jitter per chunk.
    cfg.channel_a = {6.0, 0.5, 8.0 * 1024 * 1024, false};
    cfg.channel_b = {4.0, 3.0, 64.0 * 1024 * 1024, true};
    cfg.payload_size = 1 << 20;
    cfg.trials_per_f = 50;
    cfg.seed = 6;
    const net::NetExperimentResult res = net::run_loopback_experiment(cfg);

    std::size_t integrity = 0;
    for (const auto& r : res.records) integrity += r.status == net::TrialStatus::Integrity;
    std::vector<double> means;
    for (const auto& s : res.per_f) means.push_back(s.fit ? s.fit->mean : NAN);

    // Full-workflow profiles from the endpoints: f = 1 is A alone, f = 0 is B alone.
    const FitReport& fit_a = *res.per_f.back().fit;
    const FitReport& fit_b = *res.per_f.front().fit;
    const ChannelProfile a = rescale_to_full(fit_a, 1.0);
    const ChannelProfile b = rescale_to_full(fit_b, 1.0);
    std::vector<double> predicted;
    for (const double f : cfg.f_grid) predicted.push_back(expected_completion(PartitionedModel::pair(a, b, f)));
    const double r = pearson(means, predicted);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();

    v.note << res.records.size() << " trials, " << res.failures << " failed (" << integrity
           << " integrity); means ms:";
    for (double m : means) v.note << " " << std::round(m * 1e4) / 10;
    v.note << "; pearson " << r << "; " << secs << " s";
    v.require(integrity == 0, "no integrity failures");
    v.require(interior_minimum(means), "interior minimum below both endpoints");
    v.require(r >= 0.95, "pearson >= 0.95");
    v.require(secs < 600.0, "runtime < 10 min");
}

void criterion7(Verdict& v) {
    const auto start = Clock::now();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::uniform_real_distribution<double> uf(0.0, 1.0);

    bool exact = true;
    for (int c = 0; c < 100; ++c) {
        std::vector<double> a(5);
        std::vector<double> b(5);
        for (double& x : a) x = u(rng);
        for (double& x : b) x = u(rng);
        const double f = uf(rng);
        exact = exact && opt::combine(a, a, f).theta == a && opt::combine(a, b, 1.0).theta == a &&
                opt::combine(a, b, 0.0).theta == b;
    }
    v.require(exact, "(a) combine identities exact");

    int oracle_ok = 0;
    std::uniform_int_distribution<std::size_t> dim(1, 8);
    std::uniform_int_distribution<std::size_t> extra(1, 200);
    for (int c = 0; c < 100; ++c) {
        const std::size_t d = dim(rng);
        const opt::Dataset data = test::conditioned_instance(rng, d + extra(rng), d, 1e3);
        const auto r = opt::solve_least_squares(data);
        oracle_ok += test::oracle_gap(data, r.theta) <= 10 * 1e-8 / opt::gram_eigen_range(data).first;
    }
    v.note << "(b) " << oracle_ok << "/100 within 10 tol/lambda_min; ";
    v.require(oracle_ok == 100, "(b) solver matches normal equations");

    const auto big = opt::make_synthetic(10'000, 5, 0.1, 70);
    const auto full = opt::solve_least_squares(big.data);
    const auto [si, sj] = opt::split_dataset(big.data, 0.5, 71);
    const auto comb =
        opt::combine(opt::solve_least_squares(si).theta, opt::solve_least_squares(sj).theta, 0.5);
    const double gap = opt::relative_error(comb.theta, full.theta);
    v.note << "(c) gap " << gap << "; ";
    v.require(gap < 0.05, "(c) combined error < 5%");

    // i: slow and steady; j: faster on average but noisy.
    const auto problem = opt::make_synthetic(2000, 5, 0.1, 72);
    opt::OptExperimentConfig cfg;
    cfg.jitter_i = {3.0, 0.3};
    cfg.jitter_j = {2.0, 3.0};
    cfg.trials_per_f = 40;
    cfg.seed = 73;
    const auto records = opt::run_opt_experiment(problem.data, cfg);
    std::vector<double> means;
    std::vector<double> vars;
    for (const double f : cfg.f_grid) {
        MomentAccumulator acc;
        for (const auto& r : records)
            if (r.ok && r.fraction == f) acc.add(static_cast<double>(r.completion_ns) * 1e-6);
        means.push_back(acc.mean());
        vars.push_back(acc.variance());
    }
    const std::size_t mm = argmin(means);
    const std::size_t mv = argmin(vars);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    v.note << "(d) mean min at f=" << cfg.f_grid[mm] << ", variance min at f=" << cfg.f_grid[mv] << "; means ms:";
    for (double m : means) v.note << " " << std::round(m * 10) / 10;
    v.note << "; " << secs << " s";
    v.require(interior_minimum(means), "(d) interior mean minimum");
    v.require(mm != mv, "(d) minimizers differ by a grid step");
    v.require(secs < 300.0, "runtime < 5 min");
}

// Each property over 100 or more randomized cases.
void criterion8(Verdict& v) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> mu(1.0, 50.0);
    std::uniform_real_distribution<double> cv(0.02, 0.3);
    std::uniform_real_distribution<double> uf(0.05, 0.95);
    const auto profile = [&] {
        const double m = mu(rng);
        return ChannelProfile::make(m, m * cv(rng));
    };
    const int cases = 100;
    int passed = 0;
    const auto property = [&](const char* name, const std::function<bool()>& one) {
        int ok = 0;
        for (int c = 0; c < cases; ++c) ok += one();
        v.note << name << " " << ok << "/" << cases << "; ";
        v.require(ok == cases, name);
        passed += ok == cases;
    };

    property("cdf-monotone", [&] {
        const auto m = PartitionedModel::pair(profile(), profile(), uf(rng));
        double prev = 0.0;
        for (int k = 0; k <= 200; ++k) {
            const double c = joint_cdf(m, k * 0.5);
            if (c < prev || c < 0.0 || c > 1.0) return false;
            prev = c;
        }
        return true;
    });
    property("swap-symmetry", [&] {
        const auto a = profile();
        const auto b = profile();
        const double f = uf(rng);
        const auto x = completion_moments(PartitionedModel::make({a, b}, {f, 1.0 - f})).moments;
        const auto y = completion_moments(PartitionedModel::make({b, a}, {1.0 - f, f})).moments;
        return rel_diff(x.mean, y.mean) <= 1e-12 && rel_diff(x.variance, y.variance) <= 1e-10;
    });
    property("time-scale", [&] {
        const auto a = profile();
        const auto b = profile();
        const double f = uf(rng);
        const double c = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
        const auto x = completion_moments(PartitionedModel::pair(a, b, f)).moments;
        const auto y = completion_moments(PartitionedModel::pair(ChannelProfile::make(c * a.mu(), c * a.sigma()),
                                                                 ChannelProfile::make(c * b.mu(), c * b.sigma()), f))
                           .moments;
        return rel_diff(y.mean, c * x.mean) <= 1e-8 && rel_diff(y.variance, c * c * x.variance) <= 1e-7;
    });
    property("pdf-finite-difference", [&] {
        const auto m = PartitionedModel::pair(profile(), profile(), uf(rng));
        const auto act = m.active();
        double scale = 0.0;
        for (const auto& s : act) scale = std::max(scale, s.mean + 3 * s.sd);
        const double t = std::uniform_real_distribution<double>(0.05, 1.0)(rng) * scale;
        const double h = 1e-5 * scale;
        const double fd = (joint_cdf(m, t + h) - joint_cdf(m, t - h)) / (2 * h);
        return std::abs(fd - joint_pdf(m, t)) <= 1e-6 / scale + 1e-5 * std::abs(fd);
    });
    property("pareto-idempotent", [&] {
        std::uniform_real_distribution<double> u(0.0, 10.0);
        std::vector<MomentPoint> pts(std::uniform_int_distribution<int>(1, 60)(rng));
        for (auto& p : pts) p = MomentPoint{{0.5, 0.5}, std::floor(u(rng)), std::floor(u(rng)), false};
        const auto once = pareto_frontier(pts);
        const auto twice = pareto_frontier(once);
        if (once.size() != twice.size()) return false;
        for (std::size_t k = 0; k < once.size(); ++k)
            if (once[k].mean != twice[k].mean || once[k].variance != twice[k].variance) return false;
        return true;
    });
    property("streaming-batch", [&] {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 2000)(rng);
        std::vector<double> xs(n);
        std::gamma_distribution<double> g(2.0, 3.0);
        for (double& x : xs) x = g(rng);
        const auto batch = MomentAccumulator::from_batch(xs);
        MomentAccumulator left;
        MomentAccumulator right;
        const std::size_t cut = std::uniform_int_distribution<std::size_t>(0, n)(rng);
        for (std::size_t k = 0; k < n; ++k) (k < cut ? left : right).add(xs[k]);
        left.merge(right);
        return left.count() == n && rel_diff(left.mean(), batch.mean()) <= 1e-12 &&
               rel_diff(left.variance(), batch.variance()) <= 1e-10 &&
               std::abs(left.skewness() - batch.skewness()) <= 1e-8 &&
               std::abs(left.excess_kurtosis() - batch.excess_kurtosis()) <= 1e-8;
    });
    property("simulation-reproducible", [&] {
        const auto m = PartitionedModel::pair(profile(), profile(), uf(rng));
        SimConfig cfg;
        cfg.trials = 5000;
        cfg.seed = rng();
        cfg.threads = 1;
        const SimResult a = estimate_moments(m, cfg);
        cfg.threads = 3;
        const SimResult b = estimate_moments(m, cfg);
        const SimResult c = estimate_moments(m, cfg);
        return a == b && b == c;
    });
    v.note << passed << "/7 suites";
}

}  // namespace

int main() {
    const std::vector<std::pair<int, void (*)(Verdict&)>> criteria{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8}};
    bool all = true;
    for (const auto& [id, run] : criteria) {
        Verdict v;
        const auto start = Clock::now();
        try {
            run(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.note << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        if (id == 1 && secs >= 5.0) v.require(false, "runtime < 5 s");
        std::printf("criterion %d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.note.str().c_str());
        std::fflush(stdout);
        all = all && v.pass;
    }
    return all ? 0 : 1;
}

#include "splitflow/opt/experiment.hpp"

#include "splitflow/error.hpp"
#include "splitflow/rng.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <optional>
#include <random>
#include <thread>

namespace splitflow::opt {

namespace {

using Clock = std::chrono::steady_clock;

struct ShardOutcome {
    std::optional<SolveResult> result;
    std::string error;
    std::size_t rows = 0;
};

// Empty shards finish immediately with a zero contribution.
ShardOutcome solve_shard(const Dataset& shard, std::size_t total_rows, const JitterProfile& jitter,
                         std::uint64_t seed, const SolverOptions& base) {
    ShardOutcome out;
    out.rows = shard.rows();
    if (shard.rows() == 0) {
        out.result = SolveResult{std::vector<double>(shard.cols(), 0.0), 0, 0.0};
        return out;
    }
    SplitMix64 gen(seed);
    std::normal_distribution<double> delay(jitter.mean_ms, jitter.sigma_ms);
    const double share = static_cast<double>(shard.rows()) / static_cast<double>(total_rows);
    SolverOptions opts = base;
    opts.on_iteration = [&] {
        const double ms = share * std::max(0.0, jitter.sigma_ms > 0.0 ? delay(gen) : jitter.mean_ms);
        if (ms > 0.0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
    };
    try {
        out.result = solve_least_squares(shard, opts);
    } catch (const Error& e) {
        out.error = e.what();
    }
    return out;
}

Dataset empty_like(const Dataset& data) {
    return data.select(std::span<const std::size_t>{});
}

}  // namespace

JitterProfile JitterProfile::parse(const std::string& text) {
    const auto colon = text.find(':');
    JitterProfile p;
    bool ok = colon != std::string::npos;
    if (ok) {
        const char* b = text.data();
        const char* e = b + text.size();
        const auto r1 = std::from_chars(b, b + colon, p.mean_ms);
        const auto r2 = std::from_chars(b + colon + 1, e, p.sigma_ms);
        ok = r1.ec == std::errc() && r1.ptr == b + colon && r2.ec == std::errc() && r2.ptr == e;
    }
    if (!ok || !std::isfinite(p.mean_ms) || !std::isfinite(p.sigma_ms) || p.mean_ms < 0.0 || p.sigma_ms < 0.0)
        throw DomainError("jitter profile must be mean_ms:sigma_ms with nonnegative values (got '" + text + "')");
    return p;
}

OptTrialRecord run_opt_trial(const Dataset& data, std::span<const double> full_solution, double fraction,
                             std::size_t trial_id, const OptExperimentConfig& config) {
    OptTrialRecord rec;
    rec.trial_id = trial_id;
    rec.fraction = fraction;

    const std::uint64_t trial_seed = derive_seed(config.seed, trial_id);
    const auto [ni, nj] = shard_sizes(data.rows(), fraction);
    rec.rows_i = ni;
    rec.rows_j = nj;

    // Shards of 0 rows are legal (endpoint); 1..d-1 rows cannot be solved.
    Dataset shard_i = empty_like(data);
    Dataset shard_j = empty_like(data);
    if (ni >= data.cols() && nj >= data.cols()) {
        std::tie(shard_i, shard_j) = split_dataset(data, fraction, derive_seed(trial_seed, 0));
    } else if (ni == 0 || nj == 0) {
        (ni == 0 ? shard_j : shard_i) = data;
    } else {
        rec.ok = false;
        rec.error = "shard smaller than the feature dimension";
        return rec;
    }

    ShardOutcome out_i;
    ShardOutcome out_j;
    const auto start = Clock::now();
    {
        std::jthread ti([&] {
            out_i = solve_shard(shard_i, data.rows(), config.jitter_i, derive_seed(trial_seed, 1), config.solver);
        });
        std::jthread tj([&] {
            out_j = solve_shard(shard_j, data.rows(), config.jitter_j, derive_seed(trial_seed, 2), config.solver);
        });
    }
    if (!out_i.result || !out_j.result) {
        rec.ok = false;
        rec.error = !out_i.result ? out_i.error : out_j.error;
        return rec;
    }
    const CombinedSolution combined = combine(out_i.result->theta, out_j.result->theta, fraction);
    const auto end = Clock::now();

    rec.completion_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(end - start).count();
    rec.iterations_i = out_i.result->iterations;
    rec.iterations_j = out_j.result->iterations;
    rec.quality_gap = relative_error(combined.theta, full_solution);
    return rec;
}

std::vector<OptTrialRecord> run_opt_experiment(const Dataset& data, const OptExperimentConfig& config) {
    const std::vector<double> order =
        trial_schedule(config.f_grid, config.trials_per_f, config.seed, config.randomize_order);
    const SolveResult full = solve_least_squares(data, config.solver);
    std::vector<OptTrialRecord> records;
    records.reserve(order.size());
    for (std::size_t t = 0; t < order.size(); ++t)
        records.push_back(run_opt_trial(data, full.theta, order[t], t, config));
    return records;
}

}  // namespace splitflow::opt

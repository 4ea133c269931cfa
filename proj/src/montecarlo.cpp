#include "splitflow/montecarlo.hpp"

#include "splitflow/error.hpp"
#include "splitflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

namespace splitflow {

namespace {

constexpr std::size_t kBlock = 4096;

struct BlockMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t clamped = 0;
};

// Chan et al. pairwise combination; applied in block order for determinism.
BlockMoments merge(const BlockMoments& a, const BlockMoments& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    BlockMoments out;
    out.count = a.count + b.count;
    const double n = static_cast<double>(out.count);
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * (static_cast<double>(b.count) / n);
    out.m2 = a.m2 + b.m2 + delta * delta * (static_cast<double>(a.count) * static_cast<double>(b.count) / n);
    out.clamped = a.clamped + b.clamped;
    return out;
}

class BlockRunner {
public:
    BlockRunner(const PartitionedModel& model, const SimConfig& config)
        : scaled_(model.scaled()), config_(config), columns_(scaled_.size(), std::vector<double>(kBlock)),
          values_(kBlock) {
        for (auto& c : columns_) column_ptrs_.push_back(c.data());
    }

    BlockMoments run(std::size_t first, std::size_t count) {
        for (std::size_t t = 0; t < count; ++t) {
            SplitMix64 gen(derive_seed(config_.seed, first + t));
            std::normal_distribution<double> z(0.0, 1.0);
            for (std::size_t k = 0; k < scaled_.size(); ++k)
                columns_[k][t] = scaled_[k].mean + scaled_[k].sd * z(gen);
        }
        const kernels::KernelTable& kt = kernels::active();
        const std::span<double> out(values_.data(), count);
        BlockMoments b;
        b.count = count;
        b.clamped = kt.row_max(column_ptrs_, config_.clamp_negative, out);
        b.mean = kt.sum(out) / static_cast<double>(count);
        b.m2 = kt.sum_sq_dev(out, b.mean);
        return b;
    }

private:
    std::vector<ScaledProfile> scaled_;
    SimConfig config_;
    std::vector<std::vector<double>> columns_;
    std::vector<const double*> column_ptrs_;
    std::vector<double> values_;
};

}  // namespace

SimResult estimate_moments(const PartitionedModel& model, const SimConfig& config) {
    if (config.trials < 1) throw DomainError("simulation needs at least one trial");

    const std::size_t blocks = (config.trials + kBlock - 1) / kBlock;
    std::vector<BlockMoments> results(blocks);
    const auto run_range = [&](std::size_t begin, std::size_t stride) {
        BlockRunner runner(model, config);
        for (std::size_t b = begin; b < blocks; b += stride) {
            const std::size_t first = b * kBlock;
            results[b] = runner.run(first, std::min(kBlock, config.trials - first));
        }
    };

    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
    if (threads <= 1) {
        run_range(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run_range, w, threads);
    }

    BlockMoments total;
    for (const BlockMoments& b : results) total = merge(total, b);

    SimResult r;
    r.trials = total.count;
    r.clamped_count = total.clamped;
    r.empirical_mean = total.mean;
    if (total.count < 2) {
        r.variance_defined = false;
        r.empirical_variance = 0.0;
        r.std_error_mean = 0.0;
    } else {
        r.empirical_variance = total.m2 / static_cast<double>(total.count - 1);
        r.std_error_mean = std::sqrt(r.empirical_variance / static_cast<double>(total.count));
    }
    return r;
}

}  // namespace splitflow

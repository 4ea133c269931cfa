#include "splitflow/opt/least_squares.hpp"

#include "splitflow/error.hpp"
#include "splitflow/kernels.hpp"
#include "splitflow/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace splitflow::opt {

namespace {

constexpr double kRankTolerance = 1e-12;

// r = X theta - y
void residual(const Dataset& data, std::span<const double> theta, std::span<double> r) {
    const kernels::KernelTable& k = kernels::active();
    const auto y = data.targets();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = -y[i];
    for (std::size_t j = 0; j < data.cols(); ++j) k.axpy(theta[j], data.column(j), r);
}

double norm(std::span<const double> v) {
    return std::sqrt(kernels::active().dot(v, v));
}

}  // namespace

Dataset Dataset::make(std::size_t rows, std::size_t cols, std::vector<double> column_major,
                      std::vector<double> targets) {
    if (cols < 1 || rows < cols) {
        std::ostringstream msg;
        msg << "dataset needs n >= d >= 1 (got n=" << rows << ", d=" << cols << ")";
        throw DomainError(msg.str());
    }
    if (column_major.size() != rows * cols || targets.size() != rows)
        throw DomainError("dataset storage does not match its dimensions");
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(column_major.begin(), column_major.end(), finite) ||
        !std::all_of(targets.begin(), targets.end(), finite))
        throw DomainError("dataset entries must be finite");
    return Dataset(rows, cols, std::move(column_major), std::move(targets));
}

Dataset Dataset::from_rows(const std::vector<std::vector<double>>& rows, std::vector<double> targets) {
    const std::size_t n = rows.size();
    const std::size_t d = n ? rows.front().size() : 0;
    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != d) throw DomainError("ragged feature rows");
        for (std::size_t j = 0; j < d; ++j) data[j * n + i] = rows[i][j];
    }
    return make(n, d, std::move(data), std::move(targets));
}

Dataset Dataset::select(std::span<const std::size_t> row_indices) const {
    const std::size_t m = row_indices.size();
    std::vector<double> data(m * cols_);
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t src = row_indices[i];
        for (std::size_t j = 0; j < cols_; ++j) data[j * m + i] = data_[j * rows_ + src];
        y[i] = targets_[src];
    }
    return Dataset(m, cols_, std::move(data), std::move(y));
}

SyntheticProblem make_synthetic(std::size_t n, std::size_t d, double noise, std::uint64_t seed) {
    SplitMix64 gen(derive_seed(seed, 0xDA7A));
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> theta(d);
    for (double& t : theta) t = z(gen);
    std::vector<double> data(n * d);
    for (double& v : data) v = z(gen);
    std::vector<double> y(n, 0.0);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < n; ++i) y[i] += data[j * n + i] * theta[j];
    for (double& v : y) v += noise * z(gen);
    return {Dataset::make(n, d, std::move(data), std::move(y)), std::move(theta)};
}

std::pair<std::size_t, std::size_t> shard_sizes(std::size_t rows, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw DomainError("fraction must lie in [0, 1]");
    const auto a = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows) + 0.5));
    return {std::min(a, rows), rows - std::min(a, rows)};
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed) {
    const auto [ni, nj] = shard_sizes(data.rows(), fraction);
    if (ni < data.cols() || nj < data.cols()) {
        std::ostringstream msg;
        msg << "split at f=" << fraction << " gives shards of " << ni << " and " << nj << " rows; each needs at least "
            << data.cols();
        throw DomainError(msg.str());
    }
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 gen(seed);
    std::shuffle(order.begin(), order.end(), gen);
    const std::span<const std::size_t> all(order);
    return {data.select(all.first(ni)), data.select(all.subspan(ni))};
}

std::pair<double, double> gram_eigen_range(const Dataset& data) {
    const std::size_t d = data.cols();
    const kernels::KernelTable& k = kernels::active();
    Eigen::MatrixXd gram(d, d);
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            const double v = k.dot(data.column(a), data.column(b)) * inv_n;
            gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
            gram(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
        }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

SolveResult solve_least_squares(const Dataset& data, const SolverOptions& options) {
    const auto [lo, hi] = gram_eigen_range(data);
    if (!(hi > 0.0) || lo <= kRankTolerance * hi)
        throw DataError("design matrix is rank deficient or too ill-conditioned for the solver");

    const kernels::KernelTable& k = kernels::active();
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> theta(d, 0.0);
    std::vector<double> grad(d);
    std::vector<double> r(n);
    std::vector<double> xg(n);

    residual(data, theta, r);
    double step = 1.0;

    for (std::size_t iter = 0;; ++iter) {
        for (std::size_t j = 0; j < d; ++j) grad[j] = k.dot(data.column(j), r) * inv_n;
        const double gnorm = norm(grad);
        if (gnorm <= options.tol) return {theta, iter, gnorm};
        if (iter == options.max_iter) {
            std::ostringstream msg;
            msg << "gradient descent stopped after " << iter << " iterations with gradient norm " << gnorm;
            throw ConvergenceError(msg.str(), theta);
        }

        // Along -g the objective drops by a g2 - a^2 |Xg|^2 / 2n exactly, so
        // the Armijo test is done on that expression rather than on two
        // nearly equal objective values.
        std::fill(xg.begin(), xg.end(), 0.0);
        for (std::size_t j = 0; j < d; ++j) k.axpy(grad[j], data.column(j), xg);
        const double g2 = gnorm * gnorm;
        const double curvature = 0.5 * inv_n * k.dot(xg, xg);
        while (step * curvature > (1.0 - options.armijo) * g2) {
            step *= options.shrink;
            if (step < 1e-300) throw ConvergenceError("line search step underflowed", theta);
        }
        for (std::size_t j = 0; j < d; ++j) theta[j] -= step * grad[j];
        residual(data, theta, r);
        step = std::min(step * 2.0, 1e6);
        if (options.on_iteration) options.on_iteration();
    }
}

CombinedSolution combine(std::span<const double> theta_i, std::span<const double> theta_j, double fraction) {
    if (theta_i.size() != theta_j.size()) throw DomainError("combine needs vectors of equal dimension");
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw DomainError("fraction must lie in [0, 1]");
    CombinedSolution out{{theta_i.begin(), theta_i.end()}, {theta_j.begin(), theta_j.end()}, {}, fraction};
    out.theta.resize(theta_i.size());
    // std::lerp is exact at f = 0, f = 1 and when both inputs agree.
    for (std::size_t k = 0; k < theta_i.size(); ++k) out.theta[k] = std::lerp(theta_j[k], theta_i[k], fraction);
    return out;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += (a[k] - b[k]) * (a[k] - b[k]);
        den += b[k] * b[k];
    }
    return std::sqrt(num) / std::sqrt(den);
}

}  // namespace splitflow::opt

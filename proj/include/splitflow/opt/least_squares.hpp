#pragma once

// Least-squares data, the first-order solver, and the split/combine steps of
// the parallel optimization experiment.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace splitflow::opt {

/// n x d design matrix (stored column-major) and n targets.
class Dataset {
public:
    /// Throws DomainError unless n >= d >= 1, sizes match and every entry is finite.
    static Dataset make(std::size_t rows, std::size_t cols, std::vector<double> column_major,
                        std::vector<double> targets);
    static Dataset from_rows(const std::vector<std::vector<double>>& rows, std::vector<double> targets);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> column(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> targets() const noexcept { return targets_; }

    /// Rows picked in the given order; may have fewer rows than columns.
    Dataset select(std::span<const std::size_t> row_indices) const;

private:
    Dataset(std::size_t rows, std::size_t cols, std::vector<double> data, std::vector<double> targets)
        : rows_(rows), cols_(cols), data_(std::move(data)), targets_(std::move(targets)) {}

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
    std::vector<double> targets_;
};

/// y = X theta* + N(0, noise^2) with i.i.d. standard Normal features and theta* ~ N(0, I).
struct SyntheticProblem {
    Dataset data;
    std::vector<double> theta_star;
};
SyntheticProblem make_synthetic(std::size_t n, std::size_t d, double noise, std::uint64_t seed);

/// Rows shuffled by seed, first round-half-up(f n) rows to shard i.
/// Throws DomainError when either shard would have fewer than d rows.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed);

/// Shard sizes used by split_dataset: (round-half-up(f n), n - that).
std::pair<std::size_t, std::size_t> shard_sizes(std::size_t rows, double fraction);

struct SolverOptions {
    double tol = 1e-8;                 ///< gradient-norm stopping threshold
    std::size_t max_iter = 100'000;
    double armijo = 1e-4;              ///< sufficient-decrease constant
    double shrink = 0.5;               ///< backtracking factor
    std::function<void()> on_iteration; ///< called once per accepted step
};

struct SolveResult {
    std::vector<double> theta;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
};

/// Minimizes (1 / 2n) ||X theta - y||^2 by gradient descent with Armijo
/// backtracking, starting from theta = 0. Throws DataError for a rank-deficient
/// design and ConvergenceError (with the last iterate) after max_iter steps.
SolveResult solve_least_squares(const Dataset& data, const SolverOptions& options = {});

/// Smallest and largest eigenvalue of X^T X / n.
std::pair<double, double> gram_eigen_range(const Dataset& data);

struct CombinedSolution {
    std::vector<double> theta_i;
    std::vector<double> theta_j;
    std::vector<double> theta;
    double fraction = 0.0;
};

/// theta = f theta_i + (1 - f) theta_j. Throws DomainError on dimension mismatch
/// or f outside [0, 1].
CombinedSolution combine(std::span<const double> theta_i, std::span<const double> theta_j, double fraction);

/// ||a - b|| / ||b||
double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace splitflow::opt

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace splitflow {

/// Execution order for an experiment: every grid value repeated trials_per_f
/// times, shuffled with a generator seeded by `seed` when randomize is set.
/// Throws DomainError for an empty grid or values outside [0, 1].
std::vector<double> trial_schedule(std::span<const double> grid, std::size_t trials_per_f, std::uint64_t seed,
                                   bool randomize);

/// Grid {0, step, ..., 1}; step must divide 1.
std::vector<double> uniform_grid(double step);

}  // namespace splitflow

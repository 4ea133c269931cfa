#include "splitflow/schedule.hpp"

#include "splitflow/error.hpp"
#include "splitflow/rng.hpp"

#include <algorithm>
#include <cmath>

namespace splitflow {

std::vector<double> trial_schedule(std::span<const double> grid, std::size_t trials_per_f, std::uint64_t seed,
                                   bool randomize) {
    if (grid.empty()) throw DomainError("f grid is empty");
    for (double f : grid)
        if (!(f >= 0.0 && f <= 1.0)) throw DomainError("f grid values must lie in [0, 1]");
    std::vector<double> order;
    order.reserve(grid.size() * trials_per_f);
    for (double f : grid)
        for (std::size_t t = 0; t < trials_per_f; ++t) order.push_back(f);
    if (randomize) {
        SplitMix64 gen(derive_seed(seed, 0x5C4ED));
        std::shuffle(order.begin(), order.end(), gen);
    }
    return order;
}

std::vector<double> uniform_grid(double step) {
    if (!(step > 0.0 && step <= 1.0)) throw DomainError("grid step must lie in (0, 1]");
    const double n = std::round(1.0 / step);
    if (std::abs(n * step - 1.0) > 1e-9) throw DomainError("grid step does not divide 1");
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t k = 0; k <= count; ++k) grid.push_back(static_cast<double>(k) / n);
    return grid;
}

}  // namespace splitflow

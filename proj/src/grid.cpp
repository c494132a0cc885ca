#include "optexec/grid.hpp"

#include <algorithm>
#include <cmath>

#include "optexec/errors.hpp"

namespace optexec {

namespace {

// ceil() that ignores rounding noise right above an integer.
int lattice_ceil(double ratio) {
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, std::abs(nearest))) {
        return static_cast<int>(nearest);
    }
    return static_cast<int>(std::ceil(ratio));
}

}  // namespace

Discretization build_grid(const Model& model) {
    const auto& p = model.params();
    Discretization grid;
    grid.n_t = model.time_steps();
    grid.n_x = model.inventory_units();
    grid.delta_t = p.delta_t;
    grid.delta_x = p.delta_x;
    grid.delta_xi = p.delta_Xi;

    grid.impact_steps.resize(static_cast<std::size_t>(grid.n_x) + 1);
    for (int u = 0; u <= grid.n_x; ++u) {
        const double steps = model.impact(model.shares(u)) / p.delta_Xi;
        if (steps > 1e9) throw ConfigError("impact(x0) / delta_Xi is too large for the impact grid");
        grid.impact_steps[static_cast<std::size_t>(u)] = lattice_ceil(steps);
    }

    // Unbounded knapsack over sell sequences: best[u] is the largest impact
    // index reachable by selling u units in any number of market orders.
    auto& best = grid.max_cumulative_steps;
    best.assign(static_cast<std::size_t>(grid.n_x) + 1, 0);
    for (int u = 1; u <= grid.n_x; ++u) {
        int m = 0;
        for (int z = 1; z <= u; ++z) {
            m = std::max(m, best[static_cast<std::size_t>(u - z)] + grid.impact_steps[static_cast<std::size_t>(z)]);
        }
        best[static_cast<std::size_t>(u)] = m;
    }

    grid.n_xi = best.back();
    grid.xi_max = grid.n_xi * p.delta_Xi;
    return grid;
}

}  // namespace optexec

#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

#include "optexec/model.hpp"

namespace optexec {

/// Time x inventory x impact lattice. Inventory index i_x runs over
/// 0..n_x (x = i_x * delta_x), impact index i_xi over 0..n_xi
/// (xi = i_xi * delta_xi), time index k over 0..n_t.
struct Discretization {
    int n_t = 0;
    int n_x = 0;
    int n_xi = 0;
    double xi_max = 0.0;
    double delta_t = 0.0;
    double delta_x = 0.0;
    double delta_xi = 0.0;
    /// impact_steps[u] = ceil(impact(u * delta_x) / delta_xi) for u in 0..n_x.
    std::vector<int> impact_steps;

    double t(int k) const noexcept { return k * delta_t; }
    double x(int i_x) const noexcept { return i_x * delta_x; }
    double xi(int i_xi) const noexcept { return i_xi * delta_xi; }

    std::size_t cells() const noexcept {
        return static_cast<std::size_t>(n_x + 1) * static_cast<std::size_t>(n_xi + 1);
    }
    std::size_t index(int i_x, int i_xi) const noexcept {
        return static_cast<std::size_t>(i_x) * static_cast<std::size_t>(n_xi + 1) +
               static_cast<std::size_t>(i_xi);
    }

    /// Impact index reached from i_xi after selling `units`; clamped to n_xi.
    int impact_target(int i_xi, int units) const noexcept {
        const int target = i_xi + impact_steps[static_cast<std::size_t>(units)];
        return target < n_xi ? target : n_xi;
    }

    /// Largest reachable impact index at inventory i_x when starting from
    /// (n_x, 0) with no recovery.
    int reachable_xi(int i_x) const noexcept { return max_cumulative_steps[static_cast<std::size_t>(n_x - i_x)]; }

    /// max_cumulative_steps[u]: largest total impact index produced by any
    /// sequence of market orders totalling u units.
    std::vector<int> max_cumulative_steps;
};

/// Builds the lattice. n_xi is the largest impact index any sell sequence
/// can reach, so reachable states never leave the grid. For theta2 >= 1 and
/// impact values on the delta_Xi lattice this is impact(x0) / delta_Xi; for
/// theta2 < 1 it is the one-unit-at-a-time worst case.
Discretization build_grid(const Model& model);

/// One time slice of the reduced value phi over the (i_x, i_xi) rectangle.
class ValueSurface {
public:
    ValueSurface() = default;
    ValueSurface(int n_x, int n_xi, int k, double fill = 0.0)
        : n_x_(n_x), n_xi_(n_xi), k_(k),
          values_(static_cast<std::size_t>(n_x + 1) * static_cast<std::size_t>(n_xi + 1), fill) {}

    int n_x() const noexcept { return n_x_; }
    int n_xi() const noexcept { return n_xi_; }
    int k() const noexcept { return k_; }
    void set_k(int k) noexcept { k_ = k; }

    double operator()(int i_x, int i_xi) const noexcept {
        assert(i_x >= 0 && i_x <= n_x_ && i_xi >= 0 && i_xi <= n_xi_);
        return values_[offset(i_x, i_xi)];
    }
    double& operator()(int i_x, int i_xi) noexcept {
        assert(i_x >= 0 && i_x <= n_x_ && i_xi >= 0 && i_xi <= n_xi_);
        return values_[offset(i_x, i_xi)];
    }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool operator==(const ValueSurface&) const = default;

private:
    std::size_t offset(int i_x, int i_xi) const noexcept {
        return static_cast<std::size_t>(i_x) * static_cast<std::size_t>(n_xi_ + 1) +
               static_cast<std::size_t>(i_xi);
    }

    int n_x_ = 0;
    int n_xi_ = 0;
    int k_ = 0;
    std::vector<double> values_;
};

}  // namespace optexec

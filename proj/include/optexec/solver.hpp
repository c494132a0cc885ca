#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "optexec/grid.hpp"
#include "optexec/model.hpp"
#include "optexec/policy.hpp"

namespace optexec {

/// How the fixed-point scaling constant h is applied to each impact row.
///  - Global: one h for every row, sized by the largest intensity on the grid.
///  - PerRow: each row i_xi uses h(i_xi) = factor * (1/dt + lambda(xi) + lambda_L),
///    the smallest scaling that keeps every row weight nonnegative.
/// Both have the same fixed point. PerRow leaves a diagonal weight of about
/// 1 - 1/factor on every row, so sweeps converge in a handful of iterations
/// even when the strong intensity is huge at the top of the grid.
enum class HScaling { PerRow, Global };

struct SolverOptions {
    double tol_fp = 1e-9;
    int max_iter = 10000;
    double intensity_cap = 1e12;
    double h_factor = 1.001;
    HScaling h_scaling = HScaling::PerRow;
    /// A less preferred action must beat the preferred one by more than this
    /// to be selected (preference: wait, small quotes, small market orders).
    double tie_tol = 1e-9;
    /// Store the policy for every time_stride-th step only.
    int time_stride = 1;
    /// Retain phi^k for every k (tests and small grids only).
    bool keep_surfaces = false;
    /// Retain the per-sweep sup-norm deltas of every step.
    bool record_sweeps = false;
};

/// Scaling constant; `bound` is 1/dt + 2 (lambda(xi_max) + lambda_L) with the capped intensity.
struct HTransform {
    double h = 0.0;
    double bound = 0.0;
};

HTransform compute_h(const Model& model, const Discretization& grid, double intensity_cap = 1e12,
                     double factor = 1.001);

struct Cell {
    int i_x = 0;
    int i_xi = 0;
};

/// Row weights of the scaled continuation operator for one impact row.
/// diagonal + recovery + limit == 1 - 1/(h dt).
struct RowWeights {
    double h = 0.0;
    double diagonal = 0.0;
    double recovery = 0.0;  // on (i_x, i_xi - 1)
    double limit = 0.0;     // on (i_x - i_l, i_xi)
    double sum() const noexcept { return diagonal + recovery + limit; }
};

struct StepDiagnostics {
    int k = 0;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> sweep_deltas;
};

struct SolveDiagnostics {
    std::vector<int> iterations;   // indexed by k
    std::vector<double> residuals; // final sweep delta, indexed by k
    std::vector<std::vector<double>> sweep_deltas;  // only with record_sweeps
    std::vector<std::string> warnings;

    int max_iterations() const;
    double max_residual() const;
    long long total_iterations() const;
};

struct SolveResult {
    Discretization grid;
    HTransform h;
    ValueSurface phi0;
    std::vector<ValueSurface> surfaces;  // k = 0..n_t when keep_surfaces
    PolicyGrid policy;
    SolveDiagnostics diagnostics;
};

/// Backward solver for the discretized reduced quasi-variational inequality.
/// Each time step is the fixed point of
///   phi = max( max_l { Lbar^l phi + fbar^l }, max_zeta { M^zeta phi + K^zeta } ),
/// iterated by in-place sweeps in ascending (i_x, i_xi) order starting from
/// phi^{k+1}.
class QviSolver {
public:
    explicit QviSolver(Model model, SolverOptions options = {});

    const Model& model() const noexcept { return model_; }
    const Discretization& grid() const noexcept { return grid_; }
    const SolverOptions& options() const noexcept { return options_; }
    const HTransform& h() const noexcept { return h_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Capped recovery intensity on impact row i_xi.
    double intensity(int i_xi) const { return intensity_[static_cast<std::size_t>(i_xi)]; }
    const RowWeights& row_weights(int i_xi) const { return weights_[static_cast<std::size_t>(i_xi)]; }

    ValueSurface terminal_surface() const;

    /// (Lbar^l phi_k)(cell) + fbar^{l,k}(cell). `l_units` is the quote in delta_x units.
    double continuation_value(const ValueSurface& phi_k, const ValueSurface& phi_k1, Cell cell,
                              int l_units) const;

    /// phi_k(i_x - zeta, i_xi + impact index of zeta) - x * impact(zeta).
    double intervention_value(const ValueSurface& phi_k, Cell cell, int zeta_units) const;

    struct StepResult {
        ValueSurface phi;
        std::vector<std::uint16_t> policy;  // encoded Action per cell, i_x-major
        StepDiagnostics diagnostics;
    };

    /// Solves time step k given the solved surface at k + 1.
    /// Throws NumericError when max_iter sweeps do not reach tol_fp.
    StepResult solve_timestep(const ValueSurface& phi_k1, int k) const;

    using Progress = std::function<void(const StepDiagnostics&)>;
    SolveResult solve(const Progress& progress = {}) const;

private:
    void step_into(const ValueSurface& phi_k1, ValueSurface& phi, std::vector<std::uint16_t>& policy,
                   StepDiagnostics& diag) const;
    double sweep(const ValueSurface& phi_k1, ValueSurface& phi, std::vector<std::uint16_t>& policy) const;

    Model model_;
    SolverOptions options_;
    Discretization grid_;
    HTransform h_;
    std::vector<double> intensity_;
    std::vector<RowWeights> weights_;
    std::vector<double> impact_of_units_;
    std::vector<std::string> warnings_;
};

}  // namespace optexec

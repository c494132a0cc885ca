#include "optexec/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "optexec/errors.hpp"

namespace optexec {

int SolveDiagnostics::max_iterations() const {
    return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
}

double SolveDiagnostics::max_residual() const {
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

long long SolveDiagnostics::total_iterations() const {
    long long total = 0;
    for (int it : iterations) total += it;
    return total;
}

namespace {

double capped_intensity(const Model& model, double xi, double cap) {
    const double raw = model.recovery_intensity(xi);
    return std::isfinite(raw) ? std::min(raw, cap) : cap;
}

}  // namespace

HTransform compute_h(const Model& model, const Discretization& grid, double intensity_cap, double factor) {
    const auto& p = model.params();
    HTransform out;
    out.bound = 1.0 / p.delta_t + 2.0 * (capped_intensity(model, grid.xi_max, intensity_cap) + p.lambda_L);
    out.h = factor * out.bound;
    return out;
}

QviSolver::QviSolver(Model model, SolverOptions options)
    : model_(std::move(model)), options_(options), grid_(build_grid(model_)) {
    if (!(options_.tol_fp > 0.0)) throw ConfigError("tol_fp must be > 0");
    if (options_.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(options_.intensity_cap > 0.0)) throw ConfigError("intensity_cap must be > 0");
    if (!(options_.h_factor > 1.0)) throw ConfigError("h_factor must be > 1");
    if (options_.time_stride < 1) throw ConfigError("time_stride must be >= 1");
    if (!(options_.tie_tol >= 0.0)) throw ConfigError("tie_tol must be >= 0");

    const auto& p = model_.params();
    h_ = compute_h(model_, grid_, options_.intensity_cap, options_.h_factor);

    intensity_.resize(static_cast<std::size_t>(grid_.n_xi) + 1);
    weights_.resize(intensity_.size());
    int first_capped = -1;
    for (int j = 0; j <= grid_.n_xi; ++j) {
        const double raw = model_.recovery_intensity(grid_.xi(j));
        const double lam = capped_intensity(model_, grid_.xi(j), options_.intensity_cap);
        if (first_capped < 0 && !(raw <= options_.intensity_cap)) first_capped = j;
        intensity_[static_cast<std::size_t>(j)] = lam;

        RowWeights w;
        w.h = options_.h_scaling == HScaling::Global
                  ? h_.h
                  : options_.h_factor * (1.0 / p.delta_t + lam + p.lambda_L);
        w.diagonal = 1.0 - (1.0 / w.h) * (1.0 / p.delta_t + lam + p.lambda_L);
        w.recovery = lam / w.h;
        w.limit = p.lambda_L / w.h;
        const double expected = 1.0 - 1.0 / (w.h * p.delta_t);
        if (w.diagonal < 0.0 || w.recovery < 0.0 || w.limit < 0.0 ||
            std::abs(w.sum() - expected) > 1e-12 * std::max(1.0, std::abs(expected))) {
            std::ostringstream msg;
            msg << "continuation operator is not a contraction on impact row " << j;
            throw NumericError(msg.str());
        }
        weights_[static_cast<std::size_t>(j)] = w;
    }
    if (first_capped >= 0) {
        std::ostringstream msg;
        msg << "recovery intensity capped at " << options_.intensity_cap << " for impact index >= " << first_capped;
        warnings_.push_back(msg.str());
    }

    impact_of_units_.resize(static_cast<std::size_t>(grid_.n_x) + 1);
    for (int u = 0; u <= grid_.n_x; ++u) impact_of_units_[static_cast<std::size_t>(u)] = model_.impact(model_.shares(u));

    // Clamping can only be hit from states no sell sequence reaches; flag it
    // when the impact index of single orders is not superadditive.
    if (p.theta2 < 1.0) {
        warnings_.push_back("theta2 < 1: impact grid sized for one-unit-at-a-time selling; "
                            "orders from unreachable high-impact states are clamped at xi_max");
    }
}

ValueSurface QviSolver::terminal_surface() const {
    ValueSurface phi(grid_.n_x, grid_.n_xi, grid_.n_t);
    for (int i = 0; i <= grid_.n_x; ++i) {
        const double v = model_.terminal_phi(grid_.x(i));
        for (int j = 0; j <= grid_.n_xi; ++j) phi(i, j) = v;
    }
    return phi;
}

double QviSolver::continuation_value(const ValueSurface& phi_k, const ValueSurface& phi_k1, Cell cell,
                                     int l_units) const {
    if (l_units < 0 || l_units > model_.max_limit_units(cell.i_x)) {
        throw std::invalid_argument("continuation_value: limit volume outside the action set");
    }
    const auto& p = model_.params();
    const auto& w = weights_[static_cast<std::size_t>(cell.i_xi)];
    const double lam = intensity_[static_cast<std::size_t>(cell.i_xi)];
    const double self = phi_k(cell.i_x, cell.i_xi);

    double value = w.diagonal * self;
    if (cell.i_xi > 0) value += w.recovery * phi_k(cell.i_x, cell.i_xi - 1);
    value += w.limit * phi_k(cell.i_x - l_units, cell.i_xi);
    value += (phi_k1(cell.i_x, cell.i_xi) / p.delta_t + lam * grid_.x(cell.i_x) * p.delta_Xi +
              p.lambda_L * model_.shares(l_units) * p.s) /
             w.h;
    return value;
}

double QviSolver::intervention_value(const ValueSurface& phi_k, Cell cell, int zeta_units) const {
    if (zeta_units < 1 || zeta_units > cell.i_x) {
        throw std::invalid_argument("intervention_value: market volume outside the action set");
    }
    return phi_k(cell.i_x - zeta_units, grid_.impact_target(cell.i_xi, zeta_units)) -
           grid_.x(cell.i_x) * impact_of_units_[static_cast<std::size_t>(zeta_units)];
}

double QviSolver::sweep(const ValueSurface& phi_k1, ValueSurface& phi, std::vector<std::uint16_t>& policy) const {
    const auto& p = model_.params();
    const int n_x = grid_.n_x;
    const int n_xi = grid_.n_xi;
    const std::size_t row = static_cast<std::size_t>(n_xi) + 1;
    const double inv_dt = 1.0 / p.delta_t;
    const double quote_gain = p.lambda_L * p.delta_x * p.s;
    const double tie = options_.tie_tol;

    auto values = phi.values();
    const auto next = phi_k1.values();
    double delta = 0.0;

    for (int i = 0; i <= n_x; ++i) {
        const double x = grid_.x(i);
        const int l_top = model_.max_limit_units(i);
        const std::size_t base_offset = static_cast<std::size_t>(i) * row;
        for (int j = 0; j <= n_xi; ++j) {
            const std::size_t c = base_offset + static_cast<std::size_t>(j);
            const auto& w = weights_[static_cast<std::size_t>(j)];
            const double lam = intensity_[static_cast<std::size_t>(j)];
            const double self = values[c];

            double common = w.diagonal * self + (next[c] * inv_dt + lam * x * p.delta_Xi) / w.h;
            if (j > 0) common += w.recovery * values[c - 1];

            // Wait is the l = 0 quote: the fill weight lands back on this cell.
            double best = common + w.limit * self;
            double chosen_value = best;
            Action chosen = Action::wait();

            for (int l = 1; l <= l_top; ++l) {
                const double v = common + w.limit * values[c - static_cast<std::size_t>(l) * row] + l * quote_gain / w.h;
                if (v > chosen_value + tie) {
                    chosen_value = v;
                    chosen = Action::quote(l);
                }
                best = std::max(best, v);
            }
            for (int z = 1; z <= i; ++z) {
                const std::size_t target =
                    static_cast<std::size_t>(i - z) * row + static_cast<std::size_t>(grid_.impact_target(j, z));
                const double v = values[target] - x * impact_of_units_[static_cast<std::size_t>(z)];
                if (v > chosen_value + tie) {
                    chosen_value = v;
                    chosen = Action::sell(z);
                }
                best = std::max(best, v);
            }

            delta = std::max(delta, std::abs(best - self));
            values[c] = best;
            policy[c] = chosen.encode();
        }
    }
    return delta;
}

void QviSolver::step_into(const ValueSurface& phi_k1, ValueSurface& phi, std::vector<std::uint16_t>& policy,
                          StepDiagnostics& diag) const {
    diag.iterations = 0;
    diag.sweep_deltas.clear();
    for (int it = 1; it <= options_.max_iter; ++it) {
        const double delta = sweep(phi_k1, phi, policy);
        diag.iterations = it;
        diag.residual = delta;
        if (options_.record_sweeps) diag.sweep_deltas.push_back(delta);
        if (!std::isfinite(delta)) {
            throw NumericError("fixed-point iteration produced a non-finite value at k = " + std::to_string(diag.k));
        }
        if (delta < options_.tol_fp) return;
    }
    std::ostringstream msg;
    msg << "fixed-point iteration did not converge at k = " << diag.k << " within " << options_.max_iter
        << " sweeps (last delta " << diag.residual << ")";
    throw NumericError(msg.str());
}

QviSolver::StepResult QviSolver::solve_timestep(const ValueSurface& phi_k1, int k) const {
    if (phi_k1.n_x() != grid_.n_x || phi_k1.n_xi() != grid_.n_xi) {
        throw std::invalid_argument("solve_timestep: surface does not match the grid");
    }
    if (k < 0 || k >= grid_.n_t) throw std::invalid_argument("solve_timestep: time index out of range");
    StepResult out{phi_k1, std::vector<std::uint16_t>(grid_.cells(), Action::wait().encode()), {}};
    out.phi.set_k(k);
    out.diagnostics.k = k;
    step_into(phi_k1, out.phi, out.policy, out.diagnostics);
    return out;
}

SolveResult QviSolver::solve(const Progress& progress) const {
    SolveResult result;
    result.grid = grid_;
    result.h = h_;
    result.policy = PolicyGrid(grid_.n_t, grid_.n_x, grid_.n_xi, options_.time_stride);
    result.diagnostics.iterations.assign(static_cast<std::size_t>(grid_.n_t), 0);
    result.diagnostics.residuals.assign(static_cast<std::size_t>(grid_.n_t), 0.0);
    result.diagnostics.warnings = warnings_;
    if (options_.record_sweeps) result.diagnostics.sweep_deltas.resize(static_cast<std::size_t>(grid_.n_t));

    ValueSurface next = terminal_surface();
    if (options_.keep_surfaces) result.surfaces.assign(static_cast<std::size_t>(grid_.n_t) + 1, ValueSurface{});
    if (options_.keep_surfaces) result.surfaces.back() = next;

    ValueSurface current = next;
    std::vector<std::uint16_t> slice(grid_.cells(), Action::wait().encode());
    StepDiagnostics diag;
    for (int k = grid_.n_t - 1; k >= 0; --k) {
        // Warm start from phi^{k+1}.
        std::copy(next.values().begin(), next.values().end(), current.values().begin());
        current.set_k(k);
        diag.k = k;
        step_into(next, current, slice, diag);

        const auto idx = static_cast<std::size_t>(k);
        result.diagnostics.iterations[idx] = diag.iterations;
        result.diagnostics.residuals[idx] = diag.residual;
        if (options_.record_sweeps) result.diagnostics.sweep_deltas[idx] = diag.sweep_deltas;
        if (result.policy.stores(k)) result.policy.set_slice(k, slice);
        if (options_.keep_surfaces) result.surfaces[idx] = current;
        if (progress) progress(diag);
        std::swap(current, next);
    }
    result.phi0 = next;
    return result;
}

}  // namespace optexec

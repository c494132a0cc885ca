#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace optexec {

enum class RecoveryKind { Strong, Weak };

std::string_view to_string(RecoveryKind kind);
RecoveryKind parse_recovery_kind(std::string_view text);

/// Raw model parameters. Defaults are the reference market setup: 50 shares,
/// unit grids, linear impact with amplitude 2, weak recovery with unit
/// amplitude, no limit orders, GBM volatility 0.08 around a 150 best bid.
struct ModelParams {
    double x0 = 50.0;
    double T = 10.0;
    double delta_x = 1.0;
    double delta_t = 0.001;
    double delta_Xi = 1.0;
    double s = 1.0;
    double theta1 = 2.0;
    double theta2 = 1.0;
    double lambda_bar1 = 1.0;
    double lambda_bar2 = 1.0;
    RecoveryKind recovery_kind = RecoveryKind::Weak;
    double lambda_L = 0.0;
    double l_max = 0.0;
    double sigma = 0.08;
    double p0 = 150.0;

    bool operator==(const ModelParams&) const = default;
};

/// Validated, immutable view of ModelParams together with the pure model
/// functions. Inventory and order volumes are handled as integer multiples
/// of delta_x ("units") wherever an index is involved.
class Model {
public:
    /// Throws ConfigError naming the violated constraint.
    explicit Model(ModelParams params);

    const ModelParams& params() const noexcept { return params_; }

    int inventory_units() const noexcept { return inventory_units_; }
    int time_steps() const noexcept { return time_steps_; }
    int limit_units_max() const noexcept { return limit_units_max_; }

    double shares(int units) const noexcept { return units * params_.delta_x; }

    /// Power-law impact theta1 * zeta^theta2.
    double impact(double zeta) const;

    /// Strong: lb1 * (exp(lb2 * xi) - 1); weak: lb1 * xi.
    double recovery_intensity(double xi) const;

    /// Reduced terminal value -x * impact(x).
    double terminal_phi(double x) const;

    /// Allowed market-order volumes at inventory x: delta_x, 2 delta_x, ..., x.
    std::vector<double> market_volumes(double x) const;

    /// Allowed limit-order volumes at inventory x: 0, delta_x, ..., min(l_max, x).
    std::vector<double> limit_volumes(double x) const;

    /// Largest admissible limit quote, in units, at the given inventory.
    int max_limit_units(int inventory_units) const noexcept {
        return inventory_units < limit_units_max_ ? inventory_units : limit_units_max_;
    }

private:
    ModelParams params_;
    int inventory_units_ = 0;
    int time_steps_ = 0;
    int limit_units_max_ = 0;
};

/// Full value y + x (p - xi) + phi from the reduced value phi.
double reconstruct_value(double x, double y, double p, double xi, double phi_value);

/// Rounds value/step to an integer when it is one up to floating-point noise;
/// returns -1 otherwise.
long long exact_ratio(double value, double step);

}  // namespace optexec

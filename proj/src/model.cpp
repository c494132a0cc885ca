#include "optexec/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "optexec/errors.hpp"

namespace optexec {

std::string_view to_string(RecoveryKind kind) {
    return kind == RecoveryKind::Strong ? "strong" : "weak";
}

RecoveryKind parse_recovery_kind(std::string_view text) {
    if (text == "strong" || text == "Strong") return RecoveryKind::Strong;
    if (text == "weak" || text == "Weak") return RecoveryKind::Weak;
    throw ConfigError("recovery_kind must be 'strong' or 'weak', got '" + std::string(text) + "'");
}

long long exact_ratio(double value, double step) {
    if (!(step > 0.0) || !std::isfinite(value) || value < 0.0) return -1;
    const double ratio = value / step;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) return -1;
    if (rounded > 2e9) return -1;
    return static_cast<long long>(rounded);
}

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw ConfigError(message);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }
bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

Model::Model(ModelParams params) : params_(params) {
    const auto& p = params_;
    require(finite_pos(p.x0), "x0 must be > 0");
    require(finite_pos(p.T), "T must be > 0");
    require(finite_pos(p.delta_x), "delta_x must be > 0");
    require(finite_pos(p.delta_t), "delta_t must be > 0");
    require(finite_pos(p.delta_Xi), "delta_Xi must be > 0");
    require(finite_pos(p.p0), "p0 must be > 0");
    require(finite_nonneg(p.s), "s must be >= 0");
    require(finite_nonneg(p.theta1), "theta1 must be >= 0");
    require(finite_pos(p.theta2), "theta2 must be > 0");
    require(finite_nonneg(p.lambda_bar1), "lambda_bar1 must be >= 0");
    require(finite_nonneg(p.lambda_bar2), "lambda_bar2 must be >= 0");
    require(finite_nonneg(p.lambda_L), "lambda_L must be >= 0");
    require(finite_nonneg(p.l_max), "l_max must be >= 0");
    require(finite_nonneg(p.sigma), "sigma must be >= 0");

    const long long nx = exact_ratio(p.x0, p.delta_x);
    require(nx >= 1, "x0 / delta_x must be a positive integer");
    const long long nt = exact_ratio(p.T, p.delta_t);
    require(nt >= 1, "T / delta_t must be a positive integer");
    const long long nl = exact_ratio(p.l_max, p.delta_x);
    require(nl >= 0, "l_max must be an integer multiple of delta_x");
    require(nx <= 16383, "x0 / delta_x must not exceed 16383");

    inventory_units_ = static_cast<int>(nx);
    time_steps_ = static_cast<int>(nt);
    limit_units_max_ = static_cast<int>(nl);
}

double Model::impact(double zeta) const {
    if (zeta < 0.0) throw std::invalid_argument("impact: negative volume");
    if (zeta == 0.0) return 0.0;
    return params_.theta1 * std::pow(zeta, params_.theta2);
}

double Model::recovery_intensity(double xi) const {
    if (xi < 0.0) throw std::invalid_argument("recovery_intensity: negative impact");
    if (params_.recovery_kind == RecoveryKind::Weak) return params_.lambda_bar1 * xi;
    return params_.lambda_bar1 * std::expm1(params_.lambda_bar2 * xi);
}

double Model::terminal_phi(double x) const {
    if (x < 0.0) throw std::invalid_argument("terminal_phi: negative inventory");
    return -x * impact(x);
}

std::vector<double> Model::market_volumes(double x) const {
    const long long units = exact_ratio(x, params_.delta_x);
    if (units < 0) throw std::invalid_argument("market_volumes: inventory off the delta_x grid");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(units));
    for (long long u = 1; u <= units; ++u) out.push_back(static_cast<double>(u) * params_.delta_x);
    return out;
}

std::vector<double> Model::limit_volumes(double x) const {
    const long long units = exact_ratio(x, params_.delta_x);
    if (units < 0) throw std::invalid_argument("limit_volumes: inventory off the delta_x grid");
    const int top = max_limit_units(static_cast<int>(units));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(top) + 1);
    for (int u = 0; u <= top; ++u) out.push_back(u * params_.delta_x);
    return out;
}

double reconstruct_value(double x, double y, double p, double xi, double phi_value) {
    return y + x * (p - xi) + phi_value;
}

}  // namespace optexec

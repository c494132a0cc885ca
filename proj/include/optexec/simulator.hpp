#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <vector>

#include "optexec/grid.hpp"
#include "optexec/model.hpp"
#include "optexec/policy.hpp"

namespace optexec {

using Rng = std::mt19937_64;

/// Seed for path `index` of a batch; paths are independent of run order.
std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index);

/// State on the simulation lattice. Inventory and impact are kept as integer
/// indices; P and Y are continuous.
struct SimState {
    int k = 0;
    int x_units = 0;
    int xi_index = 0;
    double price = 0.0;
    double cash = 0.0;
};

enum class TradeKind : std::uint8_t { Market, LimitFill, Terminal };

struct TradeRecord {
    int k = 0;
    TradeKind kind = TradeKind::Market;
    double volume = 0.0;
    double price = 0.0;  // execution price per share
};

/// One row of the exported path file. Market orders get a row each at the
/// instant they execute; every step then gets one row with the resting
/// decision (wait or quote) and any limit fill; the final row is the
/// terminal block trade. State columns show the state after that row's event.
struct PathEvent {
    int k = 0;
    double t = 0.0;
    double x = 0.0;
    double xi = 0.0;
    double price = 0.0;
    double cash = 0.0;
    ActionKind action = ActionKind::Wait;
    double action_volume = 0.0;
    double fill_volume = 0.0;
};

struct PathRecord {
    std::vector<SimState> states;   // state at the start of each step, k = 0..n_t (record mode)
    std::vector<PathEvent> events;  // record mode only
    std::vector<TradeRecord> trades;
    double x0 = 0.0;
    double p0 = 0.0;
    double terminal_cash = 0.0;
    double terminal_volume = 0.0;   // shares in the terminal block trade
    int market_orders = 0;
    int first_market_step = -1;
    int limit_fills = 0;
    double limit_fill_volume = 0.0;
};

/// Exact lognormal step P * exp(-sigma^2 dt / 2 + sigma sqrt(dt) Z).
double gbm_step(double price, double sigma, double delta_t, Rng& rng);

/// Per-step Bernoulli thinning: true with probability min(1, intensity * dt).
bool recovery_event(double intensity, double delta_t, Rng& rng);

/// Limit-order fill: never for an empty quote, else probability min(1, lambda_L dt).
bool fill_event(double quote_volume, double lambda_L, double delta_t, Rng& rng);

/// Monte Carlo engine for a solved policy.
class PathSimulator {
public:
    /// Throws ConfigError when the policy was solved on a different grid.
    PathSimulator(Model model, std::shared_ptr<const PolicyGrid> policy, double intensity_cap = 1e12);

    const Model& model() const noexcept { return model_; }
    const Discretization& grid() const noexcept { return grid_; }
    const PolicyGrid& policy() const noexcept { return *policy_; }

    /// Sells `units` at market: inventory drops, impact index jumps by the
    /// lattice impact of the order, cash is credited at P - Xi - impact(units).
    void apply_market_order(SimState& state, int units) const;

    /// Full trajectory; `record` keeps per-step states and export rows.
    PathRecord simulate(std::uint64_t seed, bool record = true) const;

    /// Paths 0..n_paths-1 seeded by path_seed(master_seed, index). Full
    /// records are kept for the first `recorded` paths only.
    std::vector<PathRecord> simulate_batch(std::uint64_t master_seed, int n_paths, int threads = 0,
                                           int recorded = 0) const;

private:
    Model model_;
    Discretization grid_;
    std::shared_ptr<const PolicyGrid> policy_;
    std::vector<double> intensity_;
    std::vector<double> impact_of_units_;
};

/// CSV with header k,t,X,Xi,P,Y,action_code,action_volume,fill_volume.
void write_path_csv(std::ostream& out, const PathRecord& path);

}  // namespace optexec

#include "optexec/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "optexec/errors.hpp"

namespace optexec {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

double gbm_step(double price, double sigma, double delta_t, Rng& rng) {
    if (sigma == 0.0) return price;
    std::normal_distribution<double> normal(0.0, 1.0);
    const double z = normal(rng);
    return price * std::exp(-0.5 * sigma * sigma * delta_t + sigma * std::sqrt(delta_t) * z);
}

bool recovery_event(double intensity, double delta_t, Rng& rng) {
    const double p = intensity * delta_t;
    if (!(p > 0.0)) return false;
    if (p >= 1.0) return true;
    return uniform01(rng) < p;
}

bool fill_event(double quote_volume, double lambda_L, double delta_t, Rng& rng) {
    if (!(quote_volume > 0.0)) return false;
    return recovery_event(lambda_L, delta_t, rng);
}

PathSimulator::PathSimulator(Model model, std::shared_ptr<const PolicyGrid> policy, double intensity_cap)
    : model_(std::move(model)), grid_(build_grid(model_)), policy_(std::move(policy)) {
    if (!policy_) throw ConfigError("simulation requires a solved policy");
    if (policy_->n_t() != grid_.n_t || policy_->n_x() != grid_.n_x || policy_->n_xi() != grid_.n_xi) {
        std::ostringstream msg;
        msg << "policy grid (" << policy_->n_t() << ", " << policy_->n_x() << ", " << policy_->n_xi()
            << ") does not match the model grid (" << grid_.n_t << ", " << grid_.n_x << ", " << grid_.n_xi << ")";
        throw ConfigError(msg.str());
    }
    intensity_.resize(static_cast<std::size_t>(grid_.n_xi) + 1);
    for (int j = 0; j <= grid_.n_xi; ++j) {
        const double raw = model_.recovery_intensity(grid_.xi(j));
        intensity_[static_cast<std::size_t>(j)] = std::isfinite(raw) ? std::min(raw, intensity_cap) : intensity_cap;
    }
    impact_of_units_.resize(static_cast<std::size_t>(grid_.n_x) + 1);
    for (int u = 0; u <= grid_.n_x; ++u) impact_of_units_[static_cast<std::size_t>(u)] = model_.impact(model_.shares(u));
}

void PathSimulator::apply_market_order(SimState& state, int units) const {
    if (units < 1 || units > state.x_units) throw std::invalid_argument("market order volume outside the action set");
    const double volume = model_.shares(units);
    const double price = state.price - grid_.xi(state.xi_index) - impact_of_units_[static_cast<std::size_t>(units)];
    state.cash += volume * price;
    state.x_units -= units;
    state.xi_index = grid_.impact_target(state.xi_index, units);
}

PathRecord PathSimulator::simulate(std::uint64_t seed, bool record) const {
    const auto& p = model_.params();
    Rng rng(seed);
    PathRecord path;
    path.x0 = p.x0;
    path.p0 = p.p0;
    if (record) {
        path.states.reserve(static_cast<std::size_t>(grid_.n_t) + 1);
        path.events.reserve(static_cast<std::size_t>(grid_.n_t) + 2);
    }

    SimState st{0, grid_.n_x, 0, p.p0, 0.0};
    auto emit = [&](int k, ActionKind kind, double volume, double fill) {
        path.events.push_back(PathEvent{k, grid_.t(k), model_.shares(st.x_units), grid_.xi(st.xi_index), st.price,
                                        st.cash, kind, volume, fill});
    };

    for (int k = 0; k < grid_.n_t; ++k) {
        st.k = k;
        if (record) path.states.push_back(st);

        Action action = policy_->at(k, st.x_units, st.xi_index);
        int chained = 0;
        while (action.kind == ActionKind::MarketSell) {
            if (++chained > grid_.n_x) throw NumericError("market order chain did not terminate at k = " + std::to_string(k));
            const double volume = model_.shares(action.units);
            const double price = st.price - grid_.xi(st.xi_index) - impact_of_units_[static_cast<std::size_t>(action.units)];
            apply_market_order(st, action.units);
            path.trades.push_back(TradeRecord{k, TradeKind::Market, volume, price});
            ++path.market_orders;
            if (path.first_market_step < 0) path.first_market_step = k;
            if (record) emit(k, ActionKind::MarketSell, volume, 0.0);
            action = policy_->at(k, st.x_units, st.xi_index);
        }

        const int quote = action.kind == ActionKind::QuoteLimit ? action.units : 0;
        double filled = 0.0;
        if (quote > 0 && fill_event(model_.shares(quote), p.lambda_L, p.delta_t, rng)) {
            filled = model_.shares(quote);
            const double price = st.price - grid_.xi(st.xi_index) + p.s;
            st.cash += filled * price;
            st.x_units -= quote;
            path.trades.push_back(TradeRecord{k, TradeKind::LimitFill, filled, price});
            ++path.limit_fills;
            path.limit_fill_volume += filled;
        }
        if (record) emit(k, action.kind, model_.shares(quote), filled);

        if (st.xi_index > 0 && recovery_event(intensity_[static_cast<std::size_t>(st.xi_index)], p.delta_t, rng)) {
            --st.xi_index;
        }
        st.price = gbm_step(st.price, p.sigma, p.delta_t, rng);
    }

    st.k = grid_.n_t;
    if (record) path.states.push_back(st);
    const double volume = model_.shares(st.x_units);
    const double price = st.price - grid_.xi(st.xi_index) - impact_of_units_[static_cast<std::size_t>(st.x_units)];
    if (st.x_units > 0) {
        st.cash += volume * price;
        path.trades.push_back(TradeRecord{grid_.n_t, TradeKind::Terminal, volume, price});
    }
    st.x_units = 0;
    path.terminal_volume = volume;
    path.terminal_cash = st.cash;
    if (record) emit(grid_.n_t, ActionKind::TerminalBlock, volume, 0.0);
    return path;
}

std::vector<PathRecord> PathSimulator::simulate_batch(std::uint64_t master_seed, int n_paths, int threads,
                                                      int recorded) const {
    if (n_paths < 1) throw ConfigError("n_paths must be >= 1");
    std::vector<PathRecord> out(static_cast<std::size_t>(n_paths));
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n_paths));

    auto run = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            out[static_cast<std::size_t>(i)] = simulate(path_seed(master_seed, static_cast<std::uint64_t>(i)), i < recorded);
        }
    };
    if (workers <= 1) {
        run(0, n_paths);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const int chunk = (n_paths + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const int begin = static_cast<int>(w) * chunk;
        const int end = std::min(n_paths, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                run(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

void write_path_csv(std::ostream& out, const PathRecord& path) {
    out << "k,t,X,Xi,P,Y,action_code,action_volume,fill_volume\n";
    char buf[512];
    for (const auto& e : path.events) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n", e.k, e.t, e.x, e.xi, e.price,
                      e.cash, static_cast<int>(e.action), e.action_volume, e.fill_volume);
        out << buf;
    }
}

}  // namespace optexec

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "optexec/errors.hpp"
#include "optexec/solver.hpp"
#include "oracle/bellman_oracle.hpp"
#include "support.hpp"

using namespace optexec;
using testing_support::Gen;
using testing_support::reference;
using testing_support::tiny;

namespace {

SolveResult solve_all(const ModelParams& p, SolverOptions o = {}) {
    o.keep_surfaces = true;
    return QviSolver(Model(p), o).solve();
}

double max_gap_to_oracle(const ModelParams& p, const SolveResult& r) {
    const auto ref = oracle::solve(p);
    REQUIRE(ref.n_xi == r.grid.n_xi);
    double gap = 0.0;
    for (int k = 0; k <= r.grid.n_t; ++k) {
        for (int i = 0; i <= r.grid.n_x; ++i) {
            for (int j = 0; j <= r.grid.n_xi; ++j) {
                gap = std::max(gap, std::abs(r.surfaces[static_cast<std::size_t>(k)](i, j) - ref.at(k, i, j)));
            }
        }
    }
    return gap;
}

}  // namespace

TEST_CASE("scaling constant sits just above the bound") {
    auto p = reference(RecoveryKind::Weak, 10.0);
    p.lambda_L = 0.1;
    const Model m(p);
    const auto h = compute_h(m, build_grid(m));
    CHECK(h.bound == doctest::Approx(1200.2).epsilon(1e-14));
    CHECK(h.h == doctest::Approx(1201.4002).epsilon(1e-14));

    auto q = reference();
    q.lambda_bar1 = 0.0;
    q.delta_t = 1.0;
    q.T = 1.0;
    const Model mq(q);
    const auto hq = compute_h(mq, build_grid(mq));
    CHECK(hq.bound == 1.0);
    CHECK(hq.h == doctest::Approx(1.001).epsilon(1e-15));
}

TEST_CASE("strong intensity is capped and the cap is reported") {
    const Model m(reference(RecoveryKind::Strong, 0.01));
    const auto h = compute_h(m, build_grid(m));
    CHECK(std::isfinite(h.h));
    CHECK(h.bound == doctest::Approx(1000.0 + 2e12).epsilon(1e-15));
    const QviSolver solver(m);
    CHECK(solver.intensity(100) == 1e12);
    CHECK(solver.intensity(1) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-15));
    CHECK(std::any_of(solver.warnings().begin(), solver.warnings().end(),
                      [](const std::string& w) { return w.find("capped") != std::string::npos; }));
}

TEST_CASE("row weights are nonnegative and leak exactly 1/(h dt)") {
    for (auto kind : {RecoveryKind::Weak, RecoveryKind::Strong}) {
        for (auto scaling : {HScaling::PerRow, HScaling::Global}) {
            auto p = reference(kind, 0.01);
            p.lambda_L = 0.1;
            p.l_max = 3.0;
            SolverOptions o;
            o.h_scaling = scaling;
            const QviSolver solver(Model(p), o);
            for (int j = 0; j <= solver.grid().n_xi; ++j) {
                const auto& w = solver.row_weights(j);
                CHECK(w.diagonal >= 0.0);
                CHECK(w.recovery >= 0.0);
                CHECK(w.limit >= 0.0);
                CHECK(w.sum() == doctest::Approx(1.0 - 1.0 / (w.h * p.delta_t)).epsilon(1e-12));
                CHECK(w.h <= solver.h().h * (1.0 + 1e-15));
                if (scaling == HScaling::Global) CHECK(w.h == solver.h().h);
            }
        }
    }
}

TEST_CASE("a zero quote is the same as waiting") {
    auto p = tiny(RecoveryKind::Weak, 0.1, 2.0);
    const QviSolver solver{Model(p)};
    const auto& g = solver.grid();
    Gen gen(31);
    ValueSurface phi(g.n_x, g.n_xi, 0), next(g.n_x, g.n_xi, 1);
    for (auto& v : phi.values()) v = gen.real(-50.0, 0.0);
    for (auto& v : next.values()) v = gen.real(-50.0, 0.0);
    for (int i = 0; i <= g.n_x; ++i) {
        for (int j = 0; j <= g.n_xi; ++j) {
            const auto& w = solver.row_weights(j);
            const double lam = solver.intensity(j);
            double expected = (w.diagonal + w.limit) * phi(i, j) +
                              (next(i, j) / p.delta_t + lam * g.x(i) * p.delta_Xi) / w.h;
            if (j > 0) expected += w.recovery * phi(i, j - 1);
            CHECK(solver.continuation_value(phi, next, Cell{i, j}, 0) == doctest::Approx(expected).epsilon(1e-14));
        }
    }
}

TEST_CASE("constants are fixed points of the continuation at zero impact") {
    auto p = tiny(RecoveryKind::Weak);
    const QviSolver solver{Model(p)};
    const auto& g = solver.grid();
    const ValueSurface c(g.n_x, g.n_xi, 0, -7.25);
    for (int i = 0; i <= g.n_x; ++i) {
        CHECK(solver.continuation_value(c, c, Cell{i, 0}, 0) == doctest::Approx(-7.25).epsilon(1e-14));
    }
}

TEST_CASE("one-cell instance has fixed point -2") {
    auto p = reference();
    p.x0 = 1.0;
    p.T = 0.001;
    const QviSolver solver{Model(p)};
    const auto terminal = solver.terminal_surface();
    CHECK(terminal(1, 0) == -2.0);
    const auto step = solver.solve_timestep(terminal, 0);
    CHECK(step.phi(1, 0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(Action::decode(step.policy[solver.grid().index(1, 0)]) == Action::wait());
}

TEST_CASE("selling the last share at zero impact costs its impact") {
    const QviSolver solver{Model(tiny(RecoveryKind::Weak))};
    const auto& g = solver.grid();
    const ValueSurface zero(g.n_x, g.n_xi, 0, 0.0);
    CHECK(solver.intervention_value(zero, Cell{1, 0}, 1) == -2.0);
    CHECK_THROWS_AS(solver.intervention_value(zero, Cell{1, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(solver.intervention_value(zero, Cell{1, 0}, 0), std::invalid_argument);
}

TEST_CASE("empty inventory is worth nothing") {
    const QviSolver solver{Model(tiny(RecoveryKind::Strong, 0.1, 2.0))};
    const auto step = solver.solve_timestep(solver.terminal_surface(), solver.grid().n_t - 1);
    for (int j = 0; j <= solver.grid().n_xi; ++j) {
        CHECK(step.phi(0, j) == 0.0);
        CHECK(Action::decode(step.policy[static_cast<std::size_t>(j)]) == Action::wait());
    }
}

TEST_CASE("no impact means nothing to lose") {
    for (auto kind : {RecoveryKind::Weak, RecoveryKind::Strong}) {
        auto p = tiny(kind);
        p.theta1 = 0.0;
        p.l_max = 2.0;  // quotes that never fill change nothing
        const auto r = solve_all(p);
        for (const auto& s : r.surfaces) {
            for (double v : s.values()) CHECK(std::abs(v) < 1e-9);
        }
    }
}

TEST_CASE("without impact, filled quotes only add the spread") {
    auto p = tiny(RecoveryKind::Weak, 0.1, 2.0);
    p.theta1 = 0.0;
    const auto r = solve_all(p);
    CHECK(r.phi0(5, 0) > 0.0);
    for (const auto& s : r.surfaces) {
        for (double v : s.values()) CHECK(v >= -1e-12);
    }
    CHECK(max_gap_to_oracle(p, r) < 1e-7);
}

TEST_CASE("without recovery, selling one share at a time is optimal") {
    auto p = tiny(RecoveryKind::Weak);
    p.lambda_bar1 = 0.0;
    p.T = 0.05;
    const auto r = solve_all(p);
    for (int k = 0; k < r.grid.n_t; ++k) {
        for (int i = 0; i <= r.grid.n_x; ++i) {
            const double x = r.grid.x(i);
            for (int j = 0; j <= r.grid.n_xi; ++j) {
                CHECK(r.surfaces[static_cast<std::size_t>(k)](i, j) == doctest::Approx(-x * (x + 1.0)).epsilon(1e-12));
            }
        }
    }
    // One block of five costs 50; five single shares cost 30. Waiting costs
    // nothing until the last step, so the tie goes to waiting before then.
    CHECK(r.phi0(5, 0) == doctest::Approx(-30.0));
    CHECK(r.policy.at(0, 5, 0) == Action::wait());
    CHECK(r.policy.at(r.grid.n_t - 1, 5, 0) == Action::sell(1));
    CHECK(r.policy.at(r.grid.n_t - 1, 1, 0) == Action::wait());  // block of one costs the same
    CHECK(max_gap_to_oracle(p, r) < 1e-7);
}

TEST_CASE("solver agrees with the reference recursion") {
    for (auto kind : {RecoveryKind::Weak, RecoveryKind::Strong}) {
        for (bool quotes : {false, true}) {
            auto p = tiny(kind, quotes ? 5.0 : 0.0, quotes ? 2.0 : 0.0);
            CAPTURE(static_cast<int>(kind));
            CAPTURE(quotes);
            CHECK(max_gap_to_oracle(p, solve_all(p)) < 1e-7);
        }
    }
}

TEST_CASE("property: solver agrees with the reference recursion on random small instances") {
    Gen gen(32);
    for (int trial = 0; trial < 25; ++trial) {
        ModelParams p;
        p.x0 = gen.integer(1, 5);
        p.delta_t = gen.coin() ? 0.01 : 0.05;
        p.T = p.delta_t * gen.integer(1, 40);
        p.theta1 = gen.integer(0, 2);
        p.theta2 = gen.coin() ? 1.0 : gen.real(0.5, 1.5);
        p.recovery_kind = gen.coin() ? RecoveryKind::Strong : RecoveryKind::Weak;
        p.lambda_bar1 = gen.real(0.0, 4.0);
        p.lambda_bar2 = gen.real(0.0, 0.5);
        p.s = gen.real(0.0, 2.0);
        if (gen.coin()) {
            p.lambda_L = gen.real(0.0, 10.0);
            p.l_max = gen.integer(0, 3);
        }
        const auto r = solve_all(p);
        if (r.grid.n_xi > 20) continue;
        CAPTURE(trial);
        CHECK(max_gap_to_oracle(p, r) < 1e-7);
    }
}

TEST_CASE("solved values sit on or above every intervention") {
    auto p = tiny(RecoveryKind::Strong, 1.0, 2.0);
    const QviSolver solver{Model(p)};
    const auto r = solver.solve();
    for (int i = 0; i <= r.grid.n_x; ++i) {
        for (int j = 0; j <= r.grid.n_xi; ++j) {
            for (int z = 1; z <= i; ++z) {
                CHECK(r.phi0(i, j) >= solver.intervention_value(r.phi0, Cell{i, j}, z) - 1e-9);
            }
        }
    }
}

TEST_CASE("policy actions stay inside the action sets") {
    auto p = tiny(RecoveryKind::Weak, 5.0, 2.0);
    const auto r = QviSolver(Model(p)).solve();
    bool saw_quote = false;
    bool saw_sell = false;
    for (int k = 0; k < r.grid.n_t; ++k) {
        for (int i = 0; i <= r.grid.n_x; ++i) {
            for (int j = 0; j <= r.grid.n_xi; ++j) {
                const Action a = r.policy.at(k, i, j);
                if (i == 0) CHECK(a == Action::wait());
                if (a.kind == ActionKind::MarketSell) {
                    saw_sell = true;
                    CHECK(a.units >= 1);
                    CHECK(a.units <= i);
                }
                if (a.kind == ActionKind::QuoteLimit) {
                    saw_quote = true;
                    CHECK(a.units >= 1);
                    CHECK(a.units <= std::min(i, 2));
                }
                CHECK(a.kind != ActionKind::TerminalBlock);
            }
        }
    }
    CHECK(saw_quote);
    CHECK(saw_sell);
}

TEST_CASE("sweep deltas shrink geometrically") {
    for (auto kind : {RecoveryKind::Weak, RecoveryKind::Strong}) {
        for (auto scaling : {HScaling::PerRow, HScaling::Global}) {
            auto p = tiny(kind, 0.5, 2.0);
            p.T = 0.1;
            SolverOptions o;
            o.record_sweeps = true;
            o.h_scaling = scaling;
            o.tol_fp = 1e-12;
            const QviSolver solver(Model(p), o);
            const auto r = solver.solve();
            const double q = 1.0 - 1.0 / (solver.h().h * p.delta_t);
            for (const auto& deltas : r.diagnostics.sweep_deltas) {
                for (std::size_t n = 1; n < deltas.size(); ++n) {
                    if (deltas[n - 1] < 1e-10) continue;
                    CHECK(deltas[n] <= (q + 1e-12) * deltas[n - 1] + 1e-13);
                }
            }
        }
    }
}

TEST_CASE("per-row and global scaling reach the same values") {
    auto p = tiny(RecoveryKind::Strong, 1.0, 2.0);
    SolverOptions global;
    global.h_scaling = HScaling::Global;
    global.tol_fp = 1e-11;
    SolverOptions row;
    row.tol_fp = 1e-11;
    const auto a = QviSolver(Model(p), row).solve();
    const auto b = QviSolver(Model(p), global).solve();
    for (std::size_t c = 0; c < a.phi0.values().size(); ++c) {
        CHECK(a.phi0.values()[c] == doctest::Approx(b.phi0.values()[c]).epsilon(1e-9));
    }
}

TEST_CASE("terminal surface is flat in impact") {
    const QviSolver solver{Model(reference(RecoveryKind::Weak, 0.01))};
    const auto t = solver.terminal_surface();
    CHECK(t.k() == solver.grid().n_t);
    for (int i = 0; i <= solver.grid().n_x; ++i) {
        for (int j = 0; j <= solver.grid().n_xi; ++j) CHECK(t(i, j) == -static_cast<double>(i) * 2.0 * i);
    }
}

TEST_CASE("strided policy matches the full policy on stored steps") {
    auto p = tiny(RecoveryKind::Weak, 5.0, 2.0);
    SolverOptions o;
    o.time_stride = 4;
    const auto full = QviSolver(Model(p)).solve();
    const auto thin = QviSolver(Model(p), o).solve();
    CHECK(thin.policy.stored_steps() == (full.grid.n_t + 3) / 4);
    for (int k = 0; k < full.grid.n_t; ++k) {
        const int stored = k - k % 4;
        for (int i = 0; i <= full.grid.n_x; ++i) {
            for (int j = 0; j <= full.grid.n_xi; ++j) CHECK(thin.policy.at(k, i, j) == full.policy.at(stored, i, j));
        }
    }
    CHECK(thin.phi0 == full.phi0);
}

TEST_CASE("exhausting the iteration budget is a numeric failure") {
    SolverOptions o;
    o.max_iter = 1;
    o.tol_fp = 1e-300;
    const QviSolver solver(Model(tiny(RecoveryKind::Weak)), o);
    CHECK_THROWS_AS(solver.solve(), NumericError);
}

TEST_CASE("invalid solver options are configuration errors") {
    const Model m(tiny(RecoveryKind::Weak));
    SolverOptions o;
    o.h_factor = 1.0;
    CHECK_THROWS_AS(QviSolver(m, o), ConfigError);
    o = {};
    o.tol_fp = 0.0;
    CHECK_THROWS_AS(QviSolver(m, o), ConfigError);
    o = {};
    o.time_stride = 0;
    CHECK_THROWS_AS(QviSolver(m, o), ConfigError);
    o = {};
    o.max_iter = 0;
    CHECK_THROWS_AS(QviSolver(m, o), ConfigError);
}

TEST_CASE("progress callback sees every step in backward order") {
    const QviSolver solver{Model(tiny(RecoveryKind::Weak))};
    std::vector<int> seen;
    const auto r = solver.solve([&](const StepDiagnostics& d) { seen.push_back(d.k); });
    REQUIRE(seen.size() == static_cast<std::size_t>(r.grid.n_t));
    CHECK(seen.front() == r.grid.n_t - 1);
    CHECK(seen.back() == 0);
    CHECK(r.diagnostics.max_residual() < 1e-9);
    CHECK(r.diagnostics.total_iterations() >= r.grid.n_t);
}

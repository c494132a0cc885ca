#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "optexec/artifact.hpp"
#include "optexec/errors.hpp"
#include "optexec/performance.hpp"
#include "optexec/simulator.hpp"
#include "optexec/solver.hpp"

namespace py = pybind11;
using namespace optexec;

namespace {

py::array_t<double> to_array(const ValueSurface& s) {
    py::array_t<double> out({s.n_x() + 1, s.n_xi() + 1});
    std::copy(s.values().begin(), s.values().end(), out.mutable_data());
    return out;
}

// Solved policy plus the value surface at t = 0.
struct Solution {
    Model model;
    SolverOptions options;
    SolveResult result;
    std::shared_ptr<const PolicyGrid> policy;

    Solution(const ModelParams& p, const SolverOptions& o)
        : model(p), options(o), result(QviSolver(model, o).solve()),
          policy(std::make_shared<const PolicyGrid>(result.policy)) {}
};

py::dict path_dict(const PathRecord& path) {
    py::dict d;
    d["terminal_cash"] = path.terminal_cash;
    d["terminal_volume"] = path.terminal_volume;
    d["market_orders"] = path.market_orders;
    d["first_market_step"] = path.first_market_step;
    d["limit_fills"] = path.limit_fills;
    d["rate"] = liquidation_rate(path);
    std::vector<int> x, xi;
    std::vector<double> price, cash;
    for (const auto& s : path.states) {
        x.push_back(s.x_units);
        xi.push_back(s.xi_index);
        price.push_back(s.price);
        cash.push_back(s.cash);
    }
    d["x_units"] = x;
    d["xi_index"] = xi;
    d["price"] = price;
    d["cash"] = cash;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optimal liquidation with transient impact and limit orders.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::enum_<RecoveryKind>(m, "RecoveryKind")
        .value("Strong", RecoveryKind::Strong)
        .value("Weak", RecoveryKind::Weak);
    py::enum_<HScaling>(m, "HScaling").value("PerRow", HScaling::PerRow).value("Global", HScaling::Global);
    py::enum_<ActionKind>(m, "ActionKind")
        .value("Wait", ActionKind::Wait)
        .value("QuoteLimit", ActionKind::QuoteLimit)
        .value("MarketSell", ActionKind::MarketSell)
        .value("TerminalBlock", ActionKind::TerminalBlock);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("x0", &ModelParams::x0)
        .def_readwrite("T", &ModelParams::T)
        .def_readwrite("delta_x", &ModelParams::delta_x)
        .def_readwrite("delta_t", &ModelParams::delta_t)
        .def_readwrite("delta_Xi", &ModelParams::delta_Xi)
        .def_readwrite("s", &ModelParams::s)
        .def_readwrite("theta1", &ModelParams::theta1)
        .def_readwrite("theta2", &ModelParams::theta2)
        .def_readwrite("lambda_bar1", &ModelParams::lambda_bar1)
        .def_readwrite("lambda_bar2", &ModelParams::lambda_bar2)
        .def_readwrite("recovery_kind", &ModelParams::recovery_kind)
        .def_readwrite("lambda_L", &ModelParams::lambda_L)
        .def_readwrite("l_max", &ModelParams::l_max)
        .def_readwrite("sigma", &ModelParams::sigma)
        .def_readwrite("p0", &ModelParams::p0)
        .def(py::self == py::self);

    py::class_<SolverOptions>(m, "SolverOptions")
        .def(py::init<>())
        .def_readwrite("tol_fp", &SolverOptions::tol_fp)
        .def_readwrite("max_iter", &SolverOptions::max_iter)
        .def_readwrite("intensity_cap", &SolverOptions::intensity_cap)
        .def_readwrite("h_factor", &SolverOptions::h_factor)
        .def_readwrite("h_scaling", &SolverOptions::h_scaling)
        .def_readwrite("tie_tol", &SolverOptions::tie_tol)
        .def_readwrite("time_stride", &SolverOptions::time_stride);

    py::class_<Solution>(m, "Solution")
        .def_property_readonly("params", [](const Solution& s) { return s.model.params(); })
        .def_property_readonly("n_t", [](const Solution& s) { return s.result.grid.n_t; })
        .def_property_readonly("n_x", [](const Solution& s) { return s.result.grid.n_x; })
        .def_property_readonly("n_xi", [](const Solution& s) { return s.result.grid.n_xi; })
        .def_property_readonly("phi0", [](const Solution& s) { return to_array(s.result.phi0); },
                               "Reduced value at t = 0, indexed [i_x, i_xi].")
        .def_property_readonly("iterations", [](const Solution& s) { return s.result.diagnostics.iterations; })
        .def_property_readonly("warnings", [](const Solution& s) { return s.result.diagnostics.warnings; })
        .def(
            "action",
            [](const Solution& s, int k, int i_x, int i_xi) {
                const auto& g = s.result.grid;
                if (k < 0 || k >= g.n_t || i_x < 0 || i_x > g.n_x || i_xi < 0 || i_xi > g.n_xi) {
                    throw py::index_error("cell outside the grid");
                }
                const auto a = s.policy->at(k, i_x, i_xi);
                return py::make_tuple(a.kind, a.units);
            },
            py::arg("k"), py::arg("i_x"), py::arg("i_xi"))
        .def(
            "policy_codes",
            [](const Solution& s, int k) {
                const auto& g = s.result.grid;
                if (k < 0 || k >= g.n_t) throw py::index_error("k outside 0..n_t-1");
                py::array_t<std::uint16_t> out({g.n_x + 1, g.n_xi + 1});
                auto* dst = out.mutable_data();
                for (int i = 0; i <= g.n_x; ++i) {
                    for (int j = 0; j <= g.n_xi; ++j) *dst++ = s.policy->at(k, i, j).encode();
                }
                return out;
            },
            py::arg("k"), "Packed actions at step k: kind in bits 14-15, units in bits 0-13.")
        .def(
            "simulate",
            [](const Solution& s, std::uint64_t seed) {
                PathSimulator sim(s.model, s.policy, s.options.intensity_cap);
                return path_dict(sim.simulate(seed));
            },
            py::arg("seed"))
        .def(
            "liquidation_rates",
            [](const Solution& s, int n_paths, std::uint64_t seed, int threads) {
                PathSimulator sim(s.model, s.policy, s.options.intensity_cap);
                std::vector<PathRecord> paths;
                {
                    py::gil_scoped_release release;
                    paths = sim.simulate_batch(seed, n_paths, threads);
                }
                py::array_t<double> out(n_paths);
                for (int i = 0; i < n_paths; ++i) out.mutable_at(i) = liquidation_rate(paths[static_cast<std::size_t>(i)]);
                return out;
            },
            py::arg("n_paths"), py::arg("seed") = 1, py::arg("threads") = 0)
        .def("save", [](const Solution& s, const std::string& path) {
            save_artifact(make_artifact(s.model, s.options, s.result), path);
        });

    m.def(
        "solve",
        [](const ModelParams& p, const SolverOptions& o) {
            py::gil_scoped_release release;
            return std::make_unique<Solution>(p, o);
        },
        py::arg("params"), py::arg("options") = SolverOptions{});

    m.def("liquidation_rate", py::overload_cast<double, double, double>(&liquidation_rate), py::arg("terminal_cash"),
          py::arg("x0"), py::arg("p0"));

    m.def(
        "frontier",
        [](const ModelParams& p, const std::vector<double>& T_list, int n_paths, std::uint64_t seed, int threads) {
            FrontierOptions o;
            o.n_paths = n_paths;
            o.seed = seed;
            o.threads = threads;
            std::vector<PerformanceStats> rows;
            {
                py::gil_scoped_release release;
                rows = frontier(p, T_list, o);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["T"] = r.T;
                d["n_paths"] = r.n_paths;
                d["mean_R"] = r.mean_R;
                d["sd_R"] = r.sd_R;
                d["std_error"] = r.std_error;
                out.append(d);
            }
            return out;
        },
        py::arg("params"), py::arg("T_list"), py::arg("n_paths") = 10000, py::arg("seed") = 1, py::arg("threads") = 0);
}

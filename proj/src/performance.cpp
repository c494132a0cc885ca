#include "optexec/performance.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

#include "optexec/errors.hpp"

namespace optexec {

double liquidation_rate(double terminal_cash, double x0, double p0) {
    if (x0 == 0.0) return 1.0;
    if (p0 == 0.0) throw std::invalid_argument("liquidation_rate: p0 = 0");
    return terminal_cash / (x0 * p0);
}

double liquidation_rate(const PathRecord& path) {
    return liquidation_rate(path.terminal_cash, path.x0, path.p0);
}

PerformanceStats aggregate(std::span<const double> rates, double T, bool retain) {
    if (rates.size() < 2) throw std::invalid_argument("aggregate: needs at least two paths");
    const auto n = static_cast<double>(rates.size());
    // Two passes over deviations from the first rate, so identical rates give
    // exactly zero spread. Summation order is the path order.
    const double shift = rates.front();
    double sum = 0.0;
    for (double r : rates) sum += r - shift;
    const double mean_dev = sum / n;
    const double mean = shift + mean_dev;
    double ss = 0.0;
    for (double r : rates) ss += (r - shift - mean_dev) * (r - shift - mean_dev);

    PerformanceStats stats;
    stats.T = T;
    stats.n_paths = static_cast<int>(rates.size());
    stats.mean_R = mean;
    stats.sd_R = std::sqrt(ss / (n - 1.0));
    stats.std_error = stats.sd_R / std::sqrt(n);
    if (retain) stats.rates.assign(rates.begin(), rates.end());
    return stats;
}

PerformanceStats aggregate(std::span<const PathRecord> paths, double T, bool retain) {
    std::vector<double> rates;
    rates.reserve(paths.size());
    for (const auto& p : paths) rates.push_back(liquidation_rate(p));
    return aggregate(rates, T, retain);
}

std::vector<PerformanceStats> frontier(const ModelParams& params, std::span<const double> T_list,
                                       const FrontierOptions& options) {
    std::vector<PerformanceStats> rows;
    rows.reserve(T_list.size());
    for (double T : T_list) {
        ModelParams run = params;
        run.T = T;
        Model model(run);
        QviSolver solver(model, options.solver);
        auto solved = solver.solve();
        auto policy = std::make_shared<const PolicyGrid>(std::move(solved.policy));
        PathSimulator sim(model, policy, options.solver.intensity_cap);
        const auto paths = sim.simulate_batch(options.seed, options.n_paths, options.threads);
        rows.push_back(aggregate(paths, T));
    }
    return rows;
}

void write_stats_csv(std::ostream& out, std::span<const PerformanceStats> rows) {
    out << "T,n_paths,mean_R,sd_R,std_error\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g\n", r.T, r.n_paths, r.mean_R, r.sd_R, r.std_error);
        out << buf;
    }
}

}  // namespace optexec

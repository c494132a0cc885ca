#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "optexec/model.hpp"
#include "optexec/simulator.hpp"
#include "optexec/solver.hpp"

namespace optexec {

/// Terminal wealth (terminal block included) over frictionless wealth x0 p0.
/// Defined as 1 when x0 = 0: nothing to liquidate, nothing lost.
double liquidation_rate(double terminal_cash, double x0, double p0);
double liquidation_rate(const PathRecord& path);

struct PerformanceStats {
    double T = 0.0;
    int n_paths = 0;
    double mean_R = 0.0;
    double sd_R = 0.0;
    double std_error = 0.0;
    std::vector<double> rates;  // per-path R, when retained
};

/// Unbiased sample mean and standard deviation; needs at least two values.
PerformanceStats aggregate(std::span<const double> rates, double T = 0.0, bool retain = false);
PerformanceStats aggregate(std::span<const PathRecord> paths, double T = 0.0, bool retain = false);

struct FrontierOptions {
    int n_paths = 10000;
    std::uint64_t seed = 1;
    int threads = 0;
    SolverOptions solver{};
};

/// One solve and one batch per terminal time; rows ordered as given.
std::vector<PerformanceStats> frontier(const ModelParams& params, std::span<const double> T_list,
                                       const FrontierOptions& options = {});

/// CSV with header T,n_paths,mean_R,sd_R,std_error.
void write_stats_csv(std::ostream& out, std::span<const PerformanceStats> rows);

}  // namespace optexec

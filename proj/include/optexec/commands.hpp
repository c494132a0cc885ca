#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "optexec/model.hpp"
#include "optexec/solver.hpp"

namespace optexec {

/// Model parameters plus the run controls shared by every command. Loaded
/// from the same flat `key = value` file as the parameters.
struct RunConfig {
    ModelParams params;
    int n_paths = 10000;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::string artifact;  // empty: <output_dir>/solve.artifact
    std::vector<double> T_list{1.0, 3.0, 5.0, 10.0};
    std::vector<double> snapshot_times{0.0};
    int paths_to_write = 1;
    int threads = 0;  // 0: all available cores
    SolverOptions solver;

    std::string artifact_path() const;
};

/// Applies one key. Unknown keys and malformed values throw ConfigError.
void set_run_value(RunConfig& config, const std::string& key, const std::string& value);

/// Reads a config file (if `path` is non-empty), then applies `overrides`
/// of the form key=value in order. Validates run controls.
RunConfig resolve_run_config(const std::string& path, const std::vector<std::string>& overrides);

/// Fully resolved configuration as `key = value` text; reading it back gives
/// the same RunConfig.
void write_run_config(std::ostream& out, const RunConfig& config);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

struct CommandOutput {
    std::vector<std::string> files;
};

/// Solves and saves the artifact. With `verbose`, per-step convergence
/// diagnostics go to `log`.
CommandOutput cmd_solve(const RunConfig& config, std::ostream& log, bool verbose = false);

/// One CSV per snapshot time: x,xi,action_code,action,volume with i_x outer
/// and i_xi inner. For theta2 >= 1 only the reachable triangle is written.
CommandOutput cmd_policy_export(const RunConfig& config, std::ostream& log);

/// Simulates against the stored artifact; writes per-path CSVs for the first
/// paths_to_write paths and stats.csv.
CommandOutput cmd_simulate(const RunConfig& config, std::ostream& log);

/// Writes frontier.csv for every T in T_list.
CommandOutput cmd_frontier(const RunConfig& config, std::ostream& log, bool verbose = false);

/// Maps the exception currently being handled to the documented exit code
/// and prints its message to `err`.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace optexec

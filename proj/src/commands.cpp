#include "optexec/commands.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "optexec/artifact.hpp"
#include "optexec/config.hpp"
#include "optexec/errors.hpp"
#include "optexec/performance.hpp"
#include "optexec/simulator.hpp"

namespace optexec {

namespace {

namespace fs = std::filesystem;

template <class Int>
Int parse_integer(const std::string& key, const std::string& text) {
    Int value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ConfigError("invalid integer for '" + key + "': '" + text + "'");
    return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first == std::string::npos) throw ConfigError("empty entry in list '" + key + "'");
        out.push_back(parse_double(key, item.substr(first, last - first + 1)));
    }
    if (out.empty()) throw ConfigError("list '" + key + "' must not be empty");
    return out;
}

std::string format_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_double(values[i]);
    }
    return out;
}

void validate(const RunConfig& c) {
    if (c.n_paths < 1) throw ConfigError("n_paths must be >= 1");
    if (c.paths_to_write < 0) throw ConfigError("paths_to_write must be >= 0");
    if (c.threads < 0) throw ConfigError("threads must be >= 0");
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
    for (double T : c.T_list) {
        if (!(T > 0.0)) throw ConfigError("T_list entries must be > 0");
    }
}

void save_resolved_config(const RunConfig& config, const std::string& name, CommandOutput& out) {
    std::ostringstream text;
    write_run_config(text, config);
    const auto path = (fs::path(config.output_dir) / name).string();
    write_file_atomic(path, text.str());
    out.files.push_back(path);
}

}  // namespace

std::string RunConfig::artifact_path() const {
    if (!artifact.empty()) return artifact;
    return (fs::path(output_dir) / "solve.artifact").string();
}

void set_run_value(RunConfig& c, const std::string& key, const std::string& value) {
    if (set_param(c.params, key, value)) return;
    if (key == "n_paths") c.n_paths = parse_integer<int>(key, value);
    else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "artifact") c.artifact = value;
    else if (key == "T_list") c.T_list = parse_list(key, value);
    else if (key == "snapshot_times") c.snapshot_times = parse_list(key, value);
    else if (key == "paths_to_write") c.paths_to_write = parse_integer<int>(key, value);
    else if (key == "threads") c.threads = parse_integer<int>(key, value);
    else if (key == "tol_fp") c.solver.tol_fp = parse_double(key, value);
    else if (key == "max_iter") c.solver.max_iter = parse_integer<int>(key, value);
    else if (key == "intensity_cap") c.solver.intensity_cap = parse_double(key, value);
    else if (key == "h_factor") c.solver.h_factor = parse_double(key, value);
    else if (key == "tie_tol") c.solver.tie_tol = parse_double(key, value);
    else if (key == "time_stride") c.solver.time_stride = parse_integer<int>(key, value);
    else if (key == "h_scaling") {
        if (value == "per_row") c.solver.h_scaling = HScaling::PerRow;
        else if (value == "global") c.solver.h_scaling = HScaling::Global;
        else throw ConfigError("h_scaling must be 'per_row' or 'global', got '" + value + "'");
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig resolve_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    RunConfig config;
    if (!path.empty()) {
        for (const auto& kv : read_key_value_file(path)) {
            try {
                set_run_value(config, kv.key, kv.value);
            } catch (const ConfigError& e) {
                throw ConfigError(path + ":" + std::to_string(kv.line) + ": " + e.what());
            }
        }
    }
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + item + "' is not key=value");
        set_run_value(config, item.substr(0, eq), item.substr(eq + 1));
    }
    validate(config);
    return config;
}

void write_run_config(std::ostream& out, const RunConfig& c) {
    out << "# model\n";
    write_params(out, c.params);
    out << "# run controls\n";
    out << "n_paths = " << c.n_paths << "\n";
    out << "seed = " << c.seed << "\n";
    out << "output_dir = " << c.output_dir << "\n";
    out << "artifact = " << c.artifact_path() << "\n";
    out << "T_list = " << format_list(c.T_list) << "\n";
    out << "snapshot_times = " << format_list(c.snapshot_times) << "\n";
    out << "paths_to_write = " << c.paths_to_write << "\n";
    out << "threads = " << c.threads << "\n";
    out << "# solver\n";
    out << "tol_fp = " << format_double(c.solver.tol_fp) << "\n";
    out << "max_iter = " << c.solver.max_iter << "\n";
    out << "intensity_cap = " << format_double(c.solver.intensity_cap) << "\n";
    out << "h_factor = " << format_double(c.solver.h_factor) << "\n";
    out << "h_scaling = " << (c.solver.h_scaling == HScaling::Global ? "global" : "per_row") << "\n";
    out << "tie_tol = " << format_double(c.solver.tie_tol) << "\n";
    out << "time_stride = " << c.solver.time_stride << "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move '" + tmp.string() + "' to '" + path + "'");
    }
}

CommandOutput cmd_solve(const RunConfig& config, std::ostream& log, bool verbose) {
    Model model(config.params);
    QviSolver solver(model, config.solver);
    for (const auto& w : solver.warnings()) log << "warning: " << w << "\n";

    QviSolver::Progress progress;
    if (verbose) {
        progress = [&log](const StepDiagnostics& d) {
            log << "k=" << d.k << " iterations=" << d.iterations << " residual=" << d.residual << "\n";
        };
    }
    auto result = solver.solve(progress);
    const auto& diag = result.diagnostics;
    const double phi_start = result.phi0(result.grid.n_x, 0);
    char line[256];
    std::snprintf(line, sizeof line,
                  "solved n_t=%d n_x=%d n_xi=%d: max iterations %d, total %lld, max residual %.3g, phi0(x0,0)=%.10g\n",
                  result.grid.n_t, result.grid.n_x, result.grid.n_xi, diag.max_iterations(), diag.total_iterations(),
                  diag.max_residual(), phi_start);
    log << line;

    CommandOutput out;
    const auto path = config.artifact_path();
    save_artifact(make_artifact(model, config.solver, std::move(result)), path);
    out.files.push_back(path);
    save_resolved_config(config, "solve_config.txt", out);
    return out;
}

CommandOutput cmd_policy_export(const RunConfig& config, std::ostream& log) {
    const auto artifact = load_artifact(config.artifact_path());
    check_params_match(artifact, config.params);
    const auto& grid = artifact.grid;
    const bool mask = artifact.params.theta2 >= 1.0;

    std::vector<int> steps;
    for (double t : config.snapshot_times) {
        const long long k = exact_ratio(t, grid.delta_t);
        if (k < 0 || k >= grid.n_t) {
            throw ConfigError("snapshot time " + format_double(t) + " is not a decision time on the grid (0, " +
                              format_double(grid.delta_t) + ", ..., " + format_double(grid.t(grid.n_t - 1)) + ")");
        }
        steps.push_back(static_cast<int>(k));
    }

    CommandOutput out;
    for (int k : steps) {
        std::string csv = "x,xi,action_code,action,volume\n";
        char row[160];
        for (int i_x = 0; i_x <= grid.n_x; ++i_x) {
            const int top = mask ? std::min(grid.n_xi, grid.reachable_xi(i_x)) : grid.n_xi;
            for (int i_xi = 0; i_xi <= top; ++i_xi) {
                const Action a = artifact.policy.at(k, i_x, i_xi);
                std::snprintf(row, sizeof row, "%.17g,%.17g,%d,%s,%.17g\n", grid.x(i_x), grid.xi(i_xi),
                              static_cast<int>(a.kind), std::string(to_string(a.kind)).c_str(), grid.x(a.units));
                csv += row;
            }
        }
        const auto path = (fs::path(config.output_dir) / ("policy_k" + std::to_string(k) + ".csv")).string();
        write_file_atomic(path, csv);
        log << "wrote " << path << " (t=" << format_double(grid.t(k)) << ")\n";
        out.files.push_back(path);
    }
    return out;
}

CommandOutput cmd_simulate(const RunConfig& config, std::ostream& log) {
    auto artifact = load_artifact(config.artifact_path());
    check_params_match(artifact, config.params);
    Model model(config.params);
    auto policy = std::make_shared<const PolicyGrid>(std::move(artifact.policy));
    PathSimulator sim(model, policy, artifact.solver.intensity_cap);
    const int recorded = std::min(config.paths_to_write, config.n_paths);
    const auto paths = sim.simulate_batch(config.seed, config.n_paths, config.threads, recorded);

    CommandOutput out;
    for (int i = 0; i < recorded; ++i) {
        std::ostringstream csv;
        write_path_csv(csv, paths[static_cast<std::size_t>(i)]);
        const auto path = (fs::path(config.output_dir) / "paths" / ("path_" + std::to_string(i) + ".csv")).string();
        write_file_atomic(path, csv.str());
        out.files.push_back(path);
    }

    // A single path has no sample spread; report it as zero instead of failing.
    PerformanceStats stats;
    if (paths.size() == 1) {
        stats.T = config.params.T;
        stats.n_paths = 1;
        stats.mean_R = liquidation_rate(paths.front());
    } else {
        stats = aggregate(paths, config.params.T);
    }
    std::ostringstream csv;
    write_stats_csv(csv, std::span<const PerformanceStats>(&stats, 1));
    const auto stats_path = (fs::path(config.output_dir) / "stats.csv").string();
    write_file_atomic(stats_path, csv.str());
    out.files.push_back(stats_path);

    long long fills = 0;
    double fill_volume = 0.0;
    long long quoting_steps = 0;
    for (const auto& p : paths) {
        fills += p.limit_fills;
        fill_volume += p.limit_fill_volume;
    }
    for (int i = 0; i < recorded; ++i) {
        for (const auto& e : paths[static_cast<std::size_t>(i)].events) {
            if (e.action == ActionKind::QuoteLimit) ++quoting_steps;
        }
    }
    char line[256];
    std::snprintf(line, sizeof line, "paths=%d mean_R=%.10g sd_R=%.6g std_error=%.6g\n", stats.n_paths, stats.mean_R,
                  stats.sd_R, stats.std_error);
    log << line;
    std::snprintf(line, sizeof line, "limit fills: %lld (%.6g shares), %.6g per path\n", fills, fill_volume,
                  static_cast<double>(fills) / config.n_paths);
    log << line;
    if (recorded > 0 && model.params().lambda_L > 0.0) {
        std::snprintf(line, sizeof line,
                      "recorded paths: %lld quoting steps, expected fills %.6g (quoting steps x lambda_L dt)\n",
                      quoting_steps, quoting_steps * std::min(1.0, model.params().lambda_L * model.params().delta_t));
        log << line;
    }
    save_resolved_config(config, "simulate_config.txt", out);
    return out;
}

CommandOutput cmd_frontier(const RunConfig& config, std::ostream& log, bool verbose) {
    std::vector<PerformanceStats> rows;
    for (double T : config.T_list) {
        FrontierOptions options;
        options.n_paths = config.n_paths;
        options.seed = config.seed;
        options.threads = config.threads;
        options.solver = config.solver;
        auto row = frontier(config.params, std::span<const double>(&T, 1), options);
        if (verbose) {
            char line[160];
            std::snprintf(line, sizeof line, "T=%g mean_R=%.10g sd_R=%.6g std_error=%.6g\n", T, row[0].mean_R,
                          row[0].sd_R, row[0].std_error);
            log << line;
        }
        rows.push_back(std::move(row[0]));
    }
    std::ostringstream csv;
    write_stats_csv(csv, rows);
    CommandOutput out;
    const auto path = (fs::path(config.output_dir) / "frontier.csv").string();
    write_file_atomic(path, csv.str());
    out.files.push_back(path);
    log << "wrote " << path << "\n";
    save_resolved_config(config, "frontier_config.txt", out);
    return out;
}

int exit_code_for_current_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace optexec

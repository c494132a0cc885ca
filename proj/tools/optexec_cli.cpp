// optexec: solve, export, simulate and compare optimal liquidation policies.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "optexec/commands.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::vector<std::string> overrides;
    std::string artifact;
    std::string output_dir;
    int threads = -1;
    bool emit_config = false;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("-c,--config", flags.config, "Config file of key = value lines")->check(CLI::ExistingFile);
    cmd->add_option("-s,--set", flags.overrides, "Override a config value (key=value); repeatable")
        ->allow_extra_args(false);
    cmd->add_option("-a,--artifact", flags.artifact, "Artifact path (default <output_dir>/solve.artifact)");
    cmd->add_option("-o,--output-dir", flags.output_dir, "Directory for generated files");
    cmd->add_option("-j,--threads", flags.threads, "Worker threads for path batches (0: all cores)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--emit-config", flags.emit_config, "Print the resolved configuration and exit");
    cmd->add_flag("-v,--verbose", flags.verbose, "Print per-step diagnostics");
}

optexec::RunConfig resolve(const CommonFlags& flags) {
    auto overrides = flags.overrides;
    if (!flags.artifact.empty()) overrides.push_back("artifact=" + flags.artifact);
    if (!flags.output_dir.empty()) overrides.push_back("output_dir=" + flags.output_dir);
    if (flags.threads >= 0) overrides.push_back("threads=" + std::to_string(flags.threads));
    return optexec::resolve_run_config(flags.config, overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal execution with market orders, limit orders and price recovery"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* solve = app.add_subcommand("solve", "Solve the value function and policy, save an artifact");
    auto* exporter = app.add_subcommand("policy-export", "Write policy snapshots (snapshot_times) as CSV");
    auto* simulate = app.add_subcommand("simulate", "Simulate paths under a saved policy, write stats");
    auto* front = app.add_subcommand("frontier", "Solve and simulate for every T in T_list");
    for (auto* cmd : {solve, exporter, simulate, front}) add_common(cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const auto config = resolve(flags);
        if (flags.emit_config) {
            optexec::write_run_config(std::cout, config);
            return 0;
        }
        if (solve->parsed()) optexec::cmd_solve(config, std::cerr, flags.verbose);
        else if (exporter->parsed()) optexec::cmd_policy_export(config, std::cerr);
        else if (simulate->parsed()) optexec::cmd_simulate(config, std::cerr);
        else optexec::cmd_frontier(config, std::cerr, flags.verbose);
    } catch (...) {
        return optexec::exit_code_for_current_exception(std::cerr);
    }
    return 0;
}

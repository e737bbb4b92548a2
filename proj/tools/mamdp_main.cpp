#include <CLI11.hpp>

#include "mamdp/cli.hpp"

namespace {

void add_shared_options(CLI::App* cmd, mamdp::CliOptions& options) {
    cmd->add_option("--config", options.config_path, "Path to a JSON experiment config")
        ->required();
    cmd->add_option("--out", options.out_path, "Also write the report to this file");
    cmd->add_option("--seed", options.seed, "Override the solver seed from the config");
    cmd->add_option("--trials", options.trials, "Override the bench trial count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", options.jobs, "Worker threads for bench/oracle sweeps")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--format", options.format, "Bench output format: csv or md")
        ->check(CLI::IsMember({"csv", "md"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local-policy solver and benchmark runner for multi-agent MDPs"};
    app.require_subcommand(1);

    mamdp::CliOptions options;
    CLI::App* solve = app.add_subcommand(
        "solve", "Run the local-policy search on the configured scenario");
    CLI::App* baseline = app.add_subcommand(
        "baseline", "Solve the joint MDP exactly for a reference value");
    CLI::App* bench = app.add_subcommand(
        "bench", "Run the configured benchmark rows and print a results table");
    CLI::App* analyze = app.add_subcommand(
        "analyze", "Measure coupling, chain sensitivity, and value bounds");
    CLI::App* oracle = app.add_subcommand(
        "oracle", "Enumerate every local policy tuple for the exact optimum");
    for (CLI::App* cmd : {solve, baseline, bench, analyze, oracle})
        add_shared_options(cmd, options);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mamdp::kExitOk : mamdp::kExitConfig;
    }

    if (solve->parsed()) return mamdp::cmd_solve(options);
    if (baseline->parsed()) return mamdp::cmd_baseline(options);
    if (bench->parsed()) return mamdp::cmd_bench(options);
    if (analyze->parsed()) return mamdp::cmd_analyze(options);
    return mamdp::cmd_oracle(options);
}

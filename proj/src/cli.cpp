#include "mamdp/cli.hpp"

#include <chrono>
#include <concepts>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "mamdp/bench.hpp"
#include "mamdp/bounds.hpp"
#include "mamdp/config.hpp"
#include "mamdp/errors.hpp"
#include "mamdp/local_search.hpp"
#include "mamdp/oracle.hpp"

namespace mamdp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string real12(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

/// Flat key-value run report, printed to stdout and optionally copied to a
/// file. Values are formatted once, so both sinks are identical.
class Report {
  public:
    void kv(const std::string& key, const std::string& value) {
        text_ += key + " = " + value + "\n";
    }
    void kv(const std::string& key, const char* value) { kv(key, std::string(value)); }
    void kv(const std::string& key, double value) { kv(key, real12(value)); }
    void kv(const std::string& key, bool value) { kv(key, value ? "true" : "false"); }
    template <typename Integer>
        requires std::integral<Integer>
    void kv(const std::string& key, Integer value) {
        kv(key, std::to_string(value));
    }

    void emit(const std::optional<std::string>& out_path) const {
        std::cout << text_;
        if (!out_path) return;
        std::ofstream out(*out_path, std::ios::binary);
        if (!out) throw ConfigError("out", "cannot write file '" + *out_path + "'");
        out << text_;
    }

  private:
    std::string text_;
};

void write_text(const std::string& text, const std::optional<std::string>& out_path) {
    std::cout << text;
    if (!out_path) return;
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw ConfigError("out", "cannot write file '" + *out_path + "'");
    out << text;
}

const ScenarioConfig& require_scenario(const ExperimentConfig& config) {
    if (!config.scenario)
        throw ConfigError("scenario", "required section is missing for this subcommand");
    return *config.scenario;
}

void describe_scenario(Report& report, const ScenarioConfig& scenario,
                       const ScenarioBuild& built) {
    report.kv("scenario", scenario.kind_name());
    report.kv("setting", scenario.describe());
    report.kv("agents", built.spec.m);
    report.kv("states", built.mdp.n_states);
    report.kv("actions", built.mdp.n_actions);
    report.kv("valid_actions", built.n_valid_joint_actions);
    report.kv("start_state", built.start_state);
}

template <typename Body>
int guarded(const CliOptions& options, Body body) {
    try {
        const ExperimentConfig config = load_config(options.config_path);
        return body(config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const MdpError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

int cmd_solve(const CliOptions& options) {
    return guarded(options, [&](const ExperimentConfig& config) {
        const ScenarioConfig& scenario = require_scenario(config);
        const ScenarioBuild built = build_scenario(scenario);

        SearchConfig search = config.solver.to_search_config();
        search.seed = options.seed.value_or(config.solver.seed);

        const auto t0 = std::chrono::steady_clock::now();
        const SearchTrace trace = local_policy_search(built.mdp, built.spec, search);
        const double solve_seconds = seconds_since(t0);

        const JointMDP surrogate = build_averaged_surrogate(built.mdp, built.spec);
        int adoptions = 0;
        for (const SearchRecord& record : trace.records) adoptions += record.adopted ? 1 : 0;

        Report report;
        describe_scenario(report, scenario, built);
        report.kv("seed", search.seed);
        report.kv("epsilon", search.epsilon);
        report.kv("rounds", trace.rounds);
        report.kv("adoptions", adoptions);
        report.kv("termination",
                  trace.termination == SearchTermination::Converged ? "converged" : "round_cap");
        report.kv("average_reward",
                  evaluate_on_joint(built.mdp, built.spec, trace.final_policies,
                                    built.start_state));
        report.kv("surrogate_average_reward",
                  evaluate_on_joint(surrogate, built.spec, trace.final_policies,
                                    built.start_state));
        report.kv("solve_seconds", solve_seconds);
        report.emit(options.out_path);
        return kExitOk;
    });
}

int cmd_baseline(const CliOptions& options) {
    return guarded(options, [&](const ExperimentConfig& config) {
        const ScenarioConfig& scenario = require_scenario(config);
        const ScenarioBuild built = build_scenario(scenario);

        const auto t0 = std::chrono::steady_clock::now();
        const GlobalSolution solution =
            global_baseline(built.mdp, built.start_state, config.solver.tol);
        const double solve_seconds = seconds_since(t0);

        Report report;
        describe_scenario(report, scenario, built);
        report.kv("average_reward", solution.start_value);
        report.kv("iterations", solution.solution.iterations);
        report.kv("residual_span", solution.solution.residual_span);
        report.kv("solve_seconds", solve_seconds);
        report.emit(options.out_path);
        return kExitOk;
    });
}

int cmd_oracle(const CliOptions& options) {
    return guarded(options, [&](const ExperimentConfig& config) {
        const ScenarioConfig& scenario = require_scenario(config);
        const ScenarioBuild built = build_scenario(scenario);

        const auto t0 = std::chrono::steady_clock::now();
        const BruteForceResult brute =
            brute_force_local(built.mdp, built.spec, built.start_state,
                              config.analysis.oracle_cap, options.jobs);
        const double solve_seconds = seconds_since(t0);

        Report report;
        describe_scenario(report, scenario, built);
        report.kv("tuple_count", count_local_policy_tuples(built.spec));
        report.kv("cap", config.analysis.oracle_cap);
        report.kv("best_value", brute.best_value);
        std::string tables;
        for (std::size_t i = 0; i < brute.best.tables.size(); ++i) {
            if (i) tables += " | ";
            for (std::size_t s = 0; s < brute.best.tables[i].size(); ++s)
                tables += (s ? " " : "") + std::to_string(brute.best.tables[i][s]);
        }
        report.kv("best_policy", tables);
        report.kv("n_evaluated", brute.n_evaluated);
        report.kv("n_skipped_non_ergodic", brute.n_skipped_non_ergodic);
        report.kv("solve_seconds", solve_seconds);
        report.emit(options.out_path);
        return kExitOk;
    });
}

int cmd_analyze(const CliOptions& options) {
    return guarded(options, [&](const ExperimentConfig& config) {
        const ScenarioConfig& scenario = require_scenario(config);
        const ScenarioBuild built = build_scenario(scenario);
        const AnalysisSection& analysis = config.analysis;

        SearchConfig search = config.solver.to_search_config();
        search.seed = options.seed.value_or(config.solver.seed);
        const SearchTrace trace = local_policy_search(built.mdp, built.spec, search);
        const JointMDP surrogate = build_averaged_surrogate(built.mdp, built.spec);

        Report report;
        describe_scenario(report, scenario, built);
        report.kv("seed", search.seed);
        report.kv("epsilon", search.epsilon);
        report.kv("rounds", trace.rounds);
        report.kv("termination",
                  trace.termination == SearchTermination::Converged ? "converged" : "round_cap");

        DeltaEstimate delta;
        bool delta_budget_hit = false;
        try {
            delta = measure_delta(built.mdp, built.spec, DeltaMode::Exhaustive,
                                  analysis.delta_budget, search.seed);
        } catch (const BudgetExceeded&) {
            delta_budget_hit = true;
            delta = measure_delta(built.mdp, built.spec, DeltaMode::Sampled,
                                  analysis.delta_budget, search.seed);
        }
        report.kv("delta.value", delta.value);
        report.kv("delta.exhaustive", delta.exhaustive);
        report.kv("delta.n_samples", delta.n_samples);
        if (delta_budget_hit)
            report.kv("delta.note",
                      "context pairs exceed analysis.delta_budget; sampled lower bound "
                      "reported - raise the budget for an exhaustive measurement");

        const double value_original =
            evaluate_on_joint(built.mdp, built.spec, trace.final_policies, built.start_state);
        const double value_surrogate =
            evaluate_on_joint(surrogate, built.spec, trace.final_policies, built.start_state);
        report.kv("value.original", value_original);
        report.kv("value.surrogate", value_surrogate);

        ErgodicityReport sensitivity;
        bool sensitivity_available = true;
        std::string sensitivity_error;
        try {
            const ErgodicityReport on_original = estimate_chain_sensitivity(
                built.mdp, analysis.sensitivity_samples, search.seed);
            const ErgodicityReport on_surrogate = estimate_chain_sensitivity(
                surrogate, analysis.sensitivity_samples, search.seed + 1);
            sensitivity = on_original.max_coefficient >= on_surrogate.max_coefficient
                              ? on_original
                              : on_surrogate;
            sensitivity.n_policies_sampled =
                on_original.n_policies_sampled + on_surrogate.n_policies_sampled;
            sensitivity.n_skipped_non_ergodic =
                on_original.n_skipped_non_ergodic + on_surrogate.n_skipped_non_ergodic;
        } catch (const MdpError& e) {
            sensitivity_available = false;
            sensitivity_error = e.what();
        }
        report.kv("sensitivity.available", sensitivity_available);
        if (sensitivity_available) {
            report.kv("sensitivity.max_coefficient", sensitivity.max_coefficient);
            report.kv("sensitivity.is_estimate", sensitivity.is_estimate);
            report.kv("sensitivity.n_policies_sampled", sensitivity.n_policies_sampled);
            report.kv("sensitivity.n_skipped_non_ergodic", sensitivity.n_skipped_non_ergodic);

            const BoundReport bound = make_bound_report(
                value_surrogate, value_original, delta, sensitivity, search.epsilon,
                built.spec.m, std::max(built.mdp.r_max, surrogate.r_max),
                std::min(built.mdp.r_min, surrogate.r_min));
            report.kv("bound.r_max", bound.r_max);
            report.kv("bound.r_min", bound.r_min);
            report.kv("bound.n_agents", bound.n_agents);
            report.kv("bound.optimality_bound", bound.optimality_bound);
            report.kv("bound.optimality_bound_tight", bound.optimality_bound_tight);
            report.kv("bound.surrogate_gap_bound", bound.surrogate_gap_bound);
            report.kv("bound.local_search_factor", bound.local_search_factor);
        } else {
            report.kv("sensitivity.unavailable_reason", sensitivity_error);
            report.kv("bound.available", false);
        }

        if (analysis.oracle_enabled) {
            const BruteForceResult brute = brute_force_local(
                built.mdp, built.spec, built.start_state, analysis.oracle_cap, options.jobs);
            report.kv("oracle.best_value", brute.best_value);
            report.kv("oracle.n_evaluated", brute.n_evaluated);
            OptimalityCheck check = verify_optimality_bound(
                built.mdp, surrogate, built.spec, trace.final_policies, brute.best,
                built.start_state, search.epsilon, delta.value, false);
            if (!check.holds) {
                try {
                    check = verify_optimality_bound(built.mdp, surrogate, built.spec,
                                                    trace.final_policies, brute.best,
                                                    built.start_state, search.epsilon,
                                                    delta.value, true, analysis.oracle_cap);
                } catch (const CapExceeded&) {
                    // keep the per-policy result; the cap rules out the sweep
                }
            }
            report.kv("oracle.lambda_bar", check.lambda_bar);
            report.kv("oracle.lambda_exhaustive", check.lambda_exhaustive);
            report.kv("oracle.optimality_bound", check.bound);
            report.kv("oracle.optimality_bound_holds", check.holds ? "pass" : "fail");
        }

        report.emit(options.out_path);
        return kExitOk;
    });
}

int cmd_bench(const CliOptions& options) {
    return guarded(options, [&](const ExperimentConfig& config) {
        if (!config.bench)
            throw ConfigError("bench", "required section is missing for this subcommand");
        if (options.format != "csv" && options.format != "md")
            throw ConfigError("format", "must be \"csv\" or \"md\"");

        const std::uint64_t seed = options.seed.value_or(config.solver.seed);
        const std::vector<BenchRowResult> rows = run_bench(
            *config.bench, config.solver, seed, options.trials.value_or(-1), options.jobs);

        write_text(options.format == "csv" ? format_bench_csv(rows)
                                           : format_bench_markdown(rows),
                   options.out_path);

        for (const BenchRowResult& row : rows)
            if (!row.error.empty()) {
                std::cerr << "error: row '" << row.label << "' failed: " << row.error << "\n";
                return kExitRuntime;
            }
        return kExitOk;
    });
}

}  // namespace mamdp

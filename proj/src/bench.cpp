#include "mamdp/bench.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include "mamdp/errors.hpp"
#include "mamdp/local_search.hpp"
#include "mamdp/oracle.hpp"

namespace mamdp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BenchRowResult run_row(const BenchRow& row, const SolverSection& solver, std::uint64_t seed,
                       int trials) {
    BenchRowResult result;
    result.label = row.label;
    result.scenario = row.scenario.kind_name();
    result.setting = row.scenario.describe();
    result.trials = trials;
    try {
        const ScenarioBuild built = build_scenario(row.scenario);
        result.n_agents = built.spec.m;
        result.n_joint_states = built.mdp.n_states;
        result.n_joint_actions = built.mdp.n_actions;
        result.n_valid_joint_actions = built.n_valid_joint_actions;

        auto t0 = std::chrono::steady_clock::now();
        const GlobalSolution baseline = global_baseline(built.mdp, built.start_state, solver.tol);
        result.global_runtime_s = seconds_since(t0);
        result.global_reward = baseline.start_value;

        SearchConfig config = solver.to_search_config();
        double reward_sum = 0.0;
        double runtime_sum = 0.0;
        for (int trial = 0; trial < trials; ++trial) {
            config.seed = seed + static_cast<std::uint64_t>(trial);
            t0 = std::chrono::steady_clock::now();
            const SearchTrace trace = local_policy_search(built.mdp, built.spec, config);
            runtime_sum += seconds_since(t0);
            reward_sum +=
                evaluate_on_joint(built.mdp, built.spec, trace.final_policies, built.start_state);
        }
        result.alg_reward = reward_sum / trials;
        result.alg_runtime_s = runtime_sum / trials;
        result.reward_ratio =
            result.global_reward != 0.0 ? result.alg_reward / result.global_reward : 0.0;
        result.runtime_ratio =
            result.global_runtime_s > 0.0 ? result.alg_runtime_s / result.global_runtime_s : 0.0;
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    return result;
}

std::string real12(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

/// A field never contains commas or quotes by construction (labels are
/// validated words, settings use spaces, errors are sanitized here).
std::string csv_safe(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '"') c = ';';
    return text;
}

constexpr const char* kColumns[] = {
    "label",        "scenario",     "setting",          "agents",
    "states",       "actions",      "valid_actions",    "trials",
    "alg_reward",   "global_reward", "reward_ratio",    "error",
    "alg_runtime_s", "global_runtime_s", "runtime_ratio",
};

std::vector<std::string> row_fields(const BenchRowResult& r) {
    return {r.label,
            r.scenario,
            r.setting,
            std::to_string(r.n_agents),
            std::to_string(r.n_joint_states),
            std::to_string(r.n_joint_actions),
            std::to_string(r.n_valid_joint_actions),
            std::to_string(r.trials),
            real12(r.alg_reward),
            real12(r.global_reward),
            real12(r.reward_ratio),
            csv_safe(r.error),
            real12(r.alg_runtime_s),
            real12(r.global_runtime_s),
            real12(r.runtime_ratio)};
}

}  // namespace

std::vector<BenchRowResult> run_bench(const BenchSection& bench, const SolverSection& solver,
                                      std::uint64_t seed, int trials_override, int jobs) {
    const int trials = trials_override > 0 ? trials_override : bench.trials;
    std::vector<BenchRowResult> results(bench.rows.size());
    if (bench.rows.empty()) return results;

    const int workers =
        std::max(1, std::min<int>(jobs, static_cast<int>(bench.rows.size())));
    if (workers == 1) {
        for (std::size_t k = 0; k < bench.rows.size(); ++k)
            results[k] = run_row(bench.rows[k], solver, seed, trials);
        return results;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < bench.rows.size(); k = next.fetch_add(1))
            results[k] = run_row(bench.rows[k], solver, seed, trials);
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return results;
}

std::string format_bench_csv(const std::vector<BenchRowResult>& rows) {
    std::ostringstream out;
    for (std::size_t c = 0; c < std::size(kColumns); ++c)
        out << (c ? "," : "") << kColumns[c];
    out << "\n";
    for (const BenchRowResult& row : rows) {
        const std::vector<std::string> fields = row_fields(row);
        for (std::size_t c = 0; c < fields.size(); ++c) out << (c ? "," : "") << fields[c];
        out << "\n";
    }
    return out.str();
}

std::string format_bench_markdown(const std::vector<BenchRowResult>& rows) {
    std::ostringstream out;
    out << "|";
    for (const char* column : kColumns) out << " " << column << " |";
    out << "\n|";
    for (std::size_t c = 0; c < std::size(kColumns); ++c) out << " --- |";
    out << "\n";
    for (const BenchRowResult& row : rows) {
        out << "|";
        for (const std::string& field : row_fields(row))
            out << " " << (field.empty() ? " " : field) << " |";
        out << "\n";
    }
    return out.str();
}

}  // namespace mamdp

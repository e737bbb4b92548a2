#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mamdp/config.hpp"

namespace mamdp {

struct BenchRowResult {
    std::string label;
    std::string scenario;  // "grid" or "patrol"
    std::string setting;   // physical descriptor of the row
    int n_agents = 0;
    int n_joint_states = 0;
    int n_joint_actions = 0;        // controlled joint action count
    int n_valid_joint_actions = 0;  // minimum over states of scenario-valid actions
    int trials = 0;
    double alg_reward = 0.0;     // mean over trials, start-aware
    double global_reward = 0.0;  // jointly optimal baseline, start-aware
    double reward_ratio = 0.0;
    std::string error;              // empty when the row succeeded
    double alg_runtime_s = 0.0;     // mean solve time per trial, search only
    double global_runtime_s = 0.0;  // baseline solve time, solver only
    double runtime_ratio = 0.0;
};

/// Runs every bench row: builds the scenario, times the global baseline once
/// (solver call only), then times `trials` runs of the local search (seeds
/// seed, seed+1, ...) and averages their start-aware values on the original
/// model. trials_override replaces the section's trial count when positive.
/// Rows run in up to `jobs` threads; a row that throws carries the message in
/// its `error` field and zeros elsewhere.
std::vector<BenchRowResult> run_bench(const BenchSection& bench, const SolverSection& solver,
                                      std::uint64_t seed, int trials_override = -1, int jobs = 1);

/// CSV with a fixed header; numeric fields use 12 significant digits.
/// Runtime-derived fields sit in the trailing three columns so everything
/// before them is byte-for-byte reproducible for a fixed config and seed.
std::string format_bench_csv(const std::vector<BenchRowResult>& rows);

/// GitHub-style markdown table with the same columns.
std::string format_bench_markdown(const std::vector<BenchRowResult>& rows);

}  // namespace mamdp

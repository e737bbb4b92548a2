#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mamdp/local_search.hpp"
#include "mamdp/scenarios.hpp"

namespace mamdp {

/// One benchmark scenario: either a grid coverage or a patrol instance.
struct ScenarioConfig {
    enum class Kind { Grid, Patrol };
    Kind kind = Kind::Grid;
    GridConfig grid;
    PatrolConfig patrol;

    std::string kind_name() const { return kind == Kind::Grid ? "grid" : "patrol"; }
    /// Short human-readable descriptor of the physical setting.
    std::string describe() const;
};

/// Local-search solver settings. Every field has a documented default; the
/// config file may override any of them.
struct SolverSection {
    double epsilon = 0.0;  // relative improvement required to adopt
    int max_rounds = 500;
    double tol = 1e-9;
    CompanionDistribution companion_mode = CompanionDistribution::Uniform;
    bool refresh_local_kernels = false;
    long long sample_budget = -1;  // Sampled companion mode; -1 = auto
    std::uint64_t seed = 0;

    SearchConfig to_search_config() const;
};

/// Budgets for the analysis subcommand.
struct AnalysisSection {
    long long delta_budget = 1 << 20;  // max contexts per (agent, state, action)
    int sensitivity_samples = 200;     // policies sampled per model
    bool oracle_enabled = false;       // compare against the brute-force best
    long long oracle_cap = 1000000;    // max policy tuples for the oracle sweep
};

struct BenchRow {
    std::string label;
    ScenarioConfig scenario;
};

struct BenchSection {
    int trials = 100;
    std::vector<BenchRow> rows;
};

/// Parsed experiment file. `scenario` drives solve/analyze/baseline/oracle;
/// `bench` drives the bench subcommand; either may be absent when unused.
struct ExperimentConfig {
    int schema_version = 1;
    std::optional<ScenarioConfig> scenario;
    SolverSection solver;
    AnalysisSection analysis;
    std::optional<BenchSection> bench;
};

/// Parses and validates experiment JSON. Physics parameters are all required
/// (no hidden defaults); solver/analysis/bench settings are optional with the
/// defaults above. Unknown keys, wrong types, out-of-range values, and a
/// missing/different schema_version are ConfigErrors naming the field path.
ExperimentConfig parse_config(const std::string& json_text);

/// Reads the file and delegates to parse_config. A missing or unreadable
/// file is a ConfigError on the pseudo-field "config".
ExperimentConfig load_config(const std::string& path);

ScenarioBuild build_scenario(const ScenarioConfig& config);

}  // namespace mamdp

#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mamdp {

/// Shared command-line options (see tools/ for argument parsing).
struct CliOptions {
    std::string config_path;
    std::optional<std::string> out_path;  // default: stdout
    std::optional<std::uint64_t> seed;    // overrides config-independent default 0
    std::optional<int> trials;            // overrides bench.trials
    int jobs = 1;
    std::string format = "csv";  // bench output: "csv" or "md"
};

// Exit codes: 0 success, 2 configuration problem (message names the offending
// field), 3 computation failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

int cmd_solve(const CliOptions& options);
int cmd_bench(const CliOptions& options);
int cmd_analyze(const CliOptions& options);
int cmd_baseline(const CliOptions& options);
int cmd_oracle(const CliOptions& options);

}  // namespace mamdp

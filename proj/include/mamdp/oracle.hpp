#pragma once

#include <vector>

#include "mamdp/factored.hpp"
#include "mamdp/mdp.hpp"

namespace mamdp {

struct GlobalSolution {
    GainBias solution;
    double start_value = 0.0;  // start-aware value on the full chain
};

/// Jointly optimal average reward by solving the full model directly.
/// When the optimal chain's gain depends on the start state, `start_value`
/// reports the value achievable from `start_state`.
GlobalSolution global_baseline(const JointMDP& mdp, int start_state, double tol = 1e-9,
                               int max_iter = 100000);

struct BruteForceResult {
    LocalPolicySet best;
    double best_value = 0.0;
    long long n_evaluated = 0;
    long long n_skipped_non_ergodic = 0;
};

/// Exhaustive search over all deterministic local-policy tuples, scoring each
/// by start-aware average reward on the full model. Tuples whose value cannot
/// be evaluated are skipped and counted. Ties resolve to the lexicographically
/// smallest tuple (tables compared agent-major, then row-major). Throws
/// CapExceeded when the tuple count exceeds `cap`.
BruteForceResult brute_force_local(const JointMDP& mdp, const FactoredSpec& spec, int start_state,
                                   long long cap, int jobs = 1);

/// Number of deterministic local-policy tuples for the spec.
long long count_local_policy_tuples(const FactoredSpec& spec);

}  // namespace mamdp

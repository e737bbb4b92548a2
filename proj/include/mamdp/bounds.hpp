#pragma once

#include <cstdint>

#include "mamdp/factored.hpp"
#include "mamdp/local_search.hpp"
#include "mamdp/markov.hpp"
#include "mamdp/mdp.hpp"

namespace mamdp {

/// Certified relationships between a policy's value on the original coupled
/// model and on its transition-independent surrogate. The three derived
/// quantities are definitional arithmetic over the measured fields:
///
///   optimality_bound       = 4*r_max*max_sensitivity*n_agents*delta
///                            + (1 + n_agents*epsilon)*surrogate_value
///                            + original_value
///   optimality_bound_tight = same, with 4*(r_max - r_min) in place of 4*r_max
///   surrogate_gap_bound    = (r_max - r_min)*2*max_sensitivity*n_agents*delta
///   local_search_factor    = 1 / (2 + epsilon*n_agents), in (0, 1/2]
///
/// `optimality_bound` caps the jointly optimal value of the original model;
/// `surrogate_gap_bound` caps |surrogate_value - original_value| for any one
/// policy; `local_search_factor` is the guaranteed fraction of the surrogate
/// optimum attained by a converged local search. Both bound variants are
/// carried because the conservative form is the quoted guarantee while the
/// span form is what the gap argument actually supports.
struct BoundReport {
    double surrogate_value = 0.0;  // J on the surrogate under the found policy
    double original_value = 0.0;   // J on the original under the found policy
    double delta = 0.0;            // transition-dependence measure
    bool delta_exhaustive = false;
    double max_sensitivity = 0.0;  // largest chain-sensitivity coefficient seen
    bool sensitivity_is_estimate = true;
    double epsilon = 0.0;
    int n_agents = 0;
    double r_max = 0.0;
    double r_min = 0.0;

    double optimality_bound = 0.0;
    double optimality_bound_tight = 0.0;
    double surrogate_gap_bound = 0.0;
    double local_search_factor = 0.0;
};

/// Pure arithmetic: fills the derived fields from already-measured inputs.
/// No solves, no sampling — exactly the identities documented on BoundReport.
BoundReport make_bound_report(double surrogate_value, double original_value,
                              const DeltaEstimate& delta, const ErgodicityReport& sensitivity,
                              double epsilon, int n_agents, double r_max, double r_min);

/// Convenience assembly for a found policy: evaluates it on both models from
/// the start state, measures the transition dependence of the original model
/// (exhaustive when the per-tuple context count fits the budget, seeded
/// sampling otherwise), estimates the chain-sensitivity coefficient over
/// sampled deterministic policies on both models (their max is reported), and
/// delegates to make_bound_report. Reward extremes are taken across both
/// models.
BoundReport compute_bound_report(const JointMDP& original, const JointMDP& surrogate,
                                 const FactoredSpec& spec, const LocalPolicySet& policies,
                                 int start_state, double epsilon, long long delta_budget,
                                 int sensitivity_samples, std::uint64_t seed);

struct GapCheck {
    double gap = 0.0;    // |J_original - J_surrogate| for the policy
    double bound = 0.0;  // (r_max - r_min) * 2 * lambda_bar * n_agents * delta
    bool holds = false;  // gap <= bound + 1e-9
    double lambda_bar = 0.0;
    bool lambda_exhaustive = false;
    long long n_chains_examined = 0;
};

/// Per-policy gap check with exact sensitivity coefficients: lambda_bar is
/// the max group-inverse ergodicity coefficient of the policy's induced
/// chains on the two models — or, when `exhaustive`, over every deterministic
/// local policy tuple on both models (tuple count must stay within `cap`,
/// else CapExceeded; tuples whose chain is not unichain are skipped). Throws
/// NotErgodic when the checked policy itself is not unichain on either model.
GapCheck verify_surrogate_gap_bound(const JointMDP& original, const JointMDP& surrogate,
                                    const FactoredSpec& spec, const LocalPolicySet& policy,
                                    double delta, bool exhaustive, long long cap = 1000000);

struct OptimalityCheck {
    double optimal_value = 0.0;  // J on the original under the reference-best policy
    double bound = 0.0;          // optimality bound assembled around the found policy
    bool holds = false;          // optimal_value <= bound + 1e-9
    double lambda_bar = 0.0;
    bool lambda_exhaustive = false;
};

/// Checks that the reference-best local policy's value on the original model
/// is covered by the found policy's optimality bound. In non-exhaustive mode
/// lambda_bar is the max sensitivity over the found AND best policies' chains
/// on both models; exhaustive mode sweeps every deterministic tuple as in
/// verify_surrogate_gap_bound.
OptimalityCheck verify_optimality_bound(const JointMDP& original, const JointMDP& surrogate,
                                        const FactoredSpec& spec, const LocalPolicySet& found,
                                        const LocalPolicySet& best, int start_state,
                                        double epsilon, double delta, bool exhaustive,
                                        long long cap = 1000000);

}  // namespace mamdp

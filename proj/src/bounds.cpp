#include "mamdp/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "mamdp/errors.hpp"
#include "mamdp/oracle.hpp"

namespace mamdp {

namespace {

/// Group-inverse ergodicity coefficient of one policy's chain on one model.
/// Throws NotErgodic when the chain is not unichain.
double chain_sensitivity(const JointMDP& mdp, const StationaryPolicy& policy) {
    const Matrix chain = induced_chain(mdp, policy);
    const StationaryDistribution q = stationary_distribution(chain);
    return ergodicity_coefficient(group_inverse(chain, q));
}

/// Max coefficient of the policy's chains on both models.
double policy_sensitivity(const JointMDP& original, const JointMDP& surrogate,
                          const FactoredSpec& spec, const LocalPolicySet& policy) {
    const StationaryPolicy lifted = lift_policy(spec, policy);
    return std::max(chain_sensitivity(original, lifted), chain_sensitivity(surrogate, lifted));
}

/// Advances the tables as a mixed-radix counter; false once every tuple has
/// been visited.
bool advance(LocalPolicySet& policy, const FactoredSpec& spec) {
    for (int i = 0; i < spec.m; ++i) {
        for (int& choice : policy.tables[i]) {
            if (++choice < spec.agent_action_sizes[i]) return true;
            choice = 0;
        }
    }
    return false;
}

struct SweepResult {
    double lambda = 0.0;
    long long n_chains = 0;
};

/// Max sensitivity over every deterministic local policy tuple on both
/// models. Tuples whose induced chain is not unichain are skipped.
SweepResult exhaustive_sensitivity(const JointMDP& original, const JointMDP& surrogate,
                                   const FactoredSpec& spec, long long cap) {
    const long long total = count_local_policy_tuples(spec);
    if (total > cap) throw CapExceeded(total);

    LocalPolicySet policy;
    policy.tables.resize(spec.m);
    for (int i = 0; i < spec.m; ++i)
        policy.tables[i].assign(spec.env_state_size * spec.agent_state_sizes[i], 0);

    SweepResult out;
    do {
        const StationaryPolicy lifted = lift_policy(spec, policy);
        for (const JointMDP* model : {&original, &surrogate}) {
            try {
                out.lambda = std::max(out.lambda, chain_sensitivity(*model, lifted));
                ++out.n_chains;
            } catch (const MdpError&) {
                // non-unichain tuple on this model: no single stationary
                // distribution to perturb, so it contributes nothing
            }
        }
    } while (advance(policy, spec));
    return out;
}

}  // namespace

BoundReport make_bound_report(double surrogate_value, double original_value,
                              const DeltaEstimate& delta, const ErgodicityReport& sensitivity,
                              double epsilon, int n_agents, double r_max, double r_min) {
    BoundReport report;
    report.surrogate_value = surrogate_value;
    report.original_value = original_value;
    report.delta = delta.value;
    report.delta_exhaustive = delta.exhaustive;
    report.max_sensitivity = sensitivity.max_coefficient;
    report.sensitivity_is_estimate = sensitivity.is_estimate;
    report.epsilon = epsilon;
    report.n_agents = n_agents;
    report.r_max = r_max;
    report.r_min = r_min;

    const double coupling = sensitivity.max_coefficient * n_agents * delta.value;
    const double amplified = (1.0 + n_agents * epsilon) * surrogate_value + original_value;
    report.optimality_bound = 4.0 * r_max * coupling + amplified;
    report.optimality_bound_tight = 4.0 * (r_max - r_min) * coupling + amplified;
    report.surrogate_gap_bound = (r_max - r_min) * 2.0 * coupling;
    report.local_search_factor = 1.0 / (2.0 + epsilon * n_agents);
    return report;
}

BoundReport compute_bound_report(const JointMDP& original, const JointMDP& surrogate,
                                 const FactoredSpec& spec, const LocalPolicySet& policies,
                                 int start_state, double epsilon, long long delta_budget,
                                 int sensitivity_samples, std::uint64_t seed) {
    const double j_surrogate = evaluate_on_joint(surrogate, spec, policies, start_state);
    const double j_original = evaluate_on_joint(original, spec, policies, start_state);

    DeltaEstimate delta;
    try {
        delta = measure_delta(original, spec, DeltaMode::Exhaustive, delta_budget, seed);
    } catch (const BudgetExceeded&) {
        delta = measure_delta(original, spec, DeltaMode::Sampled, delta_budget, seed);
    }

    const ErgodicityReport on_original = estimate_chain_sensitivity(original, sensitivity_samples, seed);
    const ErgodicityReport on_surrogate =
        estimate_chain_sensitivity(surrogate, sensitivity_samples, seed + 1);
    ErgodicityReport merged =
        on_original.max_coefficient >= on_surrogate.max_coefficient ? on_original : on_surrogate;
    merged.max_coefficient = std::max(on_original.max_coefficient, on_surrogate.max_coefficient);
    merged.is_estimate = true;
    merged.n_policies_sampled = on_original.n_policies_sampled + on_surrogate.n_policies_sampled;
    merged.n_skipped_non_ergodic =
        on_original.n_skipped_non_ergodic + on_surrogate.n_skipped_non_ergodic;

    return make_bound_report(j_surrogate, j_original, delta, merged, epsilon, spec.m,
                             std::max(original.r_max, surrogate.r_max),
                             std::min(original.r_min, surrogate.r_min));
}

GapCheck verify_surrogate_gap_bound(const JointMDP& original, const JointMDP& surrogate,
                                    const FactoredSpec& spec, const LocalPolicySet& policy,
                                    double delta, bool exhaustive, long long cap) {
    const StationaryPolicy lifted = lift_policy(spec, policy);

    GapCheck check;
    if (exhaustive) {
        const SweepResult sweep = exhaustive_sensitivity(original, surrogate, spec, cap);
        check.lambda_bar = sweep.lambda;
        check.n_chains_examined = sweep.n_chains;
        check.lambda_exhaustive = true;
    } else {
        check.lambda_bar = std::max(chain_sensitivity(original, lifted),
                                    chain_sensitivity(surrogate, lifted));
        check.n_chains_examined = 2;
    }

    check.gap = std::abs(average_reward(surrogate, lifted) - average_reward(original, lifted));
    const double span = std::max(original.r_max, surrogate.r_max) -
                        std::min(original.r_min, surrogate.r_min);
    check.bound = span * 2.0 * check.lambda_bar * spec.m * delta;
    check.holds = check.gap <= check.bound + 1e-9;
    return check;
}

OptimalityCheck verify_optimality_bound(const JointMDP& original, const JointMDP& surrogate,
                                        const FactoredSpec& spec, const LocalPolicySet& found,
                                        const LocalPolicySet& best, int start_state,
                                        double epsilon, double delta, bool exhaustive,
                                        long long cap) {
    OptimalityCheck check;
    if (exhaustive) {
        const SweepResult sweep = exhaustive_sensitivity(original, surrogate, spec, cap);
        check.lambda_bar = sweep.lambda;
        check.lambda_exhaustive = true;
    } else {
        check.lambda_bar = std::max(policy_sensitivity(original, surrogate, spec, found),
                                    policy_sensitivity(original, surrogate, spec, best));
    }

    check.optimal_value = evaluate_on_joint(original, spec, best, start_state);
    const double j_surrogate_found = evaluate_on_joint(surrogate, spec, found, start_state);
    const double j_original_found = evaluate_on_joint(original, spec, found, start_state);
    const double r_max = std::max(original.r_max, surrogate.r_max);
    check.bound = 4.0 * r_max * check.lambda_bar * spec.m * delta +
                  (1.0 + spec.m * epsilon) * j_surrogate_found + j_original_found;
    check.holds = check.optimal_value <= check.bound + 1e-9;
    return check;
}

}  // namespace mamdp

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mamdp/mdp.hpp"

namespace mamdp {

/// Per-agent state/action spaces plus an optional shared environment
/// component. Joint states are mixed-radix encoded with the environment digit
/// most significant, then agent 0, agent 1, ... (big-endian); joint actions
/// likewise with agent 0 most significant. env_state_size == 1 means "no
/// environment component".
struct FactoredSpec {
    int m = 0;
    std::vector<int> agent_state_sizes;
    std::vector<int> agent_action_sizes;
    int env_state_size = 1;
    std::optional<Matrix> env_kernel;  // autonomous environment dynamics, when known

    int n_joint_states() const;
    int n_joint_actions() const;
    void validate_against(const JointMDP& mdp) const;
};

/// Decoded joint state: environment digit plus one digit per agent.
struct JointState {
    int env = 0;
    std::vector<int> agents;
};

/// Generic big-endian mixed-radix encoding (agent 0 most significant).
int encode_joint(const std::vector<int>& sizes, const std::vector<int>& components);
std::vector<int> decode_joint(const std::vector<int>& sizes, int index);

int encode_state(const FactoredSpec& spec, const JointState& state);
JointState decode_state(const FactoredSpec& spec, int index);
int encode_action(const FactoredSpec& spec, const std::vector<int>& actions);
std::vector<int> decode_action(const FactoredSpec& spec, int index);

/// One deterministic local policy per agent: (env state, own state) -> own
/// action, stored row-major as tables[i][env * |S_i| + own].
struct LocalPolicySet {
    std::vector<std::vector<int>> tables;

    int action(const FactoredSpec& spec, int agent, int env, int own) const {
        return tables[agent][env * spec.agent_state_sizes[agent] + own];
    }
    void validate_against(const FactoredSpec& spec) const;
};

/// Joint deterministic policy assembled from the local tables.
StationaryPolicy lift_policy(const FactoredSpec& spec, const LocalPolicySet& policies);

/// Companion next-state context for one agent: the environment's next digit
/// plus every other agent's next digit (the entry for the agent itself is
/// ignored).
struct CompanionNext {
    int env_next = 0;
    std::vector<int> agent_next;
};

/// P(next own state | s, a, all other components' next states), normalized
/// over agent i's next digit. Throws ZeroProbabilityConditioning when the
/// conditioning event has probability zero.
Vector conditional_next_state(const JointMDP& mdp, const FactoredSpec& spec, int agent, int s,
                              int a, const CompanionNext& others_next);

enum class DeltaMode { Exhaustive, Sampled };

/// The maximizing tuple behind a delta estimate: agent, own state/action, and
/// the two companion contexts (joint state, joint action, companion next) whose
/// conditional next-state distributions realize the value.
struct DeltaWitness {
    int agent = -1;
    int own_state = 0, own_action = 0;
    int state_a = 0, action_a = 0;
    CompanionNext next_a;
    int state_b = 0, action_b = 0;
    CompanionNext next_b;
};

/// Transition-dependence measurement: the maximum total-variation change of
/// one agent's conditional next-state distribution across companion contexts.
struct DeltaEstimate {
    double value = 0.0;
    bool exhaustive = false;
    DeltaWitness witness;
    long long n_samples = 0;
};

/// Exhaustive mode enumerates every (agent, own state, own action) tuple and
/// every pair of positive-probability companion contexts; it requires the
/// per-tuple context count to stay within `budget` (throws BudgetExceeded).
/// Sampled mode draws `budget` random context pairs (seeded) and returns a
/// lower bound with witnesses.
DeltaEstimate measure_delta(const JointMDP& mdp, const FactoredSpec& spec, DeltaMode mode,
                            long long budget, std::uint64_t seed);

/// Product-kernel MDP from per-agent kernels, sharing the original reward.
/// per_agent_kernels[i][a_i] is the (S_i x S_i) slice for agent i's action a_i.
/// Requires an environment-free spec (env_state_size == 1).
JointMDP build_ti_surrogate(const FactoredSpec& spec,
                            const std::vector<std::vector<Matrix>>& per_agent_kernels,
                            const Matrix& reward);

/// Decoupled kernels extracted from a coupled model: each agent's marginal
/// next-state distribution averaged uniformly over companion states,
/// companion actions, and the environment digit; plus the environment's own
/// averaged kernel (1x1 [1] when there is no environment). Every averaged row
/// is a mixture of the model's conditional next-state distributions, which is
/// what keeps each row within the measured dependence of any conditional.
struct AveragedKernels {
    std::vector<std::vector<Matrix>> per_agent;  // [i][a_i], (S_i x S_i)
    Matrix env;                                  // (E x E)
};
AveragedKernels averaged_kernels(const JointMDP& mdp, const FactoredSpec& spec);

/// Product surrogate of a coupled model built from averaged_kernels, keeping
/// the original reward. With an environment component, the product includes
/// the averaged environment kernel.
JointMDP build_averaged_surrogate(const JointMDP& mdp, const FactoredSpec& spec);

}  // namespace mamdp

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mamdp/errors.hpp"
#include "mamdp/markov.hpp"

namespace mamdp {

/// Dense finite average-reward MDP over an enumerated joint state/action space.
/// kernel[a](s, s') = P(s' | s, a); reward(s, a) is the stage reward.
struct JointMDP {
    int n_states = 0;
    int n_actions = 0;
    std::vector<Matrix> kernel;
    Matrix reward;
    double r_min = 0.0;
    double r_max = 0.0;

    double p(int s, int a, int s2) const { return kernel[a](s, s2); }

    /// Builds an MDP with reward bounds taken from the table itself.
    static JointMDP from_tables(std::vector<Matrix> kernel, Matrix reward);
};

/// Deterministic (state -> action) or stochastic (state -> action distribution)
/// stationary policy.
struct StationaryPolicy {
    std::vector<int> choice;  // non-empty iff deterministic
    Matrix probs;             // (n_states x n_actions) iff stochastic

    bool deterministic() const { return !choice.empty(); }
    double prob(int s, int a) const {
        if (deterministic()) return choice[s] == a ? 1.0 : 0.0;
        return probs(s, a);
    }
    static StationaryPolicy det(std::vector<int> choice);
    static StationaryPolicy stoch(Matrix probs);
    static StationaryPolicy uniform(int n_states, int n_actions);
};

/// Solution of an average-reward MDP: gain, bias (reference state 0 pinned to
/// zero), and the greedy policy achieving them.
struct GainBias {
    double gain = 0.0;
    Vector bias;
    StationaryPolicy policy;
    int iterations = 0;
    double residual_span = 0.0;
};

/// Structural flags of a chain: irreducibility, aperiodicity (of every closed
/// class), and the closed-class count.
struct ErgodicityFlags {
    bool irreducible = false;
    bool aperiodic = false;
    int n_closed_classes = 0;
};

/// Checks every JointMDP invariant; throws on the first violation.
void validate_mdp(const JointMDP& mdp);

/// Throws when the policy's shape/indices do not match the MDP.
void validate_policy(const JointMDP& mdp, const StationaryPolicy& policy);

/// M(s, s') = sum_a policy(s)(a) * kernel[a](s, s').
Matrix induced_chain(const JointMDP& mdp, const StationaryPolicy& policy);

/// Reachability-closure irreducibility test plus gcd-of-cycle-lengths
/// aperiodicity test on the support graph.
ErgodicityFlags ergodicity_check(const Matrix& chain);

/// r(s) = E_{a ~ policy(s)} reward(s, a).
Vector state_reward_under(const JointMDP& mdp, const StationaryPolicy& policy);

/// q . r for the policy's induced chain; requires a unichain induced chain
/// (throws NotErgodic otherwise).
double average_reward(const JointMDP& mdp, const StationaryPolicy& policy);

/// Relative value iteration for the average-reward criterion.
///
/// Span-seminorm convergence on successive value differences, reference state
/// 0 subtracted each sweep, lowest-action-index tie-breaking. Internally the
/// operator is damped (w = (1-tau) v + tau T v with tau = 1/2), the standard
/// aperiodicity transformation: it leaves gains, biases and optimal policies
/// unchanged while making the span converge on periodic chains. Throws
/// NoConvergence after max_iter sweeps and NotErgodic when the greedy policy's
/// chain has more than one closed recurrent class.
GainBias relative_value_iteration(const JointMDP& mdp, double tol = 1e-9, int max_iter = 100000);

/// Long-run average reward starting from `start` under the policy: recurrent
/// classes of the induced chain get their stationary gains; a transient start
/// mixes them by absorption probability. Equals average_reward for unichain
/// induced chains, and is well-defined for any induced chain.
double evaluate_from_start(const JointMDP& mdp, const StationaryPolicy& policy, int start);

/// Smallest action-closed state set containing `start` (closure under the
/// supports of every action). Sorted ascending.
std::vector<int> reachable_closed_set(const JointMDP& mdp, int start);

/// MDP restricted to an action-closed state set (throws std::invalid_argument
/// when mass leaks outside). index_of maps original -> restricted (-1 outside).
struct RestrictedMDP {
    JointMDP mdp;
    std::vector<int> states;
    std::vector<int> index_of;
};
RestrictedMDP restrict_mdp(const JointMDP& mdp, const std::vector<int>& states);

}  // namespace mamdp

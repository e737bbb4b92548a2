#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mamdp/factored.hpp"
#include "mamdp/mdp.hpp"

namespace mamdp::testutil {

using Rng = std::mt19937_64;

inline Vector random_distribution(Rng& rng, int n) {
    std::exponential_distribution<double> exp1(1.0);
    Vector v(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        v(i) = exp1(rng) + 1e-12;
        total += v(i);
    }
    return v / total;
}

inline Matrix random_stochastic_matrix(Rng& rng, int n) {
    Matrix p(n, n);
    for (int i = 0; i < n; ++i) p.row(i) = random_distribution(rng, n).transpose();
    return p;
}

/// Strictly positive rows: irreducible and aperiodic by construction.
inline Matrix random_ergodic_matrix(Rng& rng, int n) {
    Matrix p = random_stochastic_matrix(rng, n);
    Matrix u = Matrix::Constant(n, n, 1.0 / n);
    return 0.9 * p + 0.1 * u;
}

inline JointMDP random_mdp(Rng& rng, int n_states, int n_actions) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Matrix> kernel(n_actions);
    for (int a = 0; a < n_actions; ++a) kernel[a] = random_stochastic_matrix(rng, n_states);
    Matrix reward(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) reward(s, a) = unif(rng);
    return JointMDP::from_tables(kernel, reward);
}

/// Ergodic under every policy: every kernel row strictly positive.
inline JointMDP random_ergodic_mdp(Rng& rng, int n_states, int n_actions) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Matrix> kernel(n_actions);
    for (int a = 0; a < n_actions; ++a) kernel[a] = random_ergodic_matrix(rng, n_states);
    Matrix reward(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) reward(s, a) = unif(rng);
    return JointMDP::from_tables(kernel, reward);
}

/// Fully coupled random multi-agent MDP over the joint space described by
/// `spec` (no environment component unless spec says so). Every joint kernel
/// row is a strictly positive random distribution, so every policy is ergodic.
inline JointMDP random_mmdp(Rng& rng, const FactoredSpec& spec) {
    const int S = spec.n_joint_states();
    const int A = spec.n_joint_actions();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Matrix> kernel(A);
    for (int a = 0; a < A; ++a) kernel[a] = random_ergodic_matrix(rng, S);
    Matrix reward(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) reward(s, a) = unif(rng);
    return JointMDP::from_tables(kernel, reward);
}

inline FactoredSpec two_agent_spec(int states_per_agent, int actions_per_agent) {
    FactoredSpec spec;
    spec.m = 2;
    spec.agent_state_sizes = {states_per_agent, states_per_agent};
    spec.agent_action_sizes = {actions_per_agent, actions_per_agent};
    spec.env_state_size = 1;
    return spec;
}

/// Product-form MMDP: each agent's next state is drawn independently given
/// the full joint (state, action), so the coupling is carried entirely by the
/// conditionals — the model class the decoupling bounds are stated for.
/// Conditional rows are strictly positive, so every policy is ergodic on both
/// the model and any averaged surrogate. Requires env_state_size == 1.
inline JointMDP random_product_mmdp(Rng& rng, const FactoredSpec& spec) {
    const int S = spec.n_joint_states();
    const int A = spec.n_joint_actions();
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // cond[i].row(s * A + a) = distribution over agent i's next state
    std::vector<Matrix> cond(spec.m);
    for (int i = 0; i < spec.m; ++i) {
        const int n = spec.agent_state_sizes[i];
        cond[i].resize(S * A, n);
        for (int row = 0; row < S * A; ++row) {
            const Vector d = random_distribution(rng, n);
            cond[i].row(row) = (0.9 * d + Vector::Constant(n, 0.1 / n)).transpose();
        }
    }

    std::vector<Matrix> kernel(A, Matrix::Zero(S, S));
    for (int s2 = 0; s2 < S; ++s2) {
        const JointState next = decode_state(spec, s2);
        for (int a = 0; a < A; ++a)
            for (int s = 0; s < S; ++s) {
                double p = 1.0;
                for (int i = 0; i < spec.m; ++i) p *= cond[i](s * A + a, next.agents[i]);
                kernel[a](s, s2) = p;
            }
    }
    Matrix reward(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) reward(s, a) = unif(rng);
    return JointMDP::from_tables(std::move(kernel), std::move(reward));
}

/// Same kernels, but with a coverage-style team reward
///   reward(s) = sum_b w_b * (1 - (1-eta)^{#agents whose digit equals b}),
/// action-independent, monotone with diminishing returns in the set of agents
/// present at each target — the reward class the approximation guarantees
/// assume.
inline JointMDP random_coverage_mmdp(Rng& rng, const FactoredSpec& spec, double eta = 0.75) {
    JointMDP base = random_product_mmdp(rng, spec);
    const int S = spec.n_joint_states();
    std::uniform_real_distribution<double> weight(0.2, 1.0);
    const int n_targets =
        *std::min_element(spec.agent_state_sizes.begin(), spec.agent_state_sizes.end());
    std::vector<double> w(n_targets);
    for (double& x : w) x = weight(rng);

    Matrix reward(S, spec.n_joint_actions());
    for (int s = 0; s < S; ++s) {
        const JointState state = decode_state(spec, s);
        double r = 0.0;
        for (int b = 0; b < n_targets; ++b) {
            int count = 0;
            for (int digit : state.agents) count += digit == b ? 1 : 0;
            r += w[b] * (1.0 - std::pow(1.0 - eta, count));
        }
        reward.row(s).setConstant(r);
    }
    return JointMDP::from_tables(std::move(base.kernel), std::move(reward));
}

}  // namespace mamdp::testutil

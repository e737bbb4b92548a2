#include "mamdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mamdp {

JointMDP JointMDP::from_tables(std::vector<Matrix> kernel, Matrix reward) {
    JointMDP mdp;
    mdp.n_states = static_cast<int>(reward.rows());
    mdp.n_actions = static_cast<int>(reward.cols());
    mdp.kernel = std::move(kernel);
    mdp.reward = std::move(reward);
    mdp.r_min = mdp.reward.minCoeff();
    mdp.r_max = mdp.reward.maxCoeff();
    return mdp;
}

StationaryPolicy StationaryPolicy::det(std::vector<int> choice) {
    StationaryPolicy p;
    p.choice = std::move(choice);
    return p;
}

StationaryPolicy StationaryPolicy::stoch(Matrix probs) {
    StationaryPolicy p;
    p.probs = std::move(probs);
    return p;
}

StationaryPolicy StationaryPolicy::uniform(int n_states, int n_actions) {
    return stoch(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

void validate_mdp(const JointMDP& mdp) {
    if (mdp.n_states < 1 || mdp.n_actions < 1)
        throw MdpError("state and action counts must be positive");
    if (static_cast<int>(mdp.kernel.size()) != mdp.n_actions)
        throw MdpError("kernel has " + std::to_string(mdp.kernel.size()) + " action slices, expected " +
                       std::to_string(mdp.n_actions));
    if (mdp.reward.rows() != mdp.n_states || mdp.reward.cols() != mdp.n_actions)
        throw MdpError("reward table shape mismatch");
    for (int a = 0; a < mdp.n_actions; ++a) {
        const Matrix& slice = mdp.kernel[a];
        if (slice.rows() != mdp.n_states || slice.cols() != mdp.n_states)
            throw MdpError("kernel slice " + std::to_string(a) + " shape mismatch");
        for (int s = 0; s < mdp.n_states; ++s) {
            if (slice.row(s).minCoeff() < 0.0)
                throw NegativeProbability("kernel entry below zero at state " + std::to_string(s) +
                                          ", action " + std::to_string(a));
            double sum = slice.row(s).sum();
            if (std::abs(sum - 1.0) > 1e-12) throw NonStochasticRow(s, a, sum);
        }
    }
    if (!mdp.reward.allFinite()) throw NonFiniteReward("reward table has a non-finite entry");
    if (mdp.reward.minCoeff() < mdp.r_min - 1e-12 || mdp.reward.maxCoeff() > mdp.r_max + 1e-12)
        throw MdpError("reward bounds do not cover the reward table");
}

void validate_policy(const JointMDP& mdp, const StationaryPolicy& policy) {
    if (policy.deterministic()) {
        if (static_cast<int>(policy.choice.size()) != mdp.n_states)
            throw MdpError("policy length does not match state count");
        for (int s = 0; s < mdp.n_states; ++s)
            if (policy.choice[s] < 0 || policy.choice[s] >= mdp.n_actions)
                throw MdpError("policy action out of range at state " + std::to_string(s));
        return;
    }
    if (policy.probs.rows() != mdp.n_states || policy.probs.cols() != mdp.n_actions)
        throw MdpError("stochastic policy shape mismatch");
    for (int s = 0; s < mdp.n_states; ++s) {
        if (std::abs(policy.probs.row(s).sum() - 1.0) > 1e-12 ||
            policy.probs.row(s).minCoeff() < 0.0)
            throw MdpError("stochastic policy row " + std::to_string(s) +
                           " is not a distribution");
    }
}

Matrix induced_chain(const JointMDP& mdp, const StationaryPolicy& policy) {
    validate_policy(mdp, policy);
    Matrix chain = Matrix::Zero(mdp.n_states, mdp.n_states);
    if (policy.deterministic()) {
        for (int s = 0; s < mdp.n_states; ++s) chain.row(s) = mdp.kernel[policy.choice[s]].row(s);
        return chain;
    }
    for (int a = 0; a < mdp.n_actions; ++a)
        chain += policy.probs.col(a).asDiagonal() * mdp.kernel[a];
    return chain;
}

Vector state_reward_under(const JointMDP& mdp, const StationaryPolicy& policy) {
    Vector r(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        if (policy.deterministic()) {
            r(s) = mdp.reward(s, policy.choice[s]);
        } else {
            r(s) = mdp.reward.row(s).dot(policy.probs.row(s));
        }
    }
    return r;
}

double average_reward(const JointMDP& mdp, const StationaryPolicy& policy) {
    Matrix chain = induced_chain(mdp, policy);
    StationaryDistribution q = stationary_distribution(chain);  // throws NotErgodic if multichain
    return q.probs.dot(state_reward_under(mdp, policy));
}

GainBias relative_value_iteration(const JointMDP& mdp, double tol, int max_iter) {
    const int n = mdp.n_states;
    const double tau = 0.5;  // aperiodicity damping; gains/biases are tau-invariant
    Vector v = Vector::Zero(n);
    Matrix q_values(n, mdp.n_actions);

    double span = std::numeric_limits<double>::infinity();
    double mid = 0.0;
    int it = 0;
    for (it = 1; it <= max_iter; ++it) {
        for (int a = 0; a < mdp.n_actions; ++a)
            q_values.col(a) = mdp.reward.col(a) + mdp.kernel[a] * v;
        Vector w = (1.0 - tau) * v + tau * q_values.rowwise().maxCoeff();
        Vector diff = w - v;
        double lo = diff.minCoeff(), hi = diff.maxCoeff();
        span = hi - lo;
        mid = 0.5 * (hi + lo);
        v = w.array() - w(0);
        if (span <= tol) break;
    }
    if (span > tol) throw NoConvergence(max_iter);

    std::vector<int> greedy(n);
    for (int s = 0; s < n; ++s) {
        int best = 0;
        for (int a = 1; a < mdp.n_actions; ++a)
            if (q_values(s, a) > q_values(s, best)) best = a;  // lowest index wins ties
        greedy[s] = best;
    }
    GainBias out;
    out.gain = mid / tau;
    out.bias = v;
    out.policy = StationaryPolicy::det(std::move(greedy));
    out.iterations = it;
    out.residual_span = span;

    ChainClasses classes = chain_classes(induced_chain(mdp, out.policy));
    if (classes.closed_classes.size() != 1)
        throw NotErgodic("greedy policy induces " + std::to_string(classes.closed_classes.size()) +
                         " closed recurrent classes");
    return out;
}

double evaluate_from_start(const JointMDP& mdp, const StationaryPolicy& policy, int start) {
    if (start < 0 || start >= mdp.n_states) throw MdpError("start state out of range");
    Matrix chain = induced_chain(mdp, policy);
    Vector r = state_reward_under(mdp, policy);
    ChainClasses classes = chain_classes(chain);
    const int n_classes = static_cast<int>(classes.closed_classes.size());

    auto class_gain = [&](int c) {
        const std::vector<int>& members = classes.closed_classes[c];
        const int k = static_cast<int>(members.size());
        Matrix sub(k, k);
        Vector sub_r(k);
        for (int i = 0; i < k; ++i) {
            sub_r(i) = r(members[i]);
            for (int j = 0; j < k; ++j) sub(i, j) = chain(members[i], members[j]);
        }
        return stationary_distribution(sub).probs.dot(sub_r);
    };

    if (classes.class_of[start] >= 0) return class_gain(classes.class_of[start]);

    // Transient start: absorption probabilities into each closed class.
    std::vector<int> transient;
    for (int s = 0; s < mdp.n_states; ++s)
        if (classes.class_of[s] < 0) transient.push_back(s);
    const int t = static_cast<int>(transient.size());
    std::vector<int> t_index(mdp.n_states, -1);
    for (int i = 0; i < t; ++i) t_index[transient[i]] = i;

    Matrix q_block(t, t);
    Matrix b(t, n_classes);
    b.setZero();
    for (int i = 0; i < t; ++i) {
        for (int j = 0; j < t; ++j) q_block(i, j) = chain(transient[i], transient[j]);
        for (int s = 0; s < mdp.n_states; ++s)
            if (classes.class_of[s] >= 0) b(i, classes.class_of[s]) += chain(transient[i], s);
    }
    Matrix absorb = (Matrix::Identity(t, t) - q_block).partialPivLu().solve(b);
    double value = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        double p = absorb(t_index[start], c);
        if (p > 1e-15) value += p * class_gain(c);
    }
    return value;
}

std::vector<int> reachable_closed_set(const JointMDP& mdp, int start) {
    if (start < 0 || start >= mdp.n_states) throw MdpError("start state out of range");
    std::vector<bool> seen(mdp.n_states, false);
    std::vector<int> queue{start};
    seen[start] = true;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int s = queue[qi];
        for (int a = 0; a < mdp.n_actions; ++a) {
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                if (mdp.kernel[a](s, s2) > 0.0 && !seen[s2]) {
                    seen[s2] = true;
                    queue.push_back(s2);
                }
            }
        }
    }
    std::vector<int> states;
    for (int s = 0; s < mdp.n_states; ++s)
        if (seen[s]) states.push_back(s);
    return states;
}

RestrictedMDP restrict_mdp(const JointMDP& mdp, const std::vector<int>& states) {
    const int k = static_cast<int>(states.size());
    RestrictedMDP out;
    out.states = states;
    out.index_of.assign(mdp.n_states, -1);
    for (int i = 0; i < k; ++i) out.index_of[states[i]] = i;

    std::vector<Matrix> kernel(mdp.n_actions, Matrix::Zero(k, k));
    Matrix reward(k, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a) {
        for (int i = 0; i < k; ++i) {
            double mass = 0.0;
            for (int j = 0; j < k; ++j) {
                kernel[a](i, j) = mdp.kernel[a](states[i], states[j]);
                mass += kernel[a](i, j);
            }
            if (std::abs(mass - 1.0) > 1e-9)
                throw std::invalid_argument("state set is not action-closed: state " +
                                            std::to_string(states[i]) + " leaks mass " +
                                            std::to_string(1.0 - mass) + " under action " +
                                            std::to_string(a));
            kernel[a].row(i) /= mass;  // remove sub-1e-9 float drift
        }
    }
    for (int i = 0; i < k; ++i) reward.row(i) = mdp.reward.row(states[i]);
    out.mdp = JointMDP::from_tables(std::move(kernel), std::move(reward));
    return out;
}

}  // namespace mamdp

#include "mamdp/local_search.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <random>

#include "mamdp/errors.hpp"
#include "mamdp/markov.hpp"

namespace mamdp {

namespace {

/// Mixed-radix digits of every joint action, agent-major (agent 0 most
/// significant), one row per joint action index.
std::vector<std::vector<int>> action_digit_table(const FactoredSpec& spec) {
    const long long n_actions = spec.n_joint_actions();
    std::vector<std::vector<int>> digits(static_cast<std::size_t>(n_actions));
    for (long long a = 0; a < n_actions; ++a) digits[a] = decode_action(spec, static_cast<int>(a));
    return digits;
}

struct StateTables {
    std::vector<int> env;                     // per joint state
    std::vector<std::vector<int>> agent;      // [i][s] agent i's component
    std::vector<int> local;                   // env * |S_i| + own for the focal agent
    std::vector<long long> companion_combo;   // mixed-radix index over the others' states
    long long n_combos = 1;
};

StateTables state_tables(const FactoredSpec& spec, int focal) {
    const long long n_states = spec.n_joint_states();
    StateTables t;
    t.env.resize(n_states);
    t.agent.assign(spec.m, std::vector<int>(n_states));
    t.local.resize(n_states);
    t.companion_combo.resize(n_states);
    for (int j = 0; j < spec.m; ++j)
        if (j != focal) t.n_combos *= spec.agent_state_sizes[j];
    for (long long s = 0; s < n_states; ++s) {
        const JointState st = decode_state(spec, static_cast<int>(s));
        t.env[s] = st.env;
        long long combo = 0;
        for (int j = 0; j < spec.m; ++j) {
            t.agent[j][s] = st.agents[j];
            if (j != focal) combo = combo * spec.agent_state_sizes[j] + st.agents[j];
        }
        t.local[s] = st.env * spec.agent_state_sizes[focal] + st.agents[focal];
        t.companion_combo[s] = combo;
    }
    return t;
}

/// Stationary distribution of the focal agent's local chain under a
/// stochastic policy table (rows: env * |S_i| + own).
Vector local_occupancy(const JointMDP& local, const Matrix& probs) {
    return stationary_distribution(induced_chain(local, StationaryPolicy::stoch(probs))).probs;
}

/// Gain of a stochastic policy on a local model: stationary occupancy dotted
/// with the policy-averaged reward.
double stochastic_local_gain(const JointMDP& local, const Matrix& probs) {
    const Vector q = local_occupancy(local, probs);
    double gain = 0.0;
    for (int l = 0; l < local.n_states; ++l)
        gain += q(l) * local.reward.row(l).dot(probs.row(l));
    return gain;
}

Matrix one_hot_table(int n_rows, int n_actions, const std::vector<int>& choice) {
    Matrix t = Matrix::Zero(n_rows, n_actions);
    for (int r = 0; r < n_rows; ++r) t(r, choice[r]) = 1.0;
    return t;
}

/// Companion-state weights for one agent under the configured mode. Empty
/// means uniform. `occupancy` may be empty (before any estimate exists), in
/// which case ProductQhat falls back to uniform.
std::vector<double> companion_state_weights(const FactoredSpec& spec, int focal,
                                            const SearchConfig& config,
                                            const std::vector<Vector>& occupancy) {
    if (config.companion_mode == CompanionDistribution::Uniform) return {};

    long long n_combos = 1;
    for (int j = 0; j < spec.m; ++j)
        if (j != focal) n_combos *= spec.agent_state_sizes[j];

    if (config.companion_mode == CompanionDistribution::Sampled) {
        long long budget = config.sample_budget;
        if (budget <= 0) {
            int s_max = 1;
            for (int sz : spec.agent_state_sizes) s_max = std::max(s_max, sz);
            budget = std::max<long long>(1, spec.m * static_cast<long long>(s_max) * s_max / 2);
        }
        std::mt19937_64 rng(config.seed * 0x9e3779b97f4a7c15ULL + static_cast<unsigned>(focal) + 1);
        std::uniform_int_distribution<long long> pick(0, n_combos - 1);
        std::vector<double> weights(static_cast<std::size_t>(n_combos), 0.0);
        for (long long k = 0; k < budget; ++k) weights[pick(rng)] += 1.0 / budget;
        return weights;
    }

    // ProductQhat: product of the companions' total own-state marginals.
    if (occupancy.empty()) return {};
    const int env_size = spec.env_state_size;
    std::vector<Vector> marginal(spec.m);
    for (int j = 0; j < spec.m; ++j) {
        if (j == focal) continue;
        Vector mj = Vector::Zero(spec.agent_state_sizes[j]);
        for (int e = 0; e < env_size; ++e)
            for (int x = 0; x < spec.agent_state_sizes[j]; ++x)
                mj(x) += occupancy[j](e * spec.agent_state_sizes[j] + x);
        marginal[j] = mj;
    }
    std::vector<double> weights(static_cast<std::size_t>(n_combos));
    for (long long k = 0; k < n_combos; ++k) {
        long long rest = k;
        double w = 1.0;
        for (int j = spec.m - 1; j >= 0; --j) {
            if (j == focal) continue;
            const int sz = spec.agent_state_sizes[j];
            w *= marginal[j](rest % sz);
            rest /= sz;
        }
        weights[k] = w;
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (total > 0)
        for (double& w : weights) w /= total;
    return weights;
}

}  // namespace

StochasticLocalPolicies StochasticLocalPolicies::uniform(const FactoredSpec& spec) {
    StochasticLocalPolicies out;
    out.probs.reserve(spec.m);
    for (int i = 0; i < spec.m; ++i)
        out.probs.push_back(Matrix::Constant(spec.env_state_size * spec.agent_state_sizes[i],
                                             spec.agent_action_sizes[i],
                                             1.0 / spec.agent_action_sizes[i]));
    return out;
}

StochasticLocalPolicies StochasticLocalPolicies::from_deterministic(const FactoredSpec& spec,
                                                                    const LocalPolicySet& policies) {
    policies.validate_against(spec);
    StochasticLocalPolicies out;
    out.probs.reserve(spec.m);
    for (int i = 0; i < spec.m; ++i)
        out.probs.push_back(one_hot_table(spec.env_state_size * spec.agent_state_sizes[i],
                                          spec.agent_action_sizes[i], policies.tables[i]));
    return out;
}

namespace {

/// Collapses the joint kernel for several agents in one pass over the joint
/// kernel's columns (the dominant memory traffic), sharing the read between
/// agents. `weights[k]` may be empty for uniform companion states.
std::vector<LocalMDP> collapse_agents(const JointMDP& mdp, const FactoredSpec& spec,
                                      const std::vector<int>& agents,
                                      const StochasticLocalPolicies& companion_policies,
                                      const std::vector<std::vector<double>>& weights,
                                      int iteration_tag) {
    const int n_states = mdp.n_states;
    const int n_actions = mdp.n_actions;
    const std::vector<std::vector<int>> adig = action_digit_table(spec);
    const std::size_t k_agents = agents.size();

    std::vector<StateTables> tab(k_agents);
    std::vector<int> n_local(k_agents), own_actions(k_agents);
    std::vector<double> uniform_state_w(k_agents);
    std::vector<Matrix> acc(k_agents), proj(k_agents);
    for (std::size_t k = 0; k < k_agents; ++k) {
        const int i = agents[k];
        if (i < 0 || i >= spec.m) throw ComponentOutOfRange("agent index out of range");
        tab[k] = state_tables(spec, i);
        if (!weights[k].empty() &&
            weights[k].size() != static_cast<std::size_t>(tab[k].n_combos))
            throw LengthMismatch("companion weight vector does not match the companion state space");
        n_local[k] = spec.env_state_size * spec.agent_state_sizes[i];
        own_actions[k] = spec.agent_action_sizes[i];
        uniform_state_w[k] = 1.0 / static_cast<double>(tab[k].n_combos);
        acc[k] = Matrix::Zero(n_local[k] * own_actions[k], n_local[k]);
        proj[k] = Matrix(n_states, n_local[k]);
    }

    for (int a = 0; a < n_actions; ++a) {
        // Project joint next states down to each agent's local ones; the
        // kernel column is read once and scattered to every agent's buffer.
        for (std::size_t k = 0; k < k_agents; ++k) proj[k].setZero();
        for (int s2 = 0; s2 < n_states; ++s2) {
            const auto col = mdp.kernel[a].col(s2);
            for (std::size_t k = 0; k < k_agents; ++k)
                proj[k].col(tab[k].local[s2]) += col;
        }
        const std::vector<int>& dig = adig[a];
        for (std::size_t k = 0; k < k_agents; ++k) {
            const int i = agents[k];
            for (int s = 0; s < n_states; ++s) {
                const int e = tab[k].env[s];
                double w = weights[k].empty()
                               ? uniform_state_w[k]
                               : weights[k][static_cast<std::size_t>(tab[k].companion_combo[s])];
                if (w == 0.0) continue;
                for (int j = 0; j < spec.m && w > 0.0; ++j) {
                    if (j == i) continue;
                    w *= companion_policies.probs[j](
                        e * spec.agent_state_sizes[j] + tab[k].agent[j][s], dig[j]);
                }
                if (w == 0.0) continue;
                acc[k].row(tab[k].local[s] * own_actions[k] + dig[i]) += w * proj[k].row(s);
            }
        }
    }

    std::vector<LocalMDP> out(k_agents);
    for (std::size_t k = 0; k < k_agents; ++k) {
        out[k].agent = agents[k];
        out[k].iteration_tag = iteration_tag;
        out[k].mdp.n_states = n_local[k];
        out[k].mdp.n_actions = own_actions[k];
        out[k].mdp.kernel.assign(own_actions[k], Matrix::Zero(n_local[k], n_local[k]));
        out[k].mdp.reward = Matrix::Zero(n_local[k], own_actions[k]);
        for (int l = 0; l < n_local[k]; ++l) {
            for (int a = 0; a < own_actions[k]; ++a) {
                Vector row = acc[k].row(l * own_actions[k] + a);
                const double mass = row.sum();
                if (mass <= 0.0) {
                    row.setConstant(1.0 / n_local[k]);
                    ++out[k].renormalized_rows;
                } else {
                    if (std::abs(mass - 1.0) > 1e-9) ++out[k].renormalized_rows;
                    row /= mass;
                }
                out[k].mdp.kernel[a].row(l) = row;
            }
        }
    }
    return out;
}

}  // namespace

LocalMDP local_transition(const JointMDP& mdp, const FactoredSpec& spec, int agent,
                          const StochasticLocalPolicies& companion_policies,
                          const std::vector<double>& companion_weights, int iteration_tag) {
    spec.validate_against(mdp);
    return collapse_agents(mdp, spec, {agent}, companion_policies, {companion_weights},
                           iteration_tag)
        .front();
}

Matrix local_reward(const JointMDP& mdp, const FactoredSpec& spec, int agent,
                    const StochasticLocalPolicies& companion_policies,
                    const std::vector<Vector>& occupancy) {
    spec.validate_against(mdp);
    if (agent < 0 || agent >= spec.m) throw ComponentOutOfRange("agent index out of range");
    if (occupancy.size() != static_cast<std::size_t>(spec.m))
        throw LengthMismatch("need one occupancy vector per agent");

    const int env_size = spec.env_state_size;
    const int s_i = spec.agent_state_sizes[agent];
    const int a_i = spec.agent_action_sizes[agent];
    const int n_local = env_size * s_i;

    // Environment-conditional companion weights q_j(x_j | e); uniform fallback
    // on environment slices where the estimate carries no mass.
    std::vector<Matrix> cond(spec.m);
    for (int j = 0; j < spec.m; ++j) {
        if (j == agent) continue;
        const int s_j = spec.agent_state_sizes[j];
        if (occupancy[j].size() != env_size * s_j)
            throw LengthMismatch("occupancy vector length must be |E| * |S_j|");
        Matrix t(env_size, s_j);
        for (int e = 0; e < env_size; ++e) {
            double mass = 0.0;
            for (int x = 0; x < s_j; ++x) mass += occupancy[j](e * s_j + x);
            for (int x = 0; x < s_j; ++x)
                t(e, x) = mass > 1e-15 ? occupancy[j](e * s_j + x) / mass : 1.0 / s_j;
        }
        cond[j] = t;
    }

    const StateTables tab = state_tables(spec, agent);
    const std::vector<std::vector<int>> adig = action_digit_table(spec);
    Matrix value = Matrix::Zero(n_local, a_i);
    Matrix weight = Matrix::Zero(n_local, a_i);
    for (int s = 0; s < mdp.n_states; ++s) {
        const int e = tab.env[s];
        double state_w = 1.0;
        for (int j = 0; j < spec.m; ++j)
            if (j != agent) state_w *= cond[j](e, tab.agent[j][s]);
        if (state_w == 0.0) continue;
        for (int a = 0; a < mdp.n_actions; ++a) {
            double w = state_w;
            for (int j = 0; j < spec.m && w > 0.0; ++j) {
                if (j == agent) continue;
                w *= companion_policies.probs[j](e * spec.agent_state_sizes[j] + tab.agent[j][s],
                                                 adig[a][j]);
            }
            if (w == 0.0) continue;
            value(tab.local[s], adig[a][agent]) += w * mdp.reward(s, a);
            weight(tab.local[s], adig[a][agent]) += w;
        }
    }
    for (int l = 0; l < n_local; ++l)
        for (int a = 0; a < a_i; ++a)
            value(l, a) = weight(l, a) > 1e-15 ? value(l, a) / weight(l, a) : 0.0;
    return value;
}

SearchTrace local_policy_search(const JointMDP& mdp, const FactoredSpec& spec,
                                const SearchConfig& config) {
    spec.validate_against(mdp);
    if (config.epsilon < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
    if (config.max_rounds < 1) throw std::invalid_argument("max_rounds must be at least 1");

    const int m = spec.m;
    const int env_size = spec.env_state_size;
    using clock = std::chrono::steady_clock;

    StochasticLocalPolicies uniform = StochasticLocalPolicies::uniform(spec);
    std::vector<std::optional<std::vector<int>>> adopted(m);

    SearchTrace trace;
    trace.local_mdps.assign(m, LocalMDP{});

    // The local kernels are collapsed once up front under the uniform initial
    // policies; only the reward tables are rebuilt as estimates move. All
    // agents are collapsed in one shared pass over the joint kernel.
    std::vector<int> all_agents(m);
    std::vector<std::vector<double>> all_weights(m);
    for (int i = 0; i < m; ++i) {
        all_agents[i] = i;
        all_weights[i] = companion_state_weights(spec, i, config, {});
    }
    std::vector<LocalMDP> kernels = collapse_agents(mdp, spec, all_agents, uniform, all_weights, 0);
    std::vector<Vector> occupancy(m);
    for (int i = 0; i < m; ++i) occupancy[i] = local_occupancy(kernels[i].mdp, uniform.probs[i]);

    auto policy_table = [&](int j) -> Matrix {
        if (!adopted[j]) return uniform.probs[j];
        return one_hot_table(env_size * spec.agent_state_sizes[j], spec.agent_action_sizes[j],
                             *adopted[j]);
    };

    int rounds = 0;
    while (rounds < config.max_rounds) {
        ++rounds;
        bool improved = false;
        for (int i = 0; i < m; ++i) {
            const auto t0 = clock::now();
            StochasticLocalPolicies current;
            current.probs.reserve(m);
            for (int j = 0; j < m; ++j) current.probs.push_back(policy_table(j));

            if (config.refresh_local_kernels)
                kernels[i] = local_transition(
                    mdp, spec, i, current, companion_state_weights(spec, i, config, occupancy),
                    rounds);

            LocalMDP local = kernels[i];
            local.iteration_tag = rounds;
            local.mdp.reward = local_reward(mdp, spec, i, current, occupancy);
            local.mdp.r_min = local.mdp.reward.minCoeff();
            local.mdp.r_max = local.mdp.reward.maxCoeff();

            const GainBias solved = relative_value_iteration(local.mdp, config.tol);
            const double candidate = solved.gain;
            const double incumbent = stochastic_local_gain(local.mdp, current.probs[i]);
            trace.local_mdps[i] = local;

            const bool first_time = !adopted[i].has_value();
            const bool changed = first_time || solved.policy.choice != *adopted[i];
            const bool strict = candidate > (1.0 + config.epsilon) * incumbent + 1e-12;
            const bool adopt = changed && (strict || (first_time && candidate >= incumbent - 1e-12));

            SearchRecord rec;
            rec.round = rounds;
            rec.agent = i;
            rec.incumbent_gain = incumbent;
            rec.candidate_gain = candidate;
            rec.adopted = adopt;
            rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
            trace.records.push_back(rec);

            if (adopt) {
                adopted[i] = solved.policy.choice;
                occupancy[i] = local_occupancy(local.mdp, policy_table(i));
                improved = true;
                break;  // restart the sweep from agent 0
            }
        }
        if (!improved) {
            trace.termination = SearchTermination::Converged;
            trace.rounds = rounds;
            trace.final_occupancy = occupancy;
            trace.final_policies.tables.resize(m);
            for (int i = 0; i < m; ++i)
                trace.final_policies.tables[i] =
                    adopted[i] ? *adopted[i]
                               : std::vector<int>(env_size * spec.agent_state_sizes[i], 0);
            return trace;
        }
    }
    trace.termination = SearchTermination::RoundCap;
    trace.rounds = rounds;
    trace.final_occupancy = occupancy;
    trace.final_policies.tables.resize(m);
    for (int i = 0; i < m; ++i)
        trace.final_policies.tables[i] =
            adopted[i] ? *adopted[i] : std::vector<int>(env_size * spec.agent_state_sizes[i], 0);
    return trace;
}

double evaluate_on_joint(const JointMDP& mdp, const FactoredSpec& spec,
                         const LocalPolicySet& policies, int start_state) {
    return evaluate_from_start(mdp, lift_policy(spec, policies), start_state);
}

}  // namespace mamdp

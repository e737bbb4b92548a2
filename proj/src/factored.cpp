#include "mamdp/factored.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace mamdp {

namespace {

long long checked_product(const std::vector<int>& sizes, int extra = 1) {
    long long prod = extra;
    for (int s : sizes) {
        if (s < 1) throw ComponentOutOfRange("component size must be >= 1");
        prod *= s;
        if (prod > (1LL << 31)) throw ComponentOutOfRange("joint space too large to index");
    }
    return prod;
}

/// Enumerates mixed-radix tuples in place; returns false after the last one.
bool next_tuple(std::vector<int>& digits, const std::vector<int>& sizes) {
    for (int k = static_cast<int>(digits.size()) - 1; k >= 0; --k) {
        if (++digits[k] < sizes[k]) return true;
        digits[k] = 0;
    }
    return false;
}

}  // namespace

int FactoredSpec::n_joint_states() const {
    return static_cast<int>(checked_product(agent_state_sizes, env_state_size));
}

int FactoredSpec::n_joint_actions() const {
    return static_cast<int>(checked_product(agent_action_sizes));
}

void FactoredSpec::validate_against(const JointMDP& mdp) const {
    if (m != static_cast<int>(agent_state_sizes.size()) ||
        m != static_cast<int>(agent_action_sizes.size()))
        throw ComponentOutOfRange("agent size lists must have one entry per agent");
    if (env_state_size < 1) throw ComponentOutOfRange("env_state_size must be >= 1");
    if (n_joint_states() != mdp.n_states)
        throw ComponentOutOfRange("factored state sizes do not multiply to the joint state count");
    if (n_joint_actions() != mdp.n_actions)
        throw ComponentOutOfRange(
            "factored action sizes do not multiply to the joint action count");
    if (env_kernel) {
        if (env_kernel->rows() != env_state_size || env_kernel->cols() != env_state_size)
            throw ComponentOutOfRange("env_kernel shape must match env_state_size");
        for (int e = 0; e < env_state_size; ++e)
            if (std::abs(env_kernel->row(e).sum() - 1.0) > 1e-12)
                throw NonStochasticRow(e, -1, env_kernel->row(e).sum());
    }
}

int encode_joint(const std::vector<int>& sizes, const std::vector<int>& components) {
    if (sizes.size() != components.size())
        throw ComponentOutOfRange("component count does not match size count");
    long long index = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (components[k] < 0 || components[k] >= sizes[k])
            throw ComponentOutOfRange("component " + std::to_string(k) + " value " +
                                      std::to_string(components[k]) + " outside [0, " +
                                      std::to_string(sizes[k]) + ")");
        index = index * sizes[k] + components[k];
    }
    return static_cast<int>(index);
}

std::vector<int> decode_joint(const std::vector<int>& sizes, int index) {
    if (index < 0 || static_cast<long long>(index) >= checked_product(sizes))
        throw ComponentOutOfRange("joint index out of range");
    std::vector<int> components(sizes.size());
    long long rem = index;
    for (int k = static_cast<int>(sizes.size()) - 1; k >= 0; --k) {
        components[k] = static_cast<int>(rem % sizes[k]);
        rem /= sizes[k];
    }
    return components;
}

namespace {

std::vector<int> state_radix(const FactoredSpec& spec) {
    std::vector<int> sizes;
    sizes.reserve(spec.m + 1);
    sizes.push_back(spec.env_state_size);
    sizes.insert(sizes.end(), spec.agent_state_sizes.begin(), spec.agent_state_sizes.end());
    return sizes;
}

}  // namespace

int encode_state(const FactoredSpec& spec, const JointState& state) {
    std::vector<int> components;
    components.reserve(spec.m + 1);
    components.push_back(state.env);
    components.insert(components.end(), state.agents.begin(), state.agents.end());
    return encode_joint(state_radix(spec), components);
}

JointState decode_state(const FactoredSpec& spec, int index) {
    std::vector<int> components = decode_joint(state_radix(spec), index);
    JointState state;
    state.env = components[0];
    state.agents.assign(components.begin() + 1, components.end());
    return state;
}

int encode_action(const FactoredSpec& spec, const std::vector<int>& actions) {
    return encode_joint(spec.agent_action_sizes, actions);
}

std::vector<int> decode_action(const FactoredSpec& spec, int index) {
    return decode_joint(spec.agent_action_sizes, index);
}

void LocalPolicySet::validate_against(const FactoredSpec& spec) const {
    if (static_cast<int>(tables.size()) != spec.m)
        throw ComponentOutOfRange("one policy table required per agent");
    for (int i = 0; i < spec.m; ++i) {
        const std::size_t expect =
            static_cast<std::size_t>(spec.env_state_size) * spec.agent_state_sizes[i];
        if (tables[i].size() != expect)
            throw ComponentOutOfRange("policy table for agent " + std::to_string(i) +
                                      " has wrong length");
        for (int a : tables[i])
            if (a < 0 || a >= spec.agent_action_sizes[i])
                throw ComponentOutOfRange("policy table for agent " + std::to_string(i) +
                                          " holds an invalid action index");
    }
}

StationaryPolicy lift_policy(const FactoredSpec& spec, const LocalPolicySet& policies) {
    policies.validate_against(spec);
    const int S = spec.n_joint_states();
    std::vector<int> choice(S);
    for (int s = 0; s < S; ++s) {
        JointState st = decode_state(spec, s);
        std::vector<int> actions(spec.m);
        for (int i = 0; i < spec.m; ++i) actions[i] = policies.action(spec, i, st.env, st.agents[i]);
        choice[s] = encode_action(spec, actions);
    }
    return StationaryPolicy::det(std::move(choice));
}

Vector conditional_next_state(const JointMDP& mdp, const FactoredSpec& spec, int agent, int s,
                              int a, const CompanionNext& others_next) {
    const int own_size = spec.agent_state_sizes[agent];
    JointState next;
    next.env = others_next.env_next;
    next.agents = others_next.agent_next;
    Vector cond(own_size);
    for (int x = 0; x < own_size; ++x) {
        next.agents[agent] = x;
        cond(x) = mdp.p(s, a, encode_state(spec, next));
    }
    const double mass = cond.sum();
    if (mass <= 0.0)
        throw ZeroProbabilityConditioning(
            "companion next-state context has probability zero under P(s, a, .)");
    return cond / mass;
}

namespace {

/// Exact-value key for deduplicating conditional distributions.
std::string distribution_key(const Vector& v) {
    std::string key;
    key.reserve(v.size() * 18);
    char buf[32];
    for (int i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.15e|", v(i));
        key += buf;
    }
    return key;
}

struct Context {
    int s, a;
    CompanionNext next;
};

double tv_dense(const Vector& a, const Vector& b) { return 0.5 * (a - b).cwiseAbs().sum(); }

}  // namespace

DeltaEstimate measure_delta(const JointMDP& mdp, const FactoredSpec& spec, DeltaMode mode,
                            long long budget, std::uint64_t seed) {
    spec.validate_against(mdp);
    DeltaEstimate est;
    est.value = 0.0;

    // Sizes of the companion enumeration per (agent, own state, own action).
    auto contexts_per_tuple = [&](int agent) {
        long long n = spec.env_state_size;  // env digit of the current state
        for (int j = 0; j < spec.m; ++j)
            if (j != agent) n *= spec.agent_state_sizes[j];
        for (int j = 0; j < spec.m; ++j)
            if (j != agent) n *= spec.agent_action_sizes[j];
        long long next = spec.env_state_size;
        for (int j = 0; j < spec.m; ++j)
            if (j != agent) next *= spec.agent_state_sizes[j];
        return n * next;
    };

    const bool exhaustive_feasible = [&] {
        for (int i = 0; i < spec.m; ++i)
            if (contexts_per_tuple(i) > budget) return false;
        return true;
    }();
    if (mode == DeltaMode::Exhaustive && !exhaustive_feasible)
        throw BudgetExceeded("conditional-context count exceeds the exhaustive budget");

    const std::vector<int> srad = state_radix(spec);

    if (exhaustive_feasible) {
        // Full enumeration (also used for sampled mode when the budget covers
        // the space, so a generous sampled budget reproduces the exact value).
        for (int agent = 0; agent < spec.m; ++agent) {
            const int own_states = spec.agent_state_sizes[agent];
            const int own_actions = spec.agent_action_sizes[agent];
            for (int own = 0; own < own_states; ++own) {
                for (int act = 0; act < own_actions; ++act) {
                    // Distinct conditional distributions seen for this tuple.
                    std::map<std::string, Context> reps;
                    std::vector<int> sdig(srad.size(), 0);
                    do {
                        if (sdig[1 + agent] != own) continue;
                        const int s = encode_joint(srad, sdig);
                        std::vector<int> adig(spec.m, 0);
                        do {
                            if (adig[agent] != act) continue;
                            const int a = encode_joint(spec.agent_action_sizes, adig);
                            std::vector<int> ndig(srad.size(), 0);
                            do {
                                CompanionNext ctx;
                                ctx.env_next = ndig[0];
                                ctx.agent_next.assign(ndig.begin() + 1, ndig.end());
                                Vector cond;
                                try {
                                    cond = conditional_next_state(mdp, spec, agent, s, a, ctx);
                                } catch (const ZeroProbabilityConditioning&) {
                                    continue;  // undefined context: skipped
                                }
                                reps.emplace(distribution_key(cond), Context{s, a, ctx});
                            } while (next_tuple(ndig, srad));
                        } while (next_tuple(adig, spec.agent_action_sizes));
                    } while (next_tuple(sdig, srad));

                    // Pairwise total variation across the distinct conditionals.
                    std::vector<std::pair<Vector, Context>> dists;
                    dists.reserve(reps.size());
                    for (auto& [key, ctx] : reps) {
                        Vector cond = conditional_next_state(mdp, spec, agent, ctx.s, ctx.a,
                                                             ctx.next);
                        dists.emplace_back(std::move(cond), ctx);
                    }
                    for (std::size_t p = 0; p < dists.size(); ++p) {
                        for (std::size_t r = p + 1; r < dists.size(); ++r) {
                            const double tv = tv_dense(dists[p].first, dists[r].first);
                            if (tv > est.value) {
                                est.value = tv;
                                est.witness.agent = agent;
                                est.witness.own_state = own;
                                est.witness.own_action = act;
                                est.witness.state_a = dists[p].second.s;
                                est.witness.action_a = dists[p].second.a;
                                est.witness.next_a = dists[p].second.next;
                                est.witness.state_b = dists[r].second.s;
                                est.witness.action_b = dists[r].second.a;
                                est.witness.next_b = dists[r].second.next;
                            }
                        }
                    }
                }
            }
        }
        est.exhaustive = (mode == DeltaMode::Exhaustive);
        est.n_samples = (mode == DeltaMode::Sampled) ? budget : 0;
        return est;
    }

    // Sampled lower bound: random context pairs sharing (agent, own, action).
    std::mt19937_64 rng(seed);
    auto rand_int = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    long long drawn = 0;
    while (drawn < budget) {
        ++drawn;
        const int agent = rand_int(spec.m);
        const int own = rand_int(spec.agent_state_sizes[agent]);
        const int act = rand_int(spec.agent_action_sizes[agent]);
        auto draw_context = [&]() -> std::pair<bool, std::pair<Context, Vector>> {
            std::vector<int> sdig(srad.size());
            sdig[0] = rand_int(spec.env_state_size);
            for (int j = 0; j < spec.m; ++j) sdig[1 + j] = rand_int(spec.agent_state_sizes[j]);
            sdig[1 + agent] = own;
            std::vector<int> adig(spec.m);
            for (int j = 0; j < spec.m; ++j) adig[j] = rand_int(spec.agent_action_sizes[j]);
            adig[agent] = act;
            CompanionNext ctx;
            ctx.env_next = rand_int(spec.env_state_size);
            ctx.agent_next.resize(spec.m);
            for (int j = 0; j < spec.m; ++j) ctx.agent_next[j] = rand_int(spec.agent_state_sizes[j]);
            const int s = encode_joint(srad, sdig);
            const int a = encode_joint(spec.agent_action_sizes, adig);
            try {
                Vector cond = conditional_next_state(mdp, spec, agent, s, a, ctx);
                return {true, {Context{s, a, ctx}, std::move(cond)}};
            } catch (const ZeroProbabilityConditioning&) {
                return {false, {}};
            }
        };
        auto first = draw_context();
        auto second = draw_context();
        if (!first.first || !second.first) continue;
        const double tv = tv_dense(first.second.second, second.second.second);
        if (tv > est.value) {
            est.value = tv;
            est.witness.agent = agent;
            est.witness.own_state = own;
            est.witness.own_action = act;
            est.witness.state_a = first.second.first.s;
            est.witness.action_a = first.second.first.a;
            est.witness.next_a = first.second.first.next;
            est.witness.state_b = second.second.first.s;
            est.witness.action_b = second.second.first.a;
            est.witness.next_b = second.second.first.next;
        }
    }
    est.exhaustive = false;
    est.n_samples = budget;
    return est;
}

JointMDP build_ti_surrogate(const FactoredSpec& spec,
                            const std::vector<std::vector<Matrix>>& per_agent_kernels,
                            const Matrix& reward) {
    if (spec.env_state_size != 1)
        throw ComponentOutOfRange(
            "product surrogate construction requires an environment-free spec");
    if (static_cast<int>(per_agent_kernels.size()) != spec.m)
        throw ComponentOutOfRange("one kernel tensor required per agent");
    for (int i = 0; i < spec.m; ++i) {
        if (static_cast<int>(per_agent_kernels[i].size()) != spec.agent_action_sizes[i])
            throw ComponentOutOfRange("agent kernel tensor has wrong action count");
        for (const Matrix& slice : per_agent_kernels[i]) {
            if (slice.rows() != spec.agent_state_sizes[i] ||
                slice.cols() != spec.agent_state_sizes[i])
                throw ComponentOutOfRange("agent kernel slice has wrong shape");
            for (int x = 0; x < slice.rows(); ++x)
                if (std::abs(slice.row(x).sum() - 1.0) > 1e-12)
                    throw NonStochasticRow(x, -1, slice.row(x).sum());
        }
    }

    const int S = spec.n_joint_states();
    const int A = spec.n_joint_actions();
    std::vector<Matrix> kernel(A, Matrix::Zero(S, S));
    for (int a = 0; a < A; ++a) {
        const std::vector<int> adig = decode_action(spec, a);
        for (int s = 0; s < S; ++s) {
            const JointState st = decode_state(spec, s);
            for (int s2 = 0; s2 < S; ++s2) {
                const JointState nx = decode_state(spec, s2);
                double prob = 1.0;
                for (int i = 0; i < spec.m; ++i)
                    prob *= per_agent_kernels[i][adig[i]](st.agents[i], nx.agents[i]);
                kernel[a](s, s2) = prob;
            }
        }
    }
    JointMDP surrogate = JointMDP::from_tables(std::move(kernel), reward);
    validate_mdp(surrogate);
    return surrogate;
}

AveragedKernels averaged_kernels(const JointMDP& mdp, const FactoredSpec& spec) {
    spec.validate_against(mdp);
    const int S = mdp.n_states;
    const int A = mdp.n_actions;
    const int E = spec.env_state_size;

    AveragedKernels out;
    out.per_agent.resize(spec.m);
    for (int i = 0; i < spec.m; ++i)
        out.per_agent[i].assign(spec.agent_action_sizes[i],
                                Matrix::Zero(spec.agent_state_sizes[i], spec.agent_state_sizes[i]));
    out.env = Matrix::Zero(E, E);
    std::vector<Matrix> agent_weights(spec.m);  // context counts for normalization
    for (int i = 0; i < spec.m; ++i)
        agent_weights[i] =
            Matrix::Zero(spec.agent_state_sizes[i], spec.agent_action_sizes[i]);
    Vector env_weight = Vector::Zero(E);

    for (int s = 0; s < S; ++s) {
        const JointState st = decode_state(spec, s);
        for (int a = 0; a < A; ++a) {
            const std::vector<int> adig = decode_action(spec, a);
            for (int s2 = 0; s2 < S; ++s2) {
                const double prob = mdp.p(s, a, s2);
                if (prob == 0.0) continue;
                const JointState nx = decode_state(spec, s2);
                for (int i = 0; i < spec.m; ++i)
                    out.per_agent[i][adig[i]](st.agents[i], nx.agents[i]) += prob;
                out.env(st.env, nx.env) += prob;
            }
            for (int i = 0; i < spec.m; ++i) agent_weights[i](st.agents[i], adig[i]) += 1.0;
            env_weight(st.env) += 1.0;
        }
    }
    for (int i = 0; i < spec.m; ++i)
        for (int ai = 0; ai < spec.agent_action_sizes[i]; ++ai)
            for (int x = 0; x < spec.agent_state_sizes[i]; ++x)
                out.per_agent[i][ai].row(x) /= agent_weights[i](x, ai);
    for (int e = 0; e < E; ++e) out.env.row(e) /= env_weight(e);
    return out;
}

JointMDP build_averaged_surrogate(const JointMDP& mdp, const FactoredSpec& spec) {
    const AveragedKernels avg = averaged_kernels(mdp, spec);
    if (spec.env_state_size == 1) return build_ti_surrogate(spec, avg.per_agent, mdp.reward);

    const int S = spec.n_joint_states();
    const int A = spec.n_joint_actions();
    std::vector<Matrix> kernel(A, Matrix::Zero(S, S));
    for (int a = 0; a < A; ++a) {
        const std::vector<int> adig = decode_action(spec, a);
        for (int s = 0; s < S; ++s) {
            const JointState st = decode_state(spec, s);
            for (int s2 = 0; s2 < S; ++s2) {
                const JointState nx = decode_state(spec, s2);
                double prob = avg.env(st.env, nx.env);
                for (int i = 0; i < spec.m; ++i)
                    prob *= avg.per_agent[i][adig[i]](st.agents[i], nx.agents[i]);
                kernel[a](s, s2) = prob;
            }
        }
    }
    JointMDP surrogate = JointMDP::from_tables(std::move(kernel), mdp.reward);
    validate_mdp(surrogate);
    return surrogate;
}

}  // namespace mamdp

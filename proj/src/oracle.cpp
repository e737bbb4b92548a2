#include "mamdp/oracle.hpp"

#include <limits>
#include <thread>

#include "mamdp/errors.hpp"
#include "mamdp/local_search.hpp"

namespace mamdp {

namespace {

/// Saturating product accumulator for tuple counting.
long long saturating_mul(long long a, long long b) {
    if (a == 0 || b == 0) return 0;
    if (a > std::numeric_limits<long long>::max() / b)
        return std::numeric_limits<long long>::max();
    return a * b;
}

/// Number of free table rows across all agents and the per-row action counts,
/// flattened agent-major then row-major — the digit layout of a tuple index.
struct TupleLayout {
    std::vector<int> radix;          // action count for each flattened row
    std::vector<int> agent_of_row;   // owning agent per flattened row
    std::vector<int> row_in_agent;   // row index inside the agent's table
};

TupleLayout tuple_layout(const FactoredSpec& spec) {
    TupleLayout layout;
    for (int i = 0; i < spec.m; ++i) {
        const int rows = spec.env_state_size * spec.agent_state_sizes[i];
        for (int r = 0; r < rows; ++r) {
            layout.radix.push_back(spec.agent_action_sizes[i]);
            layout.agent_of_row.push_back(i);
            layout.row_in_agent.push_back(r);
        }
    }
    return layout;
}

/// Decodes a tuple index (most-significant digit first) into policy tables.
LocalPolicySet decode_tuple(const FactoredSpec& spec, const TupleLayout& layout, long long index) {
    LocalPolicySet policies;
    policies.tables.resize(spec.m);
    for (int i = 0; i < spec.m; ++i)
        policies.tables[i].assign(spec.env_state_size * spec.agent_state_sizes[i], 0);
    for (int d = static_cast<int>(layout.radix.size()) - 1; d >= 0; --d) {
        policies.tables[layout.agent_of_row[d]][layout.row_in_agent[d]] =
            static_cast<int>(index % layout.radix[d]);
        index /= layout.radix[d];
    }
    return policies;
}

struct ShardResult {
    double best_value = -std::numeric_limits<double>::infinity();
    long long best_index = -1;
    long long n_evaluated = 0;
    long long n_skipped = 0;
};

ShardResult scan_range(const JointMDP& mdp, const FactoredSpec& spec, const TupleLayout& layout,
                       int start_state, long long lo, long long hi) {
    ShardResult out;
    for (long long t = lo; t < hi; ++t) {
        const LocalPolicySet policies = decode_tuple(spec, layout, t);
        double value;
        try {
            value = evaluate_on_joint(mdp, spec, policies, start_state);
        } catch (const MdpError&) {
            ++out.n_skipped;
            continue;
        }
        ++out.n_evaluated;
        if (value > out.best_value) {
            out.best_value = value;
            out.best_index = t;
        }
    }
    return out;
}

}  // namespace

long long count_local_policy_tuples(const FactoredSpec& spec) {
    long long count = 1;
    for (int i = 0; i < spec.m; ++i) {
        const int rows = spec.env_state_size * spec.agent_state_sizes[i];
        for (int r = 0; r < rows; ++r)
            count = saturating_mul(count, spec.agent_action_sizes[i]);
    }
    return count;
}

GlobalSolution global_baseline(const JointMDP& mdp, int start_state, double tol, int max_iter) {
    validate_mdp(mdp);
    if (start_state < 0 || start_state >= mdp.n_states)
        throw ComponentOutOfRange("start state out of range");

    const std::vector<int> closed = reachable_closed_set(mdp, start_state);
    if (static_cast<int>(closed.size()) == mdp.n_states) {
        GainBias full = relative_value_iteration(mdp, tol, max_iter);
        return GlobalSolution{full, full.gain};
    }

    // The start state cannot leave this communicating class under any policy,
    // so the start-aware optimum is the optimum of the restricted model.
    RestrictedMDP sub = restrict_mdp(mdp, closed);
    GainBias inner = relative_value_iteration(sub.mdp, tol, max_iter);

    GainBias expanded;
    expanded.gain = inner.gain;
    expanded.iterations = inner.iterations;
    expanded.residual_span = inner.residual_span;
    expanded.bias = Vector::Zero(mdp.n_states);
    std::vector<int> choice(mdp.n_states, 0);
    for (std::size_t k = 0; k < closed.size(); ++k) {
        expanded.bias(closed[k]) = inner.bias(static_cast<int>(k));
        choice[closed[k]] = inner.policy.choice[k];
    }
    expanded.policy = StationaryPolicy::det(std::move(choice));
    return GlobalSolution{std::move(expanded), inner.gain};
}

BruteForceResult brute_force_local(const JointMDP& mdp, const FactoredSpec& spec, int start_state,
                                   long long cap, int jobs) {
    spec.validate_against(mdp);
    if (start_state < 0 || start_state >= mdp.n_states)
        throw ComponentOutOfRange("start state out of range");
    if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");

    const long long total = count_local_policy_tuples(spec);
    if (total > cap) throw CapExceeded(total);
    const TupleLayout layout = tuple_layout(spec);

    std::vector<ShardResult> shards;
    if (jobs == 1 || total < 2 * jobs) {
        shards.push_back(scan_range(mdp, spec, layout, start_state, 0, total));
    } else {
        shards.resize(jobs);
        std::vector<std::thread> workers;
        const long long chunk = (total + jobs - 1) / jobs;
        for (int w = 0; w < jobs; ++w) {
            const long long lo = w * chunk;
            const long long hi = std::min(total, lo + chunk);
            workers.emplace_back([&, w, lo, hi] {
                shards[w] = scan_range(mdp, spec, layout, start_state, lo, hi);
            });
        }
        for (std::thread& t : workers) t.join();
    }

    // Deterministic merge: highest value wins; equal values resolve to the
    // smallest tuple index, which is the lexicographically smallest tuple.
    ShardResult merged;
    for (const ShardResult& shard : shards) {
        merged.n_evaluated += shard.n_evaluated;
        merged.n_skipped += shard.n_skipped;
        if (shard.best_index < 0) continue;
        if (shard.best_value > merged.best_value ||
            (shard.best_value == merged.best_value && shard.best_index < merged.best_index)) {
            merged.best_value = shard.best_value;
            merged.best_index = shard.best_index;
        }
    }
    if (merged.best_index < 0)
        throw AllSampledPoliciesNonErgodic();

    BruteForceResult out;
    out.best = decode_tuple(spec, layout, merged.best_index);
    out.best_value = merged.best_value;
    out.n_evaluated = merged.n_evaluated;
    out.n_skipped_non_ergodic = merged.n_skipped;
    return out;
}

}  // namespace mamdp

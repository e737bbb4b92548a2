#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mamdp/factored.hpp"
#include "mamdp/mdp.hpp"

namespace mamdp {

/// How companion agents' states are weighted when collapsing the joint model
/// into one agent's local model.
///  - Uniform:     every companion state combination weighted equally.
///  - ProductQhat: weighted by the product of the companions' current
///                 environment-conditional occupancy estimates (falls back to
///                 Uniform before any occupancy estimate exists).
///  - Sampled:     a seeded random subset of companion state combinations,
///                 weighted equally within the sample.
enum class CompanionDistribution { Uniform, ProductQhat, Sampled };

/// Stochastic local policies, one table per agent:
/// probs[i] is (|E|*|S_i|) x |A_i|, rows indexed by env * |S_i| + own.
struct StochasticLocalPolicies {
    std::vector<Matrix> probs;

    static StochasticLocalPolicies uniform(const FactoredSpec& spec);
    static StochasticLocalPolicies from_deterministic(const FactoredSpec& spec,
                                                      const LocalPolicySet& policies);
};

/// One agent's collapsed model over local states (env, own), encoded
/// env * |S_i| + own. `renormalized_rows` counts kernel rows whose mass was
/// off unity by more than 1e-9 before renormalization.
struct LocalMDP {
    int agent = -1;
    JointMDP mdp;
    int iteration_tag = 0;
    int renormalized_rows = 0;
};

struct SearchConfig {
    double epsilon = 0.0;            // relative improvement required to adopt
    int max_rounds = 500;
    CompanionDistribution companion_mode = CompanionDistribution::Uniform;
    double tol = 1e-9;               // local solver tolerance
    std::uint64_t seed = 0;          // drives Sampled companion mode
    bool refresh_local_kernels = false;  // rebuild kernels from occupancy each round
    long long sample_budget = -1;    // Sampled mode; -1 = floor(m * S * S / 2)
};

enum class SearchTermination { Converged, RoundCap };

struct SearchRecord {
    int round = 0;
    int agent = -1;
    double incumbent_gain = 0.0;
    double candidate_gain = 0.0;
    bool adopted = false;
    double seconds = 0.0;  // wall-clock for this agent's rebuild + solve
};

struct SearchTrace {
    std::vector<SearchRecord> records;
    LocalPolicySet final_policies;
    std::vector<Vector> final_occupancy;  // one per agent, over env * |S_i| + own
    SearchTermination termination = SearchTermination::Converged;
    int rounds = 0;
    std::vector<LocalMDP> local_mdps;  // last built model per agent
};

/// Collapses the joint kernel into agent i's local kernel P_i over (env, own):
/// companions' states weighted by `weights` (length prod |S_j|, j != i; empty
/// means uniform), their actions by the given stochastic policies, and their
/// next states marginalized out. Rows off unity by > 1e-9 are counted and all
/// rows renormalized.
LocalMDP local_transition(const JointMDP& mdp, const FactoredSpec& spec, int agent,
                          const StochasticLocalPolicies& companion_policies,
                          const std::vector<double>& companion_weights, int iteration_tag);

/// Expected joint reward seen by agent i at local state (env, own) under
/// action a_i, with companions' states weighted by their env-conditional
/// occupancy estimates (uniform fallback when an estimate has zero mass on an
/// environment slice) and companion actions by their stochastic policies.
/// `occupancy[j]` is agent j's distribution over env * |S_j| + own.
Matrix local_reward(const JointMDP& mdp, const FactoredSpec& spec, int agent,
                    const StochasticLocalPolicies& companion_policies,
                    const std::vector<Vector>& occupancy);

/// Iterated best response over agents' local models: each round rebuilds the
/// responding agent's local reward from the current occupancy estimates,
/// solves the local model, and adopts the new deterministic local policy when
/// its gain beats the incumbent's by the configured relative margin. Restarts
/// the sweep after each adoption; terminates when a full sweep yields no
/// adoption, or at the round cap.
SearchTrace local_policy_search(const JointMDP& mdp, const FactoredSpec& spec,
                                const SearchConfig& config);

/// Average reward of the lifted joint policy on the given (full) model,
/// evaluated from the given start state (handles chains whose gain depends on
/// the start).
double evaluate_on_joint(const JointMDP& mdp, const FactoredSpec& spec,
                         const LocalPolicySet& policies, int start_state);

}  // namespace mamdp

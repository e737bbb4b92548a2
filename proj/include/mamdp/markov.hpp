#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mamdp/errors.hpp"

namespace mamdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct JointMDP;  // mdp.hpp

/// Probability vector over a chain's states.
struct StationaryDistribution {
    Vector probs;
};

/// Sensitivity summary for a chain / an MDP's policy family.
///
/// lambda1_chain / lambda1_group_inverse describe the chain attaining the
/// maximum; max_coefficient is the max of the group-inverse coefficient over
/// the sampled policies. The value is a sampled lower bound of the true
/// supremum over all stationary policies, hence `is_estimate` — callers must
/// surface that tag wherever the number feeds a bound.
struct ErgodicityReport {
    double lambda1_chain = 0.0;          // ergodicity coefficient of the chain itself
    double lambda1_group_inverse = 0.0;  // ergodicity coefficient of its group inverse
    double max_coefficient = 0.0;        // running max of lambda1_group_inverse over samples
    bool is_estimate = true;
    int n_policies_sampled = 0;
    int n_skipped_non_ergodic = 0;
};

/// Recurrent-class decomposition of a chain's support graph.
/// class_of[s] is the closed-class index of s, or -1 when s is transient.
struct ChainClasses {
    std::vector<std::vector<int>> closed_classes;
    std::vector<int> class_of;
};

ChainClasses chain_classes(const Matrix& chain);

/// Unique stationary distribution q with qP = q.
/// Requires a unichain (exactly one closed recurrent class); throws NotErgodic
/// otherwise. Entries are strictly positive when the chain is irreducible.
StationaryDistribution stationary_distribution(const Matrix& chain);

/// Total-variation distance, the half-L1 form.
double total_variation(const Vector& mu, const Vector& nu);

/// Half the maximum L1 distance between any two rows. Defined for arbitrary
/// square matrices (it is also applied to group inverses, which are not
/// stochastic); in [0,1] for row-stochastic inputs.
double ergodicity_coefficient(const Matrix& m);

/// Group inverse of Z = I - P, computed as (I - P + 1 q^T)^{-1} - 1 q^T.
/// Verifies the three group-inverse identities to 1e-9 and throws
/// IdentityCheckFailed on violation.
Matrix group_inverse(const Matrix& chain, const StationaryDistribution& q);

struct PerturbationGap {
    double bound;   // 0.5 * coeff(Z#(P)) * max-row-sum(P - P')
    double actual;  // total variation between the two stationary distributions
};

/// Stationary-distribution perturbation bound between two chains.
PerturbationGap perturbation_gap_bound(const Matrix& p, const Matrix& p_prime);

/// Samples n_samples deterministic policies uniformly (seeded) and reports the
/// maximum group-inverse ergodicity coefficient among those whose induced
/// chain is unichain; skipped policies are counted. Throws
/// AllSampledPoliciesNonErgodic when nothing qualifies.
ErgodicityReport estimate_chain_sensitivity(const JointMDP& mdp, int n_samples, std::uint64_t seed);

}  // namespace mamdp

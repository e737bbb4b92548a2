#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "mamdp/bounds.hpp"
#include "mamdp/local_search.hpp"
#include "mamdp/oracle.hpp"

using namespace mamdp;

namespace {

DeltaEstimate delta_of(double value, bool exhaustive = true) {
    DeltaEstimate d;
    d.value = value;
    d.exhaustive = exhaustive;
    return d;
}

ErgodicityReport sensitivity_of(double max_coefficient, bool is_estimate) {
    ErgodicityReport r;
    r.max_coefficient = max_coefficient;
    r.is_estimate = is_estimate;
    return r;
}

LocalPolicySet random_local_policies(testutil::Rng& rng, const FactoredSpec& spec) {
    LocalPolicySet policies;
    policies.tables.resize(spec.m);
    for (int i = 0; i < spec.m; ++i) {
        std::uniform_int_distribution<int> action(0, spec.agent_action_sizes[i] - 1);
        policies.tables[i].resize(spec.env_state_size * spec.agent_state_sizes[i]);
        for (int& a : policies.tables[i]) a = action(rng);
    }
    return policies;
}

}  // namespace

TEST_CASE("report arithmetic is exactly the documented identities") {
    BoundReport r = make_bound_report(0.6, 0.5, delta_of(0.2), sensitivity_of(1.5, false), 0.1, 3,
                                      2.0, 0.5);
    // 4*2.0*1.5*3*0.2 + (1 + 3*0.1)*0.6 + 0.5
    CHECK(r.optimality_bound == doctest::Approx(7.2 + 0.78 + 0.5).epsilon(1e-15));
    // 4*(2.0-0.5)*1.5*3*0.2 + same tail
    CHECK(r.optimality_bound_tight == doctest::Approx(5.4 + 0.78 + 0.5).epsilon(1e-15));
    // (2.0-0.5)*2*1.5*3*0.2
    CHECK(r.surrogate_gap_bound == doctest::Approx(2.7).epsilon(1e-15));
    CHECK(r.local_search_factor == doctest::Approx(1.0 / 2.3).epsilon(1e-15));
    CHECK(r.delta == 0.2);
    CHECK(r.delta_exhaustive);
    CHECK(r.max_sensitivity == 1.5);
    CHECK_FALSE(r.sensitivity_is_estimate);
    CHECK(r.n_agents == 3);
}

TEST_CASE("the local-search factor stays in (0, 1/2]") {
    CHECK(make_bound_report(0, 0, delta_of(0), sensitivity_of(0, true), 0.0, 1, 1, 0)
              .local_search_factor == 0.5);
    testutil::Rng rng(71);
    std::uniform_real_distribution<double> eps(0.0, 5.0);
    for (int k = 0; k < 100; ++k) {
        const int m = 1 + static_cast<int>(rng() % 10);
        const double f = make_bound_report(0, 0, delta_of(0), sensitivity_of(0, true), eps(rng), m,
                                           1, 0)
                             .local_search_factor;
        CHECK(f > 0.0);
        CHECK(f <= 0.5);
    }
}

TEST_CASE("zero dependence and zero margin collapse the bound to the two values") {
    testutil::Rng rng(72);
    FactoredSpec spec = testutil::two_agent_spec(2, 2);
    JointMDP original = testutil::random_product_mmdp(rng, spec);
    // Make the model transition-independent: rebuild it from its own averages.
    JointMDP ti = build_averaged_surrogate(original, spec);
    JointMDP surrogate = build_averaged_surrogate(ti, spec);

    LocalPolicySet policies = random_local_policies(rng, spec);
    BoundReport r = compute_bound_report(ti, surrogate, spec, policies, 0, 0.0, 1 << 20, 50, 7);

    CHECK(r.delta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.delta_exhaustive);
    CHECK(r.surrogate_value == doctest::Approx(r.original_value).epsilon(1e-10));
    CHECK(r.optimality_bound ==
          doctest::Approx(r.surrogate_value + r.original_value).epsilon(1e-9));
    CHECK(r.surrogate_gap_bound == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.local_search_factor == 0.5);
}

TEST_CASE("a single agent has a zero gap to its own surrogate") {
    testutil::Rng rng(73);
    FactoredSpec spec;
    spec.m = 1;
    spec.agent_state_sizes = {4};
    spec.agent_action_sizes = {3};
    spec.env_state_size = 1;
    JointMDP mdp = testutil::random_ergodic_mdp(rng, 4, 3);
    JointMDP surrogate = build_averaged_surrogate(mdp, spec);
    DeltaEstimate delta = measure_delta(mdp, spec, DeltaMode::Exhaustive, 1 << 20, 0);
    CHECK(delta.value == doctest::Approx(0.0).epsilon(1e-12));

    LocalPolicySet policy;
    policy.tables = {{0, 1, 2, 0}};
    GapCheck check = verify_surrogate_gap_bound(mdp, surrogate, spec, policy, delta.value, false);
    CHECK(check.gap == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(check.holds);
    CHECK(check.n_chains_examined == 2);
    CHECK(check.lambda_bar > 0.0);
}

TEST_CASE("the per-policy gap bound holds on 100 random two-agent models") {
    testutil::Rng rng(74);
    int worst_trial = -1;
    double worst_margin = 1e300;
    for (int trial = 0; trial < 100; ++trial) {
        const int states = 2 + static_cast<int>(rng() % 2);  // 2 or 3 per agent
        FactoredSpec spec = testutil::two_agent_spec(states, 2);
        JointMDP original = testutil::random_product_mmdp(rng, spec);
        JointMDP surrogate = build_averaged_surrogate(original, spec);
        DeltaEstimate delta = measure_delta(original, spec, DeltaMode::Exhaustive, 1 << 20, 0);

        LocalPolicySet policy = random_local_policies(rng, spec);
        GapCheck check =
            verify_surrogate_gap_bound(original, surrogate, spec, policy, delta.value, false);
        CHECK(check.holds);
        if (check.bound - check.gap < worst_margin) {
            worst_margin = check.bound - check.gap;
            worst_trial = trial;
        }
    }
    INFO("tightest margin ", worst_margin, " at trial ", worst_trial);
    CHECK(worst_margin > -1e-9);
}

TEST_CASE("exhaustive sensitivity dominates the per-policy coefficient") {
    testutil::Rng rng(75);
    FactoredSpec spec = testutil::two_agent_spec(2, 2);
    JointMDP original = testutil::random_product_mmdp(rng, spec);
    JointMDP surrogate = build_averaged_surrogate(original, spec);
    DeltaEstimate delta = measure_delta(original, spec, DeltaMode::Exhaustive, 1 << 20, 0);
    LocalPolicySet policy = random_local_policies(rng, spec);

    GapCheck per_policy =
        verify_surrogate_gap_bound(original, surrogate, spec, policy, delta.value, false);
    GapCheck swept =
        verify_surrogate_gap_bound(original, surrogate, spec, policy, delta.value, true);
    CHECK(swept.lambda_exhaustive);
    CHECK(swept.lambda_bar >= per_policy.lambda_bar - 1e-12);
    // strictly positive rows: every one of the 16 tuples is unichain on both models
    CHECK(swept.n_chains_examined == 32);
    CHECK(swept.holds);

    CHECK_THROWS_AS(
        verify_surrogate_gap_bound(original, surrogate, spec, policy, delta.value, true, 10),
        CapExceeded);
}

TEST_CASE("the optimality bound covers the brute-force best on tiny instances") {
    testutil::Rng rng(76);
    for (int trial = 0; trial < 10; ++trial) {
        FactoredSpec spec = testutil::two_agent_spec(2, 2);
        JointMDP original = testutil::random_coverage_mmdp(rng, spec);
        JointMDP surrogate = build_averaged_surrogate(original, spec);
        DeltaEstimate delta = measure_delta(original, spec, DeltaMode::Exhaustive, 1 << 20, 0);

        SearchConfig config;
        config.seed = 1000 + trial;
        SearchTrace trace = local_policy_search(original, spec, config);
        BruteForceResult brute = brute_force_local(original, spec, 0, 1000);

        OptimalityCheck check = verify_optimality_bound(
            original, surrogate, spec, trace.final_policies, brute.best, 0, config.epsilon,
            delta.value, false);
        if (!check.holds)
            check = verify_optimality_bound(original, surrogate, spec, trace.final_policies,
                                            brute.best, 0, config.epsilon, delta.value, true);
        INFO("trial ", trial, ": best ", check.optimal_value, " bound ", check.bound);
        CHECK(check.holds);
        CHECK(check.optimal_value == doctest::Approx(brute.best_value).epsilon(1e-12));
    }
}

TEST_CASE("a converged search keeps at least half the surrogate optimum on tiny instances") {
    testutil::Rng rng(77);
    int converged = 0;
    for (int trial = 0; trial < 10; ++trial) {
        FactoredSpec spec = testutil::two_agent_spec(2, 2);
        JointMDP original = testutil::random_coverage_mmdp(rng, spec);
        JointMDP surrogate = build_averaged_surrogate(original, spec);

        SearchConfig config;
        config.seed = 2000 + trial;
        SearchTrace trace = local_policy_search(original, spec, config);
        if (trace.termination != SearchTermination::Converged) continue;
        ++converged;

        const double found_on_surrogate =
            evaluate_on_joint(surrogate, spec, trace.final_policies, 0);
        BruteForceResult best_on_surrogate = brute_force_local(surrogate, spec, 0, 1000);
        INFO("trial ", trial, ": found ", found_on_surrogate, " best ",
             best_on_surrogate.best_value);
        CHECK(found_on_surrogate >= 0.5 * best_on_surrogate.best_value - 1e-9);
    }
    CHECK(converged > 0);
}

TEST_CASE("the report gatherer matches its pure-arithmetic core") {
    testutil::Rng rng(78);
    FactoredSpec spec = testutil::two_agent_spec(2, 2);
    JointMDP original = testutil::random_product_mmdp(rng, spec);
    JointMDP surrogate = build_averaged_surrogate(original, spec);
    LocalPolicySet policies = random_local_policies(rng, spec);

    BoundReport full =
        compute_bound_report(original, surrogate, spec, policies, 0, 0.05, 1 << 20, 40, 11);

    DeltaEstimate delta;
    delta.value = full.delta;
    delta.exhaustive = full.delta_exhaustive;
    ErgodicityReport sens;
    sens.max_coefficient = full.max_sensitivity;
    sens.is_estimate = full.sensitivity_is_estimate;
    BoundReport core = make_bound_report(full.surrogate_value, full.original_value, delta, sens,
                                         full.epsilon, full.n_agents, full.r_max, full.r_min);
    CHECK(full.optimality_bound == core.optimality_bound);
    CHECK(full.optimality_bound_tight == core.optimality_bound_tight);
    CHECK(full.surrogate_gap_bound == core.surrogate_gap_bound);
    CHECK(full.local_search_factor == core.local_search_factor);

    // The gatherer evaluated the policy start-aware on both models.
    CHECK(full.surrogate_value ==
          doctest::Approx(evaluate_on_joint(surrogate, spec, policies, 0)).epsilon(1e-12));
    CHECK(full.original_value ==
          doctest::Approx(evaluate_on_joint(original, spec, policies, 0)).epsilon(1e-12));
    CHECK(full.sensitivity_is_estimate);
    CHECK(full.max_sensitivity > 0.0);
    CHECK(full.r_max == original.r_max);
    CHECK(full.r_min == original.r_min);
}

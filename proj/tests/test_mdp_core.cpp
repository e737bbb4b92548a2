#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"
#include "mamdp/mdp.hpp"

using namespace mamdp;
using testutil::Rng;

namespace {

JointMDP one_state_mdp(double reward_value) {
    Matrix k(1, 1);
    k << 1.0;
    Matrix r(1, 1);
    r << reward_value;
    return JointMDP::from_tables({k}, r);
}

/// Two states, actions {stay, switch}; state-based reward 0 / 1; slip 0.01.
JointMDP two_state_slip_mdp() {
    Matrix stay(2, 2), swap(2, 2);
    stay << 0.99, 0.01, 0.01, 0.99;
    swap << 0.01, 0.99, 0.99, 0.01;
    Matrix r(2, 2);
    r << 0.0, 0.0, 1.0, 1.0;
    return JointMDP::from_tables({stay, swap}, r);
}

}  // namespace

TEST_CASE("validate_mdp accepts a single absorbing state") {
    CHECK_NOTHROW(validate_mdp(one_state_mdp(0.5)));
}

TEST_CASE("validate_mdp rejects a row summing to 0.97") {
    Matrix k(1, 1);
    k << 0.97;
    Matrix r(1, 1);
    r << 0.0;
    JointMDP mdp = JointMDP::from_tables({k}, r);
    CHECK_THROWS_AS(validate_mdp(mdp), NonStochasticRow);
    try {
        validate_mdp(mdp);
    } catch (const NonStochasticRow& e) {
        CHECK(e.state == 0);
        CHECK(e.action == 0);
        CHECK(e.row_sum == doctest::Approx(0.97));
    }
}

TEST_CASE("validate_mdp rejects negative probabilities") {
    Matrix k(2, 2);
    k << -0.1, 1.1, 0.5, 0.5;
    Matrix r = Matrix::Zero(2, 1);
    JointMDP mdp = JointMDP::from_tables({k}, r);
    CHECK_THROWS_AS(validate_mdp(mdp), NegativeProbability);
}

TEST_CASE("validate_mdp rejects non-finite rewards") {
    Matrix k(1, 1);
    k << 1.0;
    Matrix r(1, 1);
    r << std::numeric_limits<double>::quiet_NaN();
    JointMDP mdp = JointMDP::from_tables({k}, r);
    CHECK_THROWS_AS(validate_mdp(mdp), NonFiniteReward);
}

TEST_CASE("induced_chain selects kernel slices for deterministic policies") {
    JointMDP mdp = two_state_slip_mdp();
    Matrix chain = induced_chain(mdp, StationaryPolicy::det({1, 0}));
    CHECK(chain(0, 1) == doctest::Approx(0.99).epsilon(1e-12));
    CHECK(chain(1, 1) == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("induced_chain averages slices under the uniform policy") {
    JointMDP mdp = two_state_slip_mdp();
    Matrix chain = induced_chain(mdp, StationaryPolicy::uniform(2, 2));
    CHECK(chain(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(chain(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("induced_chain forms the stated convex combination") {
    JointMDP mdp = two_state_slip_mdp();
    Matrix probs(2, 2);
    probs << 0.25, 0.75, 0.25, 0.75;
    Matrix chain = induced_chain(mdp, StationaryPolicy::stoch(probs));
    // 0.25 * stay-row + 0.75 * switch-row from state 0: (0.25*0.99 + 0.75*0.01, ...)
    CHECK(chain(0, 0) == doctest::Approx(0.25 * 0.99 + 0.75 * 0.01).epsilon(1e-12));
    CHECK(chain(0, 1) == doctest::Approx(0.25 * 0.01 + 0.75 * 0.99).epsilon(1e-12));
}

TEST_CASE("induced_chain rows are stochastic for random policies") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        JointMDP mdp = testutil::random_mdp(rng, 6, 3);
        Matrix probs(6, 3);
        for (int s = 0; s < 6; ++s) probs.row(s) = testutil::random_distribution(rng, 3).transpose();
        Matrix chain = induced_chain(mdp, StationaryPolicy::stoch(probs));
        for (int s = 0; s < 6; ++s) {
            CHECK(chain.row(s).sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(chain.row(s).minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("average_reward on a single state returns its reward") {
    JointMDP mdp = one_state_mdp(0.4);
    CHECK(average_reward(mdp, StationaryPolicy::det({0})) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("average_reward on the symmetric two-state chain is 0.5") {
    Matrix k(2, 2);
    k << 0.5, 0.5, 0.5, 0.5;
    Matrix r(2, 1);
    r << 0.0, 1.0;
    JointMDP mdp = JointMDP::from_tables({k}, r);
    CHECK(average_reward(mdp, StationaryPolicy::det({0, 0})) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("average_reward matches the hand-solved stationary distribution") {
    Matrix k(2, 2);
    k << 0.9, 0.1, 0.2, 0.8;
    Matrix r(2, 1);
    r << 0.0, 1.0;
    JointMDP mdp = JointMDP::from_tables({k}, r);
    // q = (2/3, 1/3), so q . r = 1/3.
    CHECK(average_reward(mdp, StationaryPolicy::det({0, 0})) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("average_reward refuses a chain with two closed classes") {
    Matrix k = Matrix::Identity(2, 2);
    Matrix r(2, 1);
    r << 0.0, 1.0;
    JointMDP mdp = JointMDP::from_tables({k}, r);
    CHECK_THROWS_AS(average_reward(mdp, StationaryPolicy::det({0, 0})), NotErgodic);
}

TEST_CASE("relative_value_iteration solves the single-state problem") {
    GainBias sol = relative_value_iteration(one_state_mdp(0.7));
    CHECK(sol.gain == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(sol.bias(0) == doctest::Approx(0.0));
    CHECK(sol.policy.choice[0] == 0);
}

TEST_CASE("relative_value_iteration finds the 0.99 gain of the slip chain") {
    GainBias sol = relative_value_iteration(two_state_slip_mdp());
    // Optimal: switch in state 0, stay in state 1; stationary (0.01, 0.99).
    CHECK(sol.gain == doctest::Approx(0.99).epsilon(1e-8));
    CHECK(sol.policy.choice[0] == 1);
    CHECK(sol.policy.choice[1] == 0);
}

TEST_CASE("relative_value_iteration converges on a deterministic period-2 chain") {
    // One action: flip between the states. Undamped value iteration would
    // oscillate; the damped operator must still converge to gain 0.5.
    Matrix flip(2, 2);
    flip << 0.0, 1.0, 1.0, 0.0;
    Matrix r(2, 1);
    r << 0.0, 1.0;
    JointMDP mdp = JointMDP::from_tables({flip}, r);
    GainBias sol = relative_value_iteration(mdp);
    CHECK(sol.gain == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("relative_value_iteration reports NoConvergence at tiny iteration caps") {
    CHECK_THROWS_AS(relative_value_iteration(two_state_slip_mdp(), 1e-9, 1), NoConvergence);
}

TEST_CASE("gain consistency on random ergodic instances") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng() % 19);  // up to 20
        int a = 1 + static_cast<int>(rng() % 4);
        JointMDP mdp = testutil::random_ergodic_mdp(rng, n, a);
        GainBias sol = relative_value_iteration(mdp);
        CHECK(std::abs(sol.gain - average_reward(mdp, sol.policy)) <= 1e-8);
    }
}

TEST_CASE("optimality against exhaustive enumeration on tiny instances") {
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);  // up to 4
        int a = 2 + static_cast<int>(rng() % 2);  // up to 3
        JointMDP mdp = testutil::random_mdp(rng, n, a);
        GainBias sol = relative_value_iteration(mdp);
        long long total = 1;
        for (int s = 0; s < n; ++s) total *= a;
        for (long long code = 0; code < total; ++code) {
            std::vector<int> choice(n);
            long long rem = code;
            for (int s = 0; s < n; ++s) {
                choice[s] = static_cast<int>(rem % a);
                rem /= a;
            }
            CHECK(sol.gain >= average_reward(mdp, StationaryPolicy::det(choice)) - 1e-8);
        }
    }
}

TEST_CASE("evaluate_from_start equals average_reward on unichain models") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        JointMDP mdp = testutil::random_ergodic_mdp(rng, 6, 2);
        StationaryPolicy policy = StationaryPolicy::uniform(6, 2);
        double avg = average_reward(mdp, policy);
        for (int s = 0; s < 6; ++s)
            CHECK(evaluate_from_start(mdp, policy, s) == doctest::Approx(avg).epsilon(1e-9));
    }
}

TEST_CASE("evaluate_from_start mixes absorbing classes by absorption probability") {
    // State 0 is transient: 0.3 to class {1}, 0.7 to class {2}; rewards 1 and 0.
    Matrix k(3, 3);
    k << 0.0, 0.3, 0.7,
         0.0, 1.0, 0.0,
         0.0, 0.0, 1.0;
    Matrix r(3, 1);
    r << 0.0, 1.0, 0.0;
    JointMDP mdp = JointMDP::from_tables({k}, r);
    StationaryPolicy policy = StationaryPolicy::det({0, 0, 0});
    CHECK(evaluate_from_start(mdp, policy, 0) == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(evaluate_from_start(mdp, policy, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(evaluate_from_start(mdp, policy, 2) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("reachable_closed_set and restrict_mdp preserve dynamics") {
    // Two disconnected 2-state blocks; start in the first block.
    Matrix k(4, 4);
    k << 0.5, 0.5, 0.0, 0.0,
         0.9, 0.1, 0.0, 0.0,
         0.0, 0.0, 0.2, 0.8,
         0.0, 0.0, 0.6, 0.4;
    Matrix r(4, 1);
    r << 1.0, 2.0, 3.0, 4.0;
    JointMDP mdp = JointMDP::from_tables({k}, r);
    std::vector<int> closed = reachable_closed_set(mdp, 0);
    CHECK(closed == std::vector<int>{0, 1});
    RestrictedMDP sub = restrict_mdp(mdp, closed);
    CHECK(sub.mdp.n_states == 2);
    CHECK(sub.index_of[1] == 1);
    CHECK(sub.index_of[2] == -1);
    CHECK(sub.mdp.kernel[0](0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    // Restricting to a leaking set must fail.
    CHECK_THROWS_AS(restrict_mdp(mdp, std::vector<int>{0}), std::invalid_argument);
}

TEST_CASE("state_reward_under averages rewards over stochastic actions") {
    JointMDP mdp = two_state_slip_mdp();
    Matrix probs(2, 2);
    probs << 0.25, 0.75, 0.5, 0.5;
    Vector r = state_reward_under(mdp, StationaryPolicy::stoch(probs));
    CHECK(r(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r(1) == doctest::Approx(1.0).epsilon(1e-12));
}

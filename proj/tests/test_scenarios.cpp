#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "helpers.hpp"
#include "mamdp/markov.hpp"
#include "mamdp/scenarios.hpp"

using namespace mamdp;

namespace {

GridConfig desk_grid() {
    GridConfig g;
    g.rows = 3;
    g.cols = 3;
    g.n_robots = 2;
    g.targets = {6};
    g.start_cells = {0, 2};
    g.move_success = 0.9;
    g.congestion_factor = 0.9;
    g.congestion_threshold = 1;
    g.detect_prob = 0.75;
    return g;
}

PatrolConfig desk_patrol() {
    PatrolConfig p;
    p.n_locations = 3;
    p.n_units = 2;
    p.n_adversaries = 1;
    p.unit_success = 0.9;
    p.adversary_hold = 1.0;
    p.unit_clash_factor = 0.9;
    p.adversary_evade_factor = 0.9;
    p.catch_prob = 0.75;
    return p;
}

}  // namespace

TEST_CASE("grid sizes: two robots on 3x3 give 81 states and 16 actions") {
    ScenarioBuild built = build_grid(desk_grid());
    CHECK(built.mdp.n_states == 81);
    CHECK(built.mdp.n_actions == 16);
    CHECK(built.n_valid_joint_actions == 4);  // corner cells have two exits
}

TEST_CASE("grid sizes: four robots on 2x2 give 256 states and 256 actions") {
    GridConfig g = desk_grid();
    g.rows = 2;
    g.cols = 2;
    g.n_robots = 4;
    g.targets = {3};
    g.start_cells = {0, 0, 1, 1};
    ScenarioBuild built = build_grid(g);
    CHECK(built.mdp.n_states == 256);
    CHECK(built.mdp.n_actions == 256);
}

TEST_CASE("grid coverage reward at 0, 1, 2 robots on the target") {
    GridConfig g = desk_grid();
    CHECK(grid_state_reward(g, {0, 2}) == doctest::Approx(0.0));
    CHECK(grid_state_reward(g, {6, 2}) == doctest::Approx(0.75));
    CHECK(grid_state_reward(g, {6, 6}) == doctest::Approx(0.9375));
    // The built reward table is state-based.
    ScenarioBuild built = build_grid(g);
    JointState st;
    st.agents = {6, 6};
    const int s = encode_state(built.spec, st);
    for (int a = 0; a < built.mdp.n_actions; ++a)
        CHECK(built.mdp.reward(s, a) == doctest::Approx(0.9375));
}

TEST_CASE("grid coverage reward has diminishing marginals") {
    GridConfig g = desk_grid();
    g.n_robots = 5;
    g.start_cells = {0, 0, 0, 0, 0};
    double prev_gain = 1.0;
    for (int k = 0; k < 5; ++k) {
        std::vector<int> cells(5, 0);
        for (int i = 0; i < k; ++i) cells[i] = 6;
        const double before = grid_state_reward(g, cells);
        cells[k] = 6;
        const double after = grid_state_reward(g, cells);
        const double gain = after - before;
        CHECK(gain > 0.0);
        if (k > 0) CHECK(gain < prev_gain);
        prev_gain = gain;
    }
}

TEST_CASE("grid rows respect the congestion switch") {
    ScenarioBuild built = build_grid(desk_grid());
    // Both robots at interior cell 4's neighbors, both aiming at cell 4:
    // robot 0 at 1 moving down (action 1), robot 1 at 3 moving right (action 2).
    JointState st;
    st.agents = {1, 3};
    const int s = encode_state(built.spec, st);
    const int a_clash = encode_action(built.spec, {1, 2});
    // Robot 0's marginal of landing on 4 must be 0.81 under the clash.
    double mass_on_4 = 0.0;
    for (int s2 = 0; s2 < built.mdp.n_states; ++s2)
        if (decode_state(built.spec, s2).agents[0] == 4) mass_on_4 += built.mdp.p(s, a_clash, s2);
    CHECK(mass_on_4 == doctest::Approx(0.81).epsilon(1e-12));
    // Without the clash (robot 1 moves up, away), intended mass is 0.9.
    const int a_free = encode_action(built.spec, {1, 3});
    mass_on_4 = 0.0;
    for (int s2 = 0; s2 < built.mdp.n_states; ++s2)
        if (decode_state(built.spec, s2).agents[0] == 4) mass_on_4 += built.mdp.p(s, a_free, s2);
    CHECK(mass_on_4 == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("grid dependence measure is exactly c(1 - factor)") {
    ScenarioBuild built = build_grid(desk_grid());
    DeltaEstimate est = measure_delta(built.mdp, built.spec, DeltaMode::Exhaustive, 4096, 0);
    CHECK(est.exhaustive);
    CHECK(est.value == doctest::Approx(0.09).epsilon(1e-9));
}

TEST_CASE("grid state space splits into two closed move-parity classes") {
    ScenarioBuild built = build_grid(desk_grid());
    std::vector<int> closed = reachable_closed_set(built.mdp, built.start_state);
    CHECK(closed.size() == 41);
    // Full-space solve cannot produce a start-independent optimum here; the
    // restricted class must solve cleanly.
    CHECK_THROWS_AS(relative_value_iteration(built.mdp, 1e-9, 2000), MdpError);
    RestrictedMDP sub = restrict_mdp(built.mdp, closed);
    GainBias sol = relative_value_iteration(sub.mdp);
    CHECK(sol.gain > 0.3);
    CHECK(sol.gain < 0.5);
}

TEST_CASE("patrol sizes: 2 units, 1 adversary, 3 locations give 27 states, 9 actions") {
    ScenarioBuild built = build_patrol(desk_patrol());
    CHECK(built.mdp.n_states == 27);
    CHECK(built.mdp.n_actions == 9);
    CHECK(built.n_valid_joint_actions == 9);
}

TEST_CASE("patrol sizes: 3 units, 2 adversaries, 3 locations give 243 states, 27 actions") {
    PatrolConfig p = desk_patrol();
    p.n_units = 3;
    p.n_adversaries = 2;
    ScenarioBuild built = build_patrol(p);
    CHECK(built.mdp.n_states == 243);
    CHECK(built.mdp.n_actions == 27);
}

TEST_CASE("patrol catch reward evaluates the stated examples") {
    PatrolConfig p = desk_patrol();
    CHECK(patrol_catch_reward(p, {0, 1}, {2}) == doctest::Approx(0.0));
    CHECK(patrol_catch_reward(p, {2, 1}, {2}) == doctest::Approx(0.75));
    CHECK(patrol_catch_reward(p, {2, 2}, {2}) == doctest::Approx(0.9375));
}

TEST_CASE("patrol unit rows clash only on matching unit actions") {
    ScenarioBuild built = build_patrol(desk_patrol());
    // State: units at (0, 1), adversary at 2. Both units pick location 2.
    JointState st;
    st.env = 2;
    st.agents = {0, 1};
    const int s = encode_state(built.spec, st);
    const int a_clash = encode_action(built.spec, {2, 2});
    double unit0_hits = 0.0;
    for (int s2 = 0; s2 < built.mdp.n_states; ++s2)
        if (decode_state(built.spec, s2).agents[0] == 2) unit0_hits += built.mdp.p(s, a_clash, s2);
    CHECK(unit0_hits == doctest::Approx(0.81).epsilon(1e-12));
    const int a_free = encode_action(built.spec, {2, 1});
    unit0_hits = 0.0;
    for (int s2 = 0; s2 < built.mdp.n_states; ++s2)
        if (decode_state(built.spec, s2).agents[0] == 2) unit0_hits += built.mdp.p(s, a_free, s2);
    CHECK(unit0_hits == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("patrol adversary holds unless its spot is targeted") {
    ScenarioBuild built = build_patrol(desk_patrol());
    JointState st;
    st.env = 2;
    st.agents = {0, 1};
    const int s = encode_state(built.spec, st);
    // No unit targets location 2: the adversary keeps its spot surely (hold = 1).
    const int a_away = encode_action(built.spec, {0, 1});
    double stay_mass = 0.0;
    for (int s2 = 0; s2 < built.mdp.n_states; ++s2)
        if (decode_state(built.spec, s2).env == 2) stay_mass += built.mdp.p(s, a_away, s2);
    CHECK(stay_mass == doctest::Approx(1.0).epsilon(1e-12));
    // Unit 0 goes to 2: hold degrades to 0.9.
    const int a_cover = encode_action(built.spec, {2, 1});
    stay_mass = 0.0;
    for (int s2 = 0; s2 < built.mdp.n_states; ++s2)
        if (decode_state(built.spec, s2).env == 2) stay_mass += built.mdp.p(s, a_cover, s2);
    CHECK(stay_mass == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("patrol reward is the expected next-step catch value") {
    ScenarioBuild built = build_patrol(desk_patrol());
    JointState st;
    st.env = 2;
    st.agents = {0, 1};
    const int s = encode_state(built.spec, st);
    const int a = encode_action(built.spec, {2, 2});
    double expect = 0.0;
    for (int s2 = 0; s2 < built.mdp.n_states; ++s2) {
        const JointState nx = decode_state(built.spec, s2);
        expect += built.mdp.p(s, a, s2) * patrol_catch_reward(desk_patrol(), nx.agents, {nx.env});
    }
    CHECK(built.mdp.reward(s, a) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("patrol joint solve reproduces the published neighborhood") {
    ScenarioBuild built = build_patrol(desk_patrol());
    GainBias sol = relative_value_iteration(built.mdp);
    CHECK(sol.gain == doctest::Approx(0.775).epsilon(2e-3));
}

// Submodular-exchange spot check on a decoupled two-agent coverage instance:
// each agent walks on cells {0, 1}, action g reaches cell g with probability
// 0.9, and the team is rewarded for presence at cell 1 with effectiveness
// 0.75. The value of a sub-team (absent agents contribute no coverage)
// factorizes through each member's stationary occupancy, so the set function
// over (agent, policy) picks can be enumerated exactly.
namespace {

struct CoverageInstance {
    double move = 0.9;
    double eta = 0.75;

    Matrix agent_chain(const std::vector<int>& table) const {
        Matrix chain(2, 2);
        for (int x = 0; x < 2; ++x) {
            const int g = table[x];
            chain(x, g) = move;
            chain(x, 1 - g) = 1.0 - move;
        }
        return chain;
    }

    /// Stationary probability of NOT covering cell 1 for one agent.
    double miss_factor(const std::vector<int>& table) const {
        Vector q = stationary_distribution(agent_chain(table)).probs;
        return q(0) + q(1) * (1.0 - eta);
    }

    /// Sub-team value: 1 - product of member miss factors; empty team = 0.
    double team_value(const std::vector<std::optional<std::vector<int>>>& picks) const {
        double miss = 1.0;
        bool any = false;
        for (const auto& pick : picks)
            if (pick) {
                any = true;
                miss *= miss_factor(*pick);
            }
        return any ? 1.0 - miss : 0.0;
    }
};

}  // namespace

TEST_CASE("coverage value is monotone and satisfies the submodular exchange") {
    CoverageInstance inst;
    std::vector<std::vector<int>> tables;  // all 4 deterministic local policies
    for (int a0 = 0; a0 < 2; ++a0)
        for (int a1 = 0; a1 < 2; ++a1) tables.push_back({a0, a1});

    using Picks = std::vector<std::optional<std::vector<int>>>;
    std::vector<Picks> all_sets;
    for (int p0 = -1; p0 < 4; ++p0)
        for (int p1 = -1; p1 < 4; ++p1) {
            Picks picks(2);
            if (p0 >= 0) picks[0] = tables[p0];
            if (p1 >= 0) picks[1] = tables[p1];
            all_sets.push_back(picks);
        }

    auto subset_of = [](const Picks& a, const Picks& b) {
        for (int i = 0; i < 2; ++i) {
            if (a[i] && (!b[i] || *a[i] != *b[i])) return false;
        }
        return true;
    };

    for (const Picks& small : all_sets) {
        for (const Picks& large : all_sets) {
            if (!subset_of(small, large)) continue;
            // Monotonicity along the chain.
            CHECK(inst.team_value(large) >= inst.team_value(small) - 1e-12);
            // Exchange: adding any element available to both sides helps the
            // smaller set at least as much.
            for (int agent = 0; agent < 2; ++agent) {
                if (large[agent]) continue;  // agent slot already taken
                for (const auto& table : tables) {
                    Picks small_plus = small;
                    Picks large_plus = large;
                    small_plus[agent] = table;
                    large_plus[agent] = table;
                    const double gain_small = inst.team_value(small_plus) - inst.team_value(small);
                    const double gain_large = inst.team_value(large_plus) - inst.team_value(large);
                    CHECK(gain_small >= gain_large - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("the full-team coverage value matches the joint-model average reward") {
    CoverageInstance inst;
    FactoredSpec spec = testutil::two_agent_spec(2, 2);
    std::vector<std::vector<Matrix>> per_agent(2);
    for (int i = 0; i < 2; ++i) {
        for (int g = 0; g < 2; ++g) {
            Matrix slice(2, 2);
            for (int x = 0; x < 2; ++x) {
                slice(x, g) = inst.move;
                slice(x, 1 - g) = 1.0 - inst.move;
            }
            per_agent[i].push_back(slice);
        }
    }
    Matrix reward(4, 4);
    for (int s = 0; s < 4; ++s) {
        const JointState st = decode_state(spec, s);
        int on_target = (st.agents[0] == 1 ? 1 : 0) + (st.agents[1] == 1 ? 1 : 0);
        reward.row(s).setConstant(1.0 - std::pow(1.0 - inst.eta, on_target));
    }
    JointMDP joint = build_ti_surrogate(spec, per_agent, reward);

    for (int p0 = 0; p0 < 4; ++p0)
        for (int p1 = 0; p1 < 4; ++p1) {
            LocalPolicySet policies;
            policies.tables = {{p0 / 2, p0 % 2}, {p1 / 2, p1 % 2}};
            const double joint_value = average_reward(joint, lift_policy(spec, policies));
            std::vector<std::optional<std::vector<int>>> picks{policies.tables[0],
                                                               policies.tables[1]};
            CHECK(joint_value == doctest::Approx(inst.team_value(picks)).epsilon(1e-10));
        }
}

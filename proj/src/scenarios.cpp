#include "mamdp/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace mamdp {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

void require_prob(double v, const std::string& field) {
    require(v >= 0.0 && v <= 1.0, field, "must lie in [0, 1]");
}

}  // namespace

void GridConfig::validate() const {
    require(rows >= 1 && cols >= 1, "scenario.rows", "grid must have positive dimensions");
    require(rows * cols >= 2, "scenario.cols", "grid needs at least two cells");
    require(n_robots >= 1, "scenario.n_robots", "need at least one robot");
    require(!targets.empty(), "scenario.targets", "need at least one target cell");
    for (std::size_t k = 0; k < targets.size(); ++k)
        require(targets[k] >= 0 && targets[k] < n_cells(),
                "scenario.targets[" + std::to_string(k) + "]", "cell index out of range");
    require(static_cast<int>(start_cells.size()) == n_robots, "scenario.start_cells",
            "need exactly one start cell per robot");
    for (std::size_t k = 0; k < start_cells.size(); ++k)
        require(start_cells[k] >= 0 && start_cells[k] < n_cells(),
                "scenario.start_cells[" + std::to_string(k) + "]", "cell index out of range");
    require_prob(move_success, "scenario.move_success");
    require_prob(congestion_factor, "scenario.congestion_factor");
    require(congestion_threshold >= 1, "scenario.congestion_threshold", "must be >= 1");
    require(detect_prob > 0.0 && detect_prob <= 1.0, "scenario.detect_prob",
            "must lie in (0, 1]");
}

void PatrolConfig::validate() const {
    require(n_locations >= 2, "scenario.n_locations", "need at least two locations");
    require(n_units >= 1, "scenario.n_units", "need at least one patrol unit");
    require(n_adversaries >= 1, "scenario.n_adversaries", "need at least one adversary");
    require_prob(unit_success, "scenario.unit_success");
    require_prob(adversary_hold, "scenario.adversary_hold");
    require_prob(unit_clash_factor, "scenario.unit_clash_factor");
    require_prob(adversary_evade_factor, "scenario.adversary_evade_factor");
    require(catch_prob > 0.0 && catch_prob <= 1.0, "scenario.catch_prob", "must lie in (0, 1]");
}

namespace {

/// Valid neighbor cells of `cell` in action order (left, down, right, up);
/// entry -1 marks an off-grid move.
std::array<int, 4> neighbor_by_action(const GridConfig& g, int cell) {
    const int r = cell / g.cols;
    const int c = cell % g.cols;
    std::array<int, 4> nb{-1, -1, -1, -1};
    if (c > 0) nb[0] = cell - 1;           // left
    if (r < g.rows - 1) nb[1] = cell + g.cols;  // down
    if (c < g.cols - 1) nb[2] = cell + 1;  // right
    if (r > 0) nb[3] = cell - g.cols;      // up
    return nb;
}

/// One robot's next-cell distribution. `congested` selects the degraded
/// intended-cell mass; an invalid intent spreads uniformly over the valid
/// neighbors.
Vector robot_row(const GridConfig& g, int cell, int action, bool congested) {
    const std::array<int, 4> nb = neighbor_by_action(g, cell);
    std::vector<int> valid;
    for (int v : nb)
        if (v >= 0) valid.push_back(v);
    Vector row = Vector::Zero(g.n_cells());
    const int dest = nb[action];
    if (dest < 0) {
        for (int v : valid) row(v) = 1.0 / valid.size();
        return row;
    }
    if (valid.size() == 1) {
        row(dest) = 1.0;
        return row;
    }
    const double hit = congested ? g.congestion_factor * g.move_success : g.move_success;
    const double spread = (1.0 - hit) / (static_cast<double>(valid.size()) - 1.0);
    for (int v : valid) row(v) = (v == dest) ? hit : spread;
    return row;
}

}  // namespace

double grid_state_reward(const GridConfig& config, const std::vector<int>& robot_cells) {
    double total = 0.0;
    for (int target : config.targets) {
        int count = 0;
        for (int cell : robot_cells)
            if (cell == target) ++count;
        total += 1.0 - std::pow(1.0 - config.detect_prob, count);
    }
    return total;
}

ScenarioBuild build_grid(const GridConfig& config) {
    config.validate();
    const int N = config.n_robots;
    const int cells = config.n_cells();

    FactoredSpec spec;
    spec.m = N;
    spec.agent_state_sizes.assign(N, cells);
    spec.agent_action_sizes.assign(N, 4);
    spec.env_state_size = 1;

    const int S = spec.n_joint_states();
    const int A = spec.n_joint_actions();

    // State-based reward, identical across actions.
    Vector state_reward(S);
    for (int s = 0; s < S; ++s)
        state_reward(s) = grid_state_reward(config, decode_state(spec, s).agents);
    Matrix reward(S, A);
    for (int a = 0; a < A; ++a) reward.col(a) = state_reward;

    // Hoist per-state digits and per-cell neighbor lookups out of the fill;
    // each joint row then only touches the product of the robots' valid
    // destinations instead of every joint next state.
    std::vector<std::vector<int>> digits(S);
    for (int s = 0; s < S; ++s) digits[s] = decode_state(spec, s).agents;
    std::vector<long long> place(N);
    place[N - 1] = 1;
    for (int i = N - 2; i >= 0; --i) place[i] = place[i + 1] * cells;

    std::vector<Matrix> kernel(A);
    std::vector<int> intended(N);
    std::vector<std::vector<std::pair<int, double>>> moves(N);
    for (int a = 0; a < A; ++a) {
        const std::vector<int> adig = decode_action(spec, a);
        Matrix slice = Matrix::Zero(S, S);
        for (int s = 0; s < S; ++s) {
            const std::vector<int>& at = digits[s];
            for (int i = 0; i < N; ++i)
                intended[i] = neighbor_by_action(config, at[i])[adig[i]];
            for (int i = 0; i < N; ++i) {
                int others_same = 0;
                if (intended[i] >= 0)
                    for (int j = 0; j < N; ++j)
                        if (j != i && intended[j] == intended[i]) ++others_same;
                const bool congested =
                    intended[i] >= 0 && others_same >= config.congestion_threshold;
                const Vector row = robot_row(config, at[i], adig[i], congested);
                moves[i].clear();
                for (int v = 0; v < cells; ++v)
                    if (row(v) > 0.0) moves[i].emplace_back(v, row(v));
            }
            // Odometer over the robots' destination choices.
            std::vector<std::size_t> pick(N, 0);
            while (true) {
                long long s2 = 0;
                double prob = 1.0;
                for (int i = 0; i < N; ++i) {
                    s2 += place[i] * moves[i][pick[i]].first;
                    prob *= moves[i][pick[i]].second;
                }
                slice(s, s2) += prob;
                int i = N - 1;
                while (i >= 0 && ++pick[i] == moves[i].size()) pick[i--] = 0;
                if (i < 0) break;
            }
        }
        kernel[a] = std::move(slice);
    }

    ScenarioBuild out;
    out.mdp = JointMDP::from_tables(std::move(kernel), std::move(reward));
    validate_mdp(out.mdp);
    out.spec = std::move(spec);
    JointState start;
    start.env = 0;
    start.agents = config.start_cells;
    out.start_state = encode_state(out.spec, start);
    int min_valid = 4;
    for (int cell = 0; cell < cells; ++cell) {
        int v = 0;
        for (int nb : neighbor_by_action(config, cell))
            if (nb >= 0) ++v;
        min_valid = std::min(min_valid, v);
    }
    out.n_valid_joint_actions = static_cast<int>(std::pow(min_valid, N) + 0.5);
    return out;
}

double patrol_catch_reward(const PatrolConfig& config, const std::vector<int>& unit_locations,
                           const std::vector<int>& adversary_locations) {
    const int L = config.n_locations;
    std::vector<int> units_at(L, 0), advs_at(L, 0);
    for (int loc : unit_locations) ++units_at[loc];
    for (int loc : adversary_locations) ++advs_at[loc];
    double r = 0.0;
    for (int l = 0; l < L; ++l)
        if (advs_at[l] > 0)
            r += (1.0 - std::pow(1.0 - config.catch_prob, units_at[l])) * advs_at[l];
    return r;
}

ScenarioBuild build_patrol(const PatrolConfig& config) {
    config.validate();
    const int L = config.n_locations;
    const int U = config.n_units;
    const int D = config.n_adversaries;

    FactoredSpec spec;
    spec.m = U;
    spec.agent_state_sizes.assign(U, L);
    spec.agent_action_sizes.assign(U, L);
    spec.env_state_size = 1;
    for (int j = 0; j < D; ++j) spec.env_state_size *= L;

    const int S = spec.n_joint_states();
    const int A = spec.n_joint_actions();
    const std::vector<int> adv_radix(D, L);

    Vector landed_reward(S);
    for (int s2 = 0; s2 < S; ++s2) {
        const JointState nx = decode_state(spec, s2);
        landed_reward(s2) = patrol_catch_reward(config, nx.agents, decode_joint(adv_radix, nx.env));
    }

    auto spread_row = [L](int target, double hit) {
        Vector row = Vector::Constant(L, (1.0 - hit) / (L - 1));
        row(target) = hit;
        return row;
    };

    std::vector<Matrix> kernel(A);
    Matrix reward(S, A);
    std::vector<Vector> unit_rows(U), adv_rows(D);
    for (int a = 0; a < A; ++a) {
        const std::vector<int> adig = decode_action(spec, a);
        Matrix slice(S, S);
        for (int s = 0; s < S; ++s) {
            const JointState st = decode_state(spec, s);
            const std::vector<int> adv = decode_joint(adv_radix, st.env);
            for (int i = 0; i < U; ++i) {
                bool clash = false;
                for (int i2 = 0; i2 < U && !clash; ++i2)
                    clash = (i2 != i && adig[i2] == adig[i]);
                const double hit =
                    clash ? config.unit_clash_factor * config.unit_success : config.unit_success;
                unit_rows[i] = spread_row(adig[i], hit);
            }
            for (int j = 0; j < D; ++j) {
                // Each adversary tries to hold its current location; a unit
                // heading there degrades the hold probability.
                const int target = adv[j];
                bool covered = false;
                for (int i = 0; i < U && !covered; ++i) covered = (adig[i] == target);
                const double hold = covered
                                        ? config.adversary_evade_factor * config.adversary_hold
                                        : config.adversary_hold;
                adv_rows[j] = spread_row(target, hold);
            }
            for (int s2 = 0; s2 < S; ++s2) {
                const JointState nx = decode_state(spec, s2);
                const std::vector<int> adv_next = decode_joint(adv_radix, nx.env);
                double prob = 1.0;
                for (int i = 0; i < U; ++i) {
                    prob *= unit_rows[i](nx.agents[i]);
                    if (prob == 0.0) break;
                }
                if (prob > 0.0)
                    for (int j = 0; j < D; ++j) {
                        prob *= adv_rows[j](adv_next[j]);
                        if (prob == 0.0) break;
                    }
                slice(s, s2) = prob;
            }
            reward(s, a) = slice.row(s).dot(landed_reward);
        }
        kernel[a] = std::move(slice);
    }

    ScenarioBuild out;
    out.mdp = JointMDP::from_tables(std::move(kernel), std::move(reward));
    validate_mdp(out.mdp);
    out.spec = std::move(spec);
    out.start_state = 0;  // everyone at location 0
    out.n_valid_joint_actions = A;
    return out;
}

}  // namespace mamdp

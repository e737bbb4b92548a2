#pragma once

#include <vector>

#include "mamdp/factored.hpp"
#include "mamdp/mdp.hpp"

namespace mamdp {

/// Multi-robot coverage on a rectangular grid. Robots pick a neighboring cell;
/// a move lands on its intended cell with probability `move_success`, degraded
/// to `move_success * congestion_factor` when at least `congestion_threshold`
/// other robots intend the same destination; the remaining mass spreads
/// uniformly over the robot's other valid neighbor cells. Actions pointing off
/// the grid scatter the robot uniformly over its valid neighbors. Reward is
/// the expected number of covered target cells, where a cell occupied by k
/// robots is covered with probability 1 - (1 - detect_prob)^k.
struct GridConfig {
    int rows = 3;
    int cols = 3;
    int n_robots = 2;
    std::vector<int> targets;        // cell indices, row-major
    std::vector<int> start_cells;    // one per robot
    double move_success = 0.9;       // intended-cell probability, no congestion
    double congestion_factor = 0.9;  // multiplies move_success under congestion
    int congestion_threshold = 1;    // # of OTHER robots intending the same cell
    double detect_prob = 0.75;

    int n_cells() const { return rows * cols; }
    void validate() const;  // throws ConfigError
};

/// Patrol on a ring of locations: patrol units choose a location to occupy
/// and arrive there with probability `unit_success` (degraded to
/// `unit_success * unit_clash_factor` when another unit picked the same
/// location), the rest spreading uniformly over the other locations.
/// Adversaries try to hold their current location; an adversary keeps its spot
/// with probability `adversary_hold` (degraded to `adversary_hold *
/// adversary_evade_factor` when some unit picked that spot), the rest
/// spreading uniformly. Adversary movement is folded into the transition
/// kernel, so the controlled action space is the units' alone. Reward is the
/// expected number of adversaries caught next step: an adversary at a location
/// holding k units is caught with probability 1 - (1 - catch_prob)^k.
struct PatrolConfig {
    int n_locations = 3;
    int n_units = 2;
    int n_adversaries = 1;
    double unit_success = 0.9;          // c
    double adversary_hold = 1.0;        // d
    double unit_clash_factor = 0.9;     // multiplies unit_success on clashes
    double adversary_evade_factor = 0.9;  // multiplies adversary_hold when targeted
    double catch_prob = 0.75;

    void validate() const;  // throws ConfigError
};

struct ScenarioBuild {
    JointMDP mdp;
    FactoredSpec spec;
    int start_state = 0;            // encoded joint start
    int n_valid_joint_actions = 0;  // min over states of scenario-valid joint actions
};

ScenarioBuild build_grid(const GridConfig& config);
ScenarioBuild build_patrol(const PatrolConfig& config);

/// Expected-coverage reward for robots standing at the given cells.
double grid_state_reward(const GridConfig& config, const std::vector<int>& robot_cells);

/// Catch reward of a landed patrol configuration: each adversary at a
/// location holding k units is caught with probability 1 - (1-catch_prob)^k.
double patrol_catch_reward(const PatrolConfig& config, const std::vector<int>& unit_locations,
                           const std::vector<int>& adversary_locations);

}  // namespace mamdp

#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgm {

enum class Action { up = 0, down = 1, left = 2, right = 3, eat = 4 };
inline constexpr int kActionCount = 5;
const char* action_name(Action a);

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

class MazeParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rectangular grid of walls and floor with a single start and goal cell.
struct MazeSpec {
  std::vector<std::string> grid;  // 'W' wall, '.' floor ('S'/'G' already resolved)
  Cell start;
  Cell goal;

  int rows() const { return static_cast<int>(grid.size()); }
  int cols() const { return grid.empty() ? 0 : static_cast<int>(grid[0].size()); }
  bool is_floor(Cell c) const {
    return c.row >= 0 && c.row < rows() && c.col >= 0 && c.col < cols()
        && grid[c.row][c.col] != 'W';
  }

  /// Floor cells in row-major order; their position in this list is the
  /// ground-truth state index.
  std::vector<Cell> floor_cells() const;
  int state_index(Cell c) const;
  /// Cell center in observation coordinates (x = col, y = row).
  static Eigen::Vector2d cell_center(Cell c);
};

/// Parse the maze text format: 'W' wall, '.' floor, 'S' start, 'G' goal.
/// Requires a rectangular grid, an all-wall border, and exactly one S and G.
MazeSpec parse_maze(const std::string& text);
MazeSpec load_maze(const std::string& path);

struct EnvConfig {
  double sigma_obs = 0.1;    // isotropic observation noise, cell units
  double reward_goal = 1.0;  // eat at the goal
  double reward_step = 0.0;  // every other step
  int max_steps = 100;       // episode cutoff
};

struct EnvState {
  Cell position;
  int steps = 0;
  bool done = false;
};

struct StepResult {
  Eigen::Vector2d observation;
  double reward = 0.0;
  bool done = false;
};

/// Maze gridworld with noisy continuous observations. Moving into a wall
/// leaves the position unchanged; "eat" off the goal is idle; "eat" at the
/// goal ends the episode with the goal reward.
class MazeEnv {
 public:
  MazeEnv(MazeSpec spec, EnvConfig config, std::uint64_t seed);

  Eigen::Vector2d reset();
  StepResult step(Action action);

  const EnvState& state() const { return state_; }
  const MazeSpec& spec() const { return spec_; }
  const EnvConfig& config() const { return config_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  Eigen::Vector2d observe();

  MazeSpec spec_;
  EnvConfig config_;
  EnvState state_;
  std::mt19937_64 rng_;
};

/// Deterministic single-step dynamics of the maze as per-action
/// column-stochastic 0/1 matrices over floor cells ((to, from) layout,
/// matching TransitionTensor). "eat" is idle everywhere.
std::vector<Eigen::MatrixXd> true_transition_matrices(const MazeSpec& spec);

/// Where one action deterministically leads from one cell.
Cell apply_move(const MazeSpec& spec, Cell from, Action action);

}  // namespace tgm

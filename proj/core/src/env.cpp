#include "tgm/env.hpp"

#include <fstream>
#include <sstream>

namespace tgm {

const char* action_name(Action a) {
  switch (a) {
    case Action::up: return "up";
    case Action::down: return "down";
    case Action::left: return "left";
    case Action::right: return "right";
    case Action::eat: return "eat";
  }
  return "?";
}

std::vector<Cell> MazeSpec::floor_cells() const {
  std::vector<Cell> cells;
  for (int r = 0; r < rows(); ++r) {
    for (int c = 0; c < cols(); ++c) {
      if (grid[r][c] != 'W') cells.push_back({r, c});
    }
  }
  return cells;
}

int MazeSpec::state_index(Cell c) const {
  int idx = 0;
  for (int r = 0; r < rows(); ++r) {
    for (int col = 0; col < cols(); ++col) {
      if (grid[r][col] != 'W') {
        if (r == c.row && col == c.col) return idx;
        ++idx;
      }
    }
  }
  return -1;
}

Eigen::Vector2d MazeSpec::cell_center(Cell c) {
  return {static_cast<double>(c.col), static_cast<double>(c.row)};
}

MazeSpec parse_maze(const std::string& text) {
  MazeSpec spec;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    spec.grid.push_back(line);
  }
  if (spec.grid.empty()) throw MazeParseError("maze: empty document");

  const int cols = static_cast<int>(spec.grid[0].size());
  int starts = 0, goals = 0;
  for (int r = 0; r < spec.rows(); ++r) {
    if (static_cast<int>(spec.grid[r].size()) != cols) {
      throw MazeParseError("maze: ragged rows");
    }
    for (int c = 0; c < cols; ++c) {
      char& ch = spec.grid[r][c];
      switch (ch) {
        case 'W':
        case '.':
          break;
        case 'S':
          spec.start = {r, c};
          ++starts;
          ch = '.';
          break;
        case 'G':
          spec.goal = {r, c};
          ++goals;
          ch = '.';
          break;
        default:
          throw MazeParseError(std::string("maze: unexpected character '") + ch + "'");
      }
    }
  }
  if (starts != 1) throw MazeParseError("maze: expected exactly one S");
  if (goals != 1) throw MazeParseError("maze: expected exactly one G");
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < cols; ++c) {
      const bool border = r == 0 || c == 0 || r == spec.rows() - 1 || c == cols - 1;
      if (border && spec.grid[r][c] != 'W') {
        throw MazeParseError("maze: border must be wall");
      }
    }
  }
  return spec;
}

MazeSpec load_maze(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MazeParseError("maze: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_maze(buf.str());
}

Cell apply_move(const MazeSpec& spec, Cell from, Action action) {
  Cell to = from;
  switch (action) {
    case Action::up: to.row -= 1; break;
    case Action::down: to.row += 1; break;
    case Action::left: to.col -= 1; break;
    case Action::right: to.col += 1; break;
    case Action::eat: return from;
  }
  return spec.is_floor(to) ? to : from;
}

MazeEnv::MazeEnv(MazeSpec spec, EnvConfig config, std::uint64_t seed)
    : spec_(std::move(spec)), config_(config), rng_(seed) {
  reset();
}

Eigen::Vector2d MazeEnv::observe() {
  std::normal_distribution<double> noise(0.0, config_.sigma_obs);
  Eigen::Vector2d obs = MazeSpec::cell_center(state_.position);
  if (config_.sigma_obs > 0.0) {
    obs.x() += noise(rng_);
    obs.y() += noise(rng_);
  }
  return obs;
}

Eigen::Vector2d MazeEnv::reset() {
  state_ = EnvState{spec_.start, 0, false};
  return observe();
}

StepResult MazeEnv::step(Action action) {
  if (state_.done) throw std::logic_error("MazeEnv: step after episode end");
  StepResult result;
  result.reward = config_.reward_step;
  if (action == Action::eat) {
    if (state_.position == spec_.goal) {
      state_.done = true;
      result.reward = config_.reward_goal;
    }
  } else {
    state_.position = apply_move(spec_, state_.position, action);
  }
  ++state_.steps;
  if (state_.steps >= config_.max_steps) state_.done = true;
  result.done = state_.done;
  result.observation = observe();
  return result;
}

std::vector<Eigen::MatrixXd> true_transition_matrices(const MazeSpec& spec) {
  const auto cells = spec.floor_cells();
  const int k = static_cast<int>(cells.size());
  std::vector<Eigen::MatrixXd> out(kActionCount, Eigen::MatrixXd::Zero(k, k));
  for (int a = 0; a < kActionCount; ++a) {
    for (int from = 0; from < k; ++from) {
      const Cell to = apply_move(spec, cells[from], static_cast<Action>(a));
      out[a](spec.state_index(to), from) = 1.0;
    }
  }
  return out;
}

}  // namespace tgm

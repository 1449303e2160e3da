#include "zpd/envs.h"

#include <algorithm>

namespace zpd {

std::string EnvName(EnvId id) {
  switch (id) {
    case EnvId::kCatch:
      return "catch";
    case EnvId::kGridGoal:
      return "gridgoal";
  }
  return "unknown";
}

EnvId ParseEnvId(std::string_view name) {
  if (name == "catch") return EnvId::kCatch;
  if (name == "gridgoal") return EnvId::kGridGoal;
  throw ContractViolation("unknown environment '" + std::string(name) +
                          "' (expected catch or gridgoal)");
}

// ---------------------------------------------------------------- Catch

CatchEnv::CatchEnv(int width, int height, int balls_per_episode)
    : width_(width), height_(height), balls_per_episode_(balls_per_episode) {
  Require(width >= 1 && height >= 2 && balls_per_episode >= 1,
          "CatchEnv: bad geometry");
  spec_.env_id = EnvId::kCatch;
  spec_.obs_dim = width * height + width;
  spec_.action_count = 3;
  // Each ball needs height - 1 steps to reach the bottom row.
  spec_.max_episode_steps = balls_per_episode * (height - 1);
  spec_.return_bounds = {-static_cast<double>(balls_per_episode),
                         static_cast<double>(balls_per_episode)};
}

Observation CatchEnv::Reset(Rng rng) {
  rng_ = std::move(rng);
  paddle_ = width_ / 2;
  balls_done_ = 0;
  steps_ = 0;
  terminal_ = false;
  SpawnBall();
  return Observe();
}

void CatchEnv::SpawnBall() {
  ball_row_ = 0;
  ball_col_ = UniformInt(rng_, width_);
}

void CatchEnv::set_paddle_column(int column) {
  Require(column >= 0 && column < width_, "CatchEnv: paddle column out of range");
  paddle_ = column;
}

StepResult CatchEnv::Step(int action) {
  Require(!terminal_, "CatchEnv: Step called on a finished episode");
  Require(action >= 0 && action < spec_.action_count,
          "CatchEnv: action " + std::to_string(action) + " out of range");
  paddle_ = std::clamp(paddle_ + (action - kStay), 0, width_ - 1);
  ++ball_row_;
  ++steps_;

  StepResult result;
  if (ball_row_ == height_ - 1) {
    result.reward = (ball_col_ == paddle_) ? 1.0 : -1.0;
    ++balls_done_;
    if (balls_done_ == balls_per_episode_) {
      terminal_ = true;
    } else {
      SpawnBall();
    }
  }
  result.terminal = terminal_;
  result.observation = Observe();
  return result;
}

Observation CatchEnv::Observe() const {
  Observation obs(spec_.obs_dim, 0.0);
  obs[ball_row_ * width_ + ball_col_] = 1.0;
  obs[width_ * height_ + paddle_] = 1.0;
  return obs;
}

// ---------------------------------------------------------------- GridGoal

GridGoalEnv::GridGoalEnv(int size, double step_penalty, int max_steps)
    : size_(size), step_penalty_(step_penalty) {
  Require(size >= 2 && max_steps >= 1, "GridGoalEnv: bad geometry");
  spec_.env_id = EnvId::kGridGoal;
  spec_.obs_dim = size * size;
  spec_.action_count = 4;
  spec_.max_episode_steps = max_steps;
  // Best case walks the Manhattan path; worst case never reaches the goal.
  const int shortest = 2 * size - 2;
  spec_.return_bounds = {-step_penalty * max_steps,
                         1.0 - step_penalty * (shortest - 1)};
}

Observation GridGoalEnv::Reset(Rng /*rng*/) {
  row_ = 0;
  col_ = 0;
  steps_ = 0;
  terminal_ = false;
  return Observe();
}

void GridGoalEnv::set_position(int row, int column) {
  Require(row >= 0 && row < size_ && column >= 0 && column < size_,
          "GridGoalEnv: position out of range");
  row_ = row;
  col_ = column;
  terminal_ = false;
}

StepResult GridGoalEnv::Step(int action) {
  Require(!terminal_, "GridGoalEnv: Step called on a finished episode");
  Require(action >= 0 && action < spec_.action_count,
          "GridGoalEnv: action " + std::to_string(action) + " out of range");
  switch (action) {
    case kUp:
      row_ = std::max(row_ - 1, 0);
      break;
    case kDown:
      row_ = std::min(row_ + 1, size_ - 1);
      break;
    case kLeft:
      col_ = std::max(col_ - 1, 0);
      break;
    case kRight:
      col_ = std::min(col_ + 1, size_ - 1);
      break;
  }
  ++steps_;

  StepResult result;
  if (row_ == size_ - 1 && col_ == size_ - 1) {
    result.reward = 1.0;
    terminal_ = true;
  } else {
    result.reward = -step_penalty_;
    terminal_ = steps_ >= spec_.max_episode_steps;
  }
  result.terminal = terminal_;
  result.observation = Observe();
  return result;
}

Observation GridGoalEnv::Observe() const {
  Observation obs(spec_.obs_dim, 0.0);
  obs[row_ * size_ + col_] = 1.0;
  return obs;
}

int GridGoalEnv::CellOf(const Observation& obs) {
  auto it = std::find(obs.begin(), obs.end(), 1.0);
  return it == obs.end() ? -1 : static_cast<int>(it - obs.begin());
}

// ----------------------------------------------------------------

std::unique_ptr<Environment> MakeEnv(EnvId id) {
  switch (id) {
    case EnvId::kCatch:
      return std::make_unique<CatchEnv>();
    case EnvId::kGridGoal:
      return std::make_unique<GridGoalEnv>();
  }
  throw ContractViolation("MakeEnv: unknown id");
}

EnvSpec DefaultSpec(EnvId id) { return MakeEnv(id)->spec(); }

}  // namespace zpd

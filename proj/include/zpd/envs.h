#ifndef ZPD_ENVS_H_
#define ZPD_ENVS_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "zpd/common.h"

namespace zpd {

using Observation = std::vector<double>;

enum class EnvId { kCatch, kGridGoal };

std::string EnvName(EnvId id);
// Accepts "catch" and "gridgoal"; throws ContractViolation otherwise.
EnvId ParseEnvId(std::string_view name);

struct ReturnBounds {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const ReturnBounds&) const = default;
};

struct EnvSpec {
  EnvId env_id = EnvId::kCatch;
  int obs_dim = 0;
  int action_count = 0;
  int max_episode_steps = 0;
  ReturnBounds return_bounds;

  bool operator==(const EnvSpec&) const = default;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminal = false;
};

// Episodic MDP with a fixed observation width and discrete actions.
// Instances are single-threaded.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;

  // Starts a new episode. Every stochastic choice of the episode is drawn
  // from `rng`, which the environment keeps.
  virtual Observation Reset(Rng rng) = 0;

  // Throws ContractViolation for an out-of-range action or when called on a
  // finished episode.
  virtual StepResult Step(int action) = 0;
};

// Paddle-and-falling-ball game. Actions: 0 left, 1 stay, 2 right.
// Observation: one-hot height x width ball grid (row-major) followed by a
// one-hot paddle column. Reward +1 for a catch, -1 for a miss, 0 otherwise;
// the episode ends after `balls_per_episode` balls.
class CatchEnv : public Environment {
 public:
  static constexpr int kLeft = 0;
  static constexpr int kStay = 1;
  static constexpr int kRight = 2;

  CatchEnv(int width = 5, int height = 7, int balls_per_episode = 10);

  const EnvSpec& spec() const override { return spec_; }
  Observation Reset(Rng rng) override;
  StepResult Step(int action) override;

  int width() const { return width_; }
  int height() const { return height_; }
  int paddle_column() const { return paddle_; }
  int ball_row() const { return ball_row_; }
  int ball_column() const { return ball_col_; }

  // Places the paddle; test hook for boundary cases.
  void set_paddle_column(int column);

 private:
  Observation Observe() const;
  void SpawnBall();

  int width_;
  int height_;
  int balls_per_episode_;
  EnvSpec spec_;
  Rng rng_;
  int paddle_ = 0;
  int ball_row_ = 0;
  int ball_col_ = 0;
  int balls_done_ = 0;
  int steps_ = 0;
  bool terminal_ = true;
};

// N x N grid, start (0,0), goal (N-1,N-1). Actions: 0 up, 1 down, 2 left,
// 3 right; moves into a wall leave the agent in place. Each non-goal step
// costs `step_penalty`; entering the goal pays +1 and ends the episode. The
// episode is cut off (terminal) after `max_steps` steps.
class GridGoalEnv : public Environment {
 public:
  static constexpr int kUp = 0;
  static constexpr int kDown = 1;
  static constexpr int kLeft = 2;
  static constexpr int kRight = 3;

  GridGoalEnv(int size = 8, double step_penalty = 0.01, int max_steps = 100);

  const EnvSpec& spec() const override { return spec_; }
  Observation Reset(Rng rng) override;
  StepResult Step(int action) override;

  int row() const { return row_; }
  int column() const { return col_; }
  int size() const { return size_; }

  // Cell index of the one-hot entry in an observation, or -1.
  static int CellOf(const Observation& obs);

  // Teleports the agent; test hook, also used to replay stored transitions.
  void set_position(int row, int column);

 private:
  Observation Observe() const;

  int size_;
  double step_penalty_;
  EnvSpec spec_;
  int row_ = 0;
  int col_ = 0;
  int steps_ = 0;
  bool terminal_ = true;
};

std::unique_ptr<Environment> MakeEnv(EnvId id);
EnvSpec DefaultSpec(EnvId id);

}  // namespace zpd

#endif  // ZPD_ENVS_H_

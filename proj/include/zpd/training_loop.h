#ifndef ZPD_TRAINING_LOOP_H_
#define ZPD_TRAINING_LOOP_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>

#include "zpd/agent.h"
#include "zpd/envs.h"
#include "zpd/replay.h"
#include "zpd/run_config.h"

namespace zpd {

// Stream ids for MakeStream; each consumer of randomness in a run gets its
// own stream so that, e.g., teacher selection never shifts exploration.
enum StreamId : std::uint64_t {
  kStreamInit = 1,
  kStreamEnv = 2,
  kStreamAct = 3,
  kStreamBlend = 4,
  kStreamSelect = 5,
};

// Environment interaction, replay and optimisation state of one DDQN
// learner. Teacher training and student training both drive this; they differ
// in the teacher data and blend schedule handed to Update().
class DdqnLoop {
 public:
  DdqnLoop(const RunConfig& cfg, std::size_t buffer_capacity,
           const LossConfig& loss);

  // Takes one epsilon-greedy environment step and stores it. Returns the
  // finished episode's return when the step ended an episode.
  std::optional<double> EnvStep();

  // True when step() is a multiple of steps_per_update.
  bool UpdateDue() const;
  // True once step() exceeds the warmup.
  bool WarmedUp() const;

  // Blends a minibatch and applies one learning step. Returns the
  // pre-update loss.
  double Update(std::span<const Transition> teacher_data,
                const BlendSchedule& schedule);

  // Refreshes the target network when step() is a multiple of the period.
  void MaybeSyncTarget();

  std::int64_t step() const { return step_; }
  std::int64_t updates_applied() const { return updates_applied_; }
  const ReturnWindow& returns() const { return returns_; }
  const QNetwork& net() const { return net_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const EnvSpec& env_spec() const { return env_->spec(); }

 private:
  RunConfig cfg_;
  LossConfig loss_;
  EpsilonSchedule epsilon_;
  std::unique_ptr<Environment> env_;
  Rng env_rng_;
  Rng act_rng_;
  Rng blend_rng_;
  QNetwork net_;
  ReplayBuffer buffer_;
  ReturnWindow returns_;
  Observation obs_;
  double episode_return_ = 0.0;
  std::int64_t step_ = 0;
  std::int64_t updates_applied_ = 0;
};

}  // namespace zpd

#endif  // ZPD_TRAINING_LOOP_H_

#include "zpd/training_loop.h"

namespace zpd {

namespace {

QNetwork InitNet(const RunConfig& cfg, const EnvSpec& spec) {
  Rng init = MakeStream(cfg.seed, kStreamInit);
  return MakeQNetwork(cfg.LayerSizes(spec), cfg.learning_rate,
                      cfg.target_sync_period, init);
}

const RunConfig& Validated(const RunConfig& cfg) {
  cfg.Validate();
  return cfg;
}

}  // namespace

DdqnLoop::DdqnLoop(const RunConfig& cfg, std::size_t buffer_capacity,
                   const LossConfig& loss)
    : cfg_(Validated(cfg)),
      loss_(loss),
      epsilon_(cfg.Epsilon()),
      env_(MakeEnv(cfg.env_id)),
      env_rng_(MakeStream(cfg.seed, kStreamEnv)),
      act_rng_(MakeStream(cfg.seed, kStreamAct)),
      blend_rng_(MakeStream(cfg.seed, kStreamBlend)),
      net_(InitNet(cfg, env_->spec())),
      buffer_(buffer_capacity, env_->spec().obs_dim),
      returns_(static_cast<std::size_t>(cfg.reward_window)) {
  obs_ = env_->Reset(Rng(env_rng_()));
}

std::optional<double> DdqnLoop::EnvStep() {
  const double eps = epsilon_.At(step_);
  const int action = Act(net_, obs_, eps, act_rng_);
  StepResult result = env_->Step(action);
  ++step_;
  episode_return_ += result.reward;

  Transition t;
  t.state = std::move(obs_);
  t.action = action;
  t.reward = result.reward;
  t.next_state = result.observation;
  t.terminal = result.terminal;
  t.origin = Origin::kStudent;
  buffer_.Push(t);

  if (!result.terminal) {
    obs_ = std::move(result.observation);
    return std::nullopt;
  }
  const double finished = episode_return_;
  returns_.Add(finished);
  episode_return_ = 0.0;
  obs_ = env_->Reset(Rng(env_rng_()));
  return finished;
}

bool DdqnLoop::UpdateDue() const { return step_ % cfg_.steps_per_update == 0; }

bool DdqnLoop::WarmedUp() const { return step_ > cfg_.min_fill; }

double DdqnLoop::Update(std::span<const Transition> teacher_data,
                        const BlendSchedule& schedule) {
  const Minibatch batch =
      Blend(teacher_data, buffer_, schedule, step_, cfg_.batch_size, blend_rng_);
  const double loss = LearnStep(net_, batch, loss_);
  ++updates_applied_;
  return loss;
}

void DdqnLoop::MaybeSyncTarget() {
  if (step_ % net_.sync_period == 0) net_.SyncTarget();
}

}  // namespace zpd

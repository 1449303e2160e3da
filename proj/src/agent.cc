#include "zpd/agent.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace zpd {

QNetwork MakeQNetwork(const std::vector<int>& layer_sizes, double learning_rate,
                      std::int64_t sync_period, Rng& rng) {
  Require(sync_period > 0, "MakeQNetwork: sync_period must be positive");
  QNetwork net;
  net.online = nnet::InitMlp(layer_sizes, rng);
  net.target = nnet::SyncTarget(net.online);
  net.adam = nnet::InitAdam(net.online, learning_rate);
  net.sync_period = sync_period;
  return net;
}

double EpsilonSchedule::At(std::int64_t step) const {
  if (step >= decay_steps) return eps_end;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return eps_start + (eps_end - eps_start) * frac;
}

int Argmax(std::span<const double> values) {
  Require(!values.empty(), "Argmax of an empty vector");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

int ActGreedyOrRandom(const nnet::MlpParams& params,
                      std::span<const double> observation, double epsilon,
                      Rng& rng) {
  Require(epsilon >= 0.0 && epsilon <= 1.0, "Act: epsilon must lie in [0, 1]");
  if (Uniform01(rng) < epsilon) return UniformInt(rng, params.output_size());
  return Argmax(nnet::Forward(params, observation));
}

int Act(const QNetwork& net, std::span<const double> observation,
        double epsilon, Rng& rng) {
  return ActGreedyOrRandom(net.online, observation, epsilon, rng);
}

namespace {

double TargetFromOutputs(std::span<const double> online_next,
                         std::span<const double> target_next,
                         const Transition& t, double gamma) {
  if (t.terminal) return t.reward;
  return t.reward + gamma * target_next[Argmax(online_next)];
}

void CheckAction(const QNetwork& net, const Transition& t) {
  Require(t.action >= 0 && t.action < net.online.output_size(),
          "transition action " + std::to_string(t.action) + " out of range");
}

// Large-margin term and (optionally) its subgradient w.r.t. q.
double MarginTerm(std::span<const double> q, int expert, double margin,
                  std::span<double> grad, double weight) {
  int best = 0;
  double best_value = q[0] + (expert == 0 ? 0.0 : margin);
  for (std::size_t a = 1; a < q.size(); ++a) {
    const double v = q[a] + (static_cast<int>(a) == expert ? 0.0 : margin);
    if (v > best_value) {
      best_value = v;
      best = static_cast<int>(a);
    }
  }
  if (!grad.empty()) {
    grad[best] += weight;
    grad[expert] -= weight;
  }
  return best_value - q[expert];
}

}  // namespace

double TdTarget(const QNetwork& net, const Transition& t, double gamma) {
  if (t.terminal) return t.reward;
  const auto online_next = nnet::Forward(net.online, t.next_state);
  const auto target_next = nnet::Forward(net.target, t.next_state);
  return TargetFromOutputs(online_next, target_next, t, gamma);
}

double TdLoss(const QNetwork& net, const Transition& t, double gamma) {
  CheckAction(net, t);
  const double y = TdTarget(net, t, gamma);
  const double diff = y - nnet::Forward(net.online, t.state)[t.action];
  const double loss = diff * diff;
  if (!std::isfinite(loss)) throw NonFiniteError("non-finite td_loss");
  return loss;
}

double MarginLoss(const QNetwork& net, const Transition& t, double margin) {
  if (t.origin != Origin::kTeacher) return 0.0;
  CheckAction(net, t);
  const auto q = nnet::Forward(net.online, t.state);
  return MarginTerm(q, t.action, margin, {}, 0.0);
}

nnet::LossGradient StudentLoss(const QNetwork& net, const Minibatch& batch,
                               const LossConfig& cfg) {
  Require(batch.size() > 0, "StudentLoss: empty minibatch");
  const std::size_t n = batch.size();
  const std::size_t dim = net.online.input_size();

  nnet::Matrix states(n, dim);
  nnet::Matrix next_states(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = batch.transitions[i];
    Require(t.state.size() == dim && t.next_state.size() == dim,
            "StudentLoss: transition width does not match the network");
    CheckAction(net, t);
    std::copy(t.state.begin(), t.state.end(), states.row(i).begin());
    std::copy(t.next_state.begin(), t.next_state.end(), next_states.row(i).begin());
  }

  const nnet::Matrix online_next = nnet::ForwardBatch(net.online, next_states);
  const nnet::Matrix target_next = nnet::ForwardBatch(net.target, next_states);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    targets[i] = TargetFromOutputs(online_next.row(i), target_next.row(i),
                                   batch.transitions[i], cfg.gamma);
    if (!std::isfinite(targets[i])) {
      throw NonFiniteError("non-finite TD target for sample " + std::to_string(i));
    }
  }

  auto per_sample = [&](std::size_t i, std::span<const double> q,
                        std::span<double> grad) {
    const Transition& t = batch.transitions[i];
    const double diff = targets[i] - q[t.action];
    double loss = diff * diff;
    grad[t.action] += -2.0 * diff;
    if (cfg.lambda_e != 0.0 && t.origin == Origin::kTeacher) {
      loss += cfg.lambda_e * MarginTerm(q, t.action, cfg.margin, grad, cfg.lambda_e);
    }
    if (!std::isfinite(loss)) {
      throw NonFiniteError("non-finite td/margin loss for sample " + std::to_string(i));
    }
    return loss;
  };
  return nnet::Backward(net.online, states, per_sample, cfg.lambda_2);
}

double LearnStep(QNetwork& net, const Minibatch& batch, const LossConfig& cfg) {
  nnet::LossGradient lg = StudentLoss(net, batch, cfg);
  nnet::AdamApply(net.online, net.adam, lg.gradients);
  return lg.loss;
}

void ReturnWindow::Add(double episode_return) {
  returns_.push_back(episode_return);
  if (returns_.size() > window_) returns_.pop_front();
  ++episodes_;
}

std::optional<double> ReturnWindow::Mean() const {
  if (returns_.empty()) return std::nullopt;
  double sum = 0.0;
  for (double r : returns_) sum += r;
  return sum / static_cast<double>(returns_.size());
}

}  // namespace zpd

#ifndef ZPD_AGENT_H_
#define ZPD_AGENT_H_

// Double-DQN machinery shared by teacher and student training: epsilon-greedy
// acting, the TD / large-margin / L2 loss assembly and the optimizer step.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "zpd/common.h"
#include "zpd/nnet.h"
#include "zpd/replay.h"

namespace zpd {

struct QNetwork {
  nnet::MlpParams online;
  nnet::MlpParams target;
  nnet::AdamState adam;
  std::int64_t sync_period = 1000;  // environment steps

  void SyncTarget() { target = nnet::SyncTarget(online); }
};

// Online weights from `rng`, target = copy of online, fresh Adam state.
QNetwork MakeQNetwork(const std::vector<int>& layer_sizes, double learning_rate,
                      std::int64_t sync_period, Rng& rng);

struct LossConfig {
  double gamma = 0.99;
  double lambda_e = 0.0;   // weight of the large-margin term
  double lambda_2 = 0.0;   // weight of the L2 penalty
  double margin = 0.8;     // l(a_E, a) for a != a_E
};

// Linear decay from eps_start to eps_end over decay_steps, then flat.
struct EpsilonSchedule {
  double eps_start = 1.0;
  double eps_end = 0.05;
  std::int64_t decay_steps = 1;
  double eval_eps = 0.01;

  double At(std::int64_t step) const;
};

// Index of the largest value; ties go to the lowest index.
int Argmax(std::span<const double> values);

// With probability `epsilon` a uniform random action, else the greedy action
// of the online network.
int Act(const QNetwork& net, std::span<const double> observation,
        double epsilon, Rng& rng);
int ActGreedyOrRandom(const nnet::MlpParams& params,
                      std::span<const double> observation, double epsilon,
                      Rng& rng);

// Double-DQN target: r + gamma * Q_target(s', argmax_a Q_online(s', a)),
// without the bootstrap on terminal transitions.
double TdTarget(const QNetwork& net, const Transition& t, double gamma);

// (TdTarget - Q_online(s, a))^2.
double TdLoss(const QNetwork& net, const Transition& t, double gamma);

// max_a [Q(s,a) + l(a_E,a)] - Q(s,a_E) with a_E = t.action. Zero for
// student-origin transitions.
double MarginLoss(const QNetwork& net, const Transition& t, double margin);

// mean_batch(td + lambda_e * margin) + lambda_2 * sum(theta^2) over the
// online parameters, with its gradient.
nnet::LossGradient StudentLoss(const QNetwork& net, const Minibatch& batch,
                               const LossConfig& cfg);

// One Adam step on StudentLoss. Returns the loss before the update.
double LearnStep(QNetwork& net, const Minibatch& batch, const LossConfig& cfg);

// Mean of the trailing `window` episode returns.
class ReturnWindow {
 public:
  explicit ReturnWindow(std::size_t window = 100) : window_(window) {}

  void Add(double episode_return);
  std::optional<double> Mean() const;
  std::int64_t episodes() const { return episodes_; }

 private:
  std::size_t window_;
  std::deque<double> returns_;
  std::int64_t episodes_ = 0;
};

}  // namespace zpd

#endif  // ZPD_AGENT_H_

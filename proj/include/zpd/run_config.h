#ifndef ZPD_RUN_CONFIG_H_
#define ZPD_RUN_CONFIG_H_

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "zpd/agent.h"
#include "zpd/envs.h"

namespace zpd {

// Hyperparameters of one teacher or student run. Defaults are the desk-scale
// student settings; DefaultTeacherConfig adjusts the teacher-only fields.
struct RunConfig {
  EnvId env_id = EnvId::kCatch;
  std::int64_t total_steps = 150000;
  int steps_per_update = 2;
  int batch_size = 32;
  double gamma = 0.99;
  double learning_rate = 1e-3;
  std::int64_t target_sync_period = 1000;
  std::int64_t student_buffer_capacity = 50000;
  std::int64_t teacher_buffer_capacity = 100000;
  double rho = 0.5;
  std::int64_t anneal_horizon = 0;  // 0 = 10% of total_steps
  double lambda_e = 0.1;
  double lambda_2 = 1e-5;
  double margin = 0.8;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.2;
  double eval_eps = 0.01;
  std::uint64_t seed = 0;
  int reward_window = 100;
  std::int64_t min_fill = 1000;  // warmup steps before the first update
  std::int64_t log_interval = 500;
  std::vector<int> hidden_sizes = {64, 64};
  std::int64_t dataset_window = 5000;
  double success_threshold = 8.0;  // for steps_to_threshold

  std::int64_t EffectiveAnnealHorizon() const;
  EpsilonSchedule Epsilon() const;
  LossConfig Loss() const;
  std::vector<int> LayerSizes(const EnvSpec& spec) const;

  // Throws ContractViolation naming the first invalid field.
  void Validate() const;
};

RunConfig DefaultStudentConfig(EnvId env);
// Teacher: 4 steps per update, no margin or L2 term, larger own buffer.
RunConfig DefaultTeacherConfig(EnvId env);

nlohmann::json ToJson(const RunConfig& cfg);
RunConfig RunConfigFromJson(const nlohmann::json& j);

}  // namespace zpd

#endif  // ZPD_RUN_CONFIG_H_

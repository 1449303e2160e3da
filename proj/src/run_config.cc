#include "zpd/run_config.h"

#include <string>

namespace zpd {

std::int64_t RunConfig::EffectiveAnnealHorizon() const {
  if (anneal_horizon > 0) return anneal_horizon;
  return std::max<std::int64_t>(1, total_steps / 10);
}

EpsilonSchedule RunConfig::Epsilon() const {
  EpsilonSchedule eps;
  eps.eps_start = eps_start;
  eps.eps_end = eps_end;
  eps.decay_steps = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(eps_decay_fraction * static_cast<double>(total_steps)));
  eps.eval_eps = eval_eps;
  return eps;
}

LossConfig RunConfig::Loss() const {
  return LossConfig{gamma, lambda_e, lambda_2, margin};
}

std::vector<int> RunConfig::LayerSizes(const EnvSpec& spec) const {
  std::vector<int> sizes;
  sizes.push_back(spec.obs_dim);
  sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes.push_back(spec.action_count);
  return sizes;
}

void RunConfig::Validate() const {
  auto check = [](bool ok, const char* field) {
    if (!ok) throw ContractViolation(std::string("invalid RunConfig.") + field);
  };
  check(total_steps > 0, "total_steps");
  check(steps_per_update >= 1, "steps_per_update");
  check(batch_size > 0, "batch_size");
  check(gamma > 0.0 && gamma <= 1.0, "gamma");
  check(learning_rate > 0.0, "learning_rate");
  check(target_sync_period > 0, "target_sync_period");
  check(student_buffer_capacity > 0, "student_buffer_capacity");
  check(teacher_buffer_capacity > 0, "teacher_buffer_capacity");
  check(rho >= 0.0 && rho <= 1.0, "rho");
  check(anneal_horizon >= 0, "anneal_horizon");
  check(lambda_e >= 0.0, "lambda_e");
  check(lambda_2 >= 0.0, "lambda_2");
  check(margin >= 0.0, "margin");
  check(eps_start >= 0.0 && eps_start <= 1.0, "eps_start");
  check(eps_end >= 0.0 && eps_end <= 1.0, "eps_end");
  check(eps_decay_fraction > 0.0, "eps_decay_fraction");
  check(eval_eps >= 0.0 && eval_eps <= 1.0, "eval_eps");
  check(reward_window > 0, "reward_window");
  check(min_fill >= 0, "min_fill");
  check(log_interval > 0, "log_interval");
  for (int h : hidden_sizes) check(h > 0, "hidden_sizes");
  check(dataset_window > 0, "dataset_window");
}

RunConfig DefaultStudentConfig(EnvId env) {
  RunConfig cfg;
  cfg.env_id = env;
  if (env == EnvId::kGridGoal) {
    cfg.lambda_e = 0.01;
    cfg.success_threshold = 0.8;
  }
  return cfg;
}

RunConfig DefaultTeacherConfig(EnvId env) {
  RunConfig cfg = DefaultStudentConfig(env);
  cfg.steps_per_update = 4;
  cfg.lambda_e = 0.0;
  cfg.lambda_2 = 0.0;
  cfg.rho = 0.0;
  return cfg;
}

nlohmann::json ToJson(const RunConfig& cfg) {
  return nlohmann::json{
      {"env_id", EnvName(cfg.env_id)},
      {"total_steps", cfg.total_steps},
      {"steps_per_update", cfg.steps_per_update},
      {"batch_size", cfg.batch_size},
      {"gamma", cfg.gamma},
      {"learning_rate", cfg.learning_rate},
      {"target_sync_period", cfg.target_sync_period},
      {"student_buffer_capacity", cfg.student_buffer_capacity},
      {"teacher_buffer_capacity", cfg.teacher_buffer_capacity},
      {"rho", cfg.rho},
      {"anneal_horizon", cfg.EffectiveAnnealHorizon()},
      {"lambda_e", cfg.lambda_e},
      {"lambda_2", cfg.lambda_2},
      {"margin", cfg.margin},
      {"eps_start", cfg.eps_start},
      {"eps_end", cfg.eps_end},
      {"eps_decay_fraction", cfg.eps_decay_fraction},
      {"eval_eps", cfg.eval_eps},
      {"seed", cfg.seed},
      {"reward_window", cfg.reward_window},
      {"min_fill", cfg.min_fill},
      {"log_interval", cfg.log_interval},
      {"hidden_sizes", cfg.hidden_sizes},
      {"dataset_window", cfg.dataset_window},
      {"success_threshold", cfg.success_threshold},
  };
}

RunConfig RunConfigFromJson(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.env_id = ParseEnvId(j.at("env_id").get<std::string>());
  j.at("total_steps").get_to(cfg.total_steps);
  j.at("steps_per_update").get_to(cfg.steps_per_update);
  j.at("batch_size").get_to(cfg.batch_size);
  j.at("gamma").get_to(cfg.gamma);
  j.at("learning_rate").get_to(cfg.learning_rate);
  j.at("target_sync_period").get_to(cfg.target_sync_period);
  j.at("student_buffer_capacity").get_to(cfg.student_buffer_capacity);
  j.at("teacher_buffer_capacity").get_to(cfg.teacher_buffer_capacity);
  j.at("rho").get_to(cfg.rho);
  j.at("anneal_horizon").get_to(cfg.anneal_horizon);
  j.at("lambda_e").get_to(cfg.lambda_e);
  j.at("lambda_2").get_to(cfg.lambda_2);
  j.at("margin").get_to(cfg.margin);
  j.at("eps_start").get_to(cfg.eps_start);
  j.at("eps_end").get_to(cfg.eps_end);
  j.at("eps_decay_fraction").get_to(cfg.eps_decay_fraction);
  j.at("eval_eps").get_to(cfg.eval_eps);
  j.at("seed").get_to(cfg.seed);
  j.at("reward_window").get_to(cfg.reward_window);
  j.at("min_fill").get_to(cfg.min_fill);
  j.at("log_interval").get_to(cfg.log_interval);
  j.at("hidden_sizes").get_to(cfg.hidden_sizes);
  j.at("dataset_window").get_to(cfg.dataset_window);
  j.at("success_threshold").get_to(cfg.success_threshold);
  return cfg;
}

}  // namespace zpd

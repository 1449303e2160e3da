#ifndef ZPD_TEACHERBANK_H_
#define ZPD_TEACHERBANK_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "zpd/envs.h"
#include "zpd/nnet.h"
#include "zpd/replay.h"
#include "zpd/run_config.h"

namespace zpd {

// A saved teacher policy with its reward at save time and the transitions
// the teacher experienced just before it.
struct Snapshot {
  int index = 0;
  std::int64_t step_saved = 0;
  double reward_avg = 0.0;  // trailing training-episode average at save time
  nnet::MlpParams params;
  std::vector<Transition> dataset;  // origin = teacher
};

struct TeacherBank {
  EnvSpec env_spec;
  std::vector<Snapshot> snapshots;  // ordered by step_saved

  int size() const { return static_cast<int>(snapshots.size()); }
  double MaxReward() const;
  std::vector<double> Rewards() const;

  // Throws ContractViolation if snapshots are empty, misnumbered or not in
  // strictly increasing step order.
  void Validate() const;
};

// Progress of a teacher run, logged every cfg.log_interval steps.
struct TeacherTrace {
  std::vector<std::pair<std::int64_t, double>> avg_curve;  // (step, avg100)
  std::int64_t updates_applied = 0;
  std::int64_t episodes = 0;
};

// Trains a plain DDQN teacher (cfg.lambda_e / lambda_2 / rho are ignored)
// and snapshots it after each step in `snapshot_steps`.
TeacherBank TrainTeacher(const RunConfig& cfg,
                         std::span<const std::int64_t> snapshot_steps,
                         TeacherTrace* trace = nullptr);

// Evenly spaced schedule: every `interval` steps up to total_steps.
std::vector<std::int64_t> UniformSchedule(std::int64_t total_steps,
                                          std::int64_t interval);
// `count` snapshots at total_steps * i / count, i = 1..count.
std::vector<std::int64_t> SpacedSchedule(std::int64_t total_steps, int count);

// Bank directory: manifest.json plus one params and one dataset file per
// snapshot.
inline constexpr int kBankFormatVersion = 1;

void SaveBank(const TeacherBank& bank, const std::filesystem::path& dir);

// Throws LoadError naming the offending field on version, checksum, count or
// ordering problems, and on an environment different from `expected_env`.
TeacherBank LoadBank(const std::filesystem::path& dir,
                     std::optional<EnvId> expected_env = std::nullopt);

// Mean return of `episodes` epsilon-greedy episodes with `eval_eps`.
double EvaluatePolicy(const nnet::MlpParams& params, EnvId env, int episodes,
                      double eval_eps, Rng& rng);
double EvaluateSnapshot(const Snapshot& snapshot, EnvId env, int episodes,
                        double eval_eps, Rng& rng);

}  // namespace zpd

#endif  // ZPD_TEACHERBANK_H_

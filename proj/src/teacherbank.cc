#include "zpd/teacherbank.h"

#include <algorithm>
#include <fstream>
#include <string>

#include "zpd/binary_io.h"
#include "zpd/training_loop.h"

namespace zpd {

double TeacherBank::MaxReward() const {
  Require(!snapshots.empty(), "TeacherBank::MaxReward on an empty bank");
  double best = snapshots.front().reward_avg;
  for (const auto& s : snapshots) best = std::max(best, s.reward_avg);
  return best;
}

std::vector<double> TeacherBank::Rewards() const {
  std::vector<double> r;
  r.reserve(snapshots.size());
  for (const auto& s : snapshots) r.push_back(s.reward_avg);
  return r;
}

void TeacherBank::Validate() const {
  Require(!snapshots.empty(), "TeacherBank: no snapshots");
  for (int k = 0; k < size(); ++k) {
    Require(snapshots[k].index == k, "TeacherBank: snapshot index out of sequence");
    if (k > 0) {
      Require(snapshots[k].step_saved > snapshots[k - 1].step_saved,
              "TeacherBank: step_saved not strictly increasing");
    }
  }
}

std::vector<std::int64_t> UniformSchedule(std::int64_t total_steps,
                                          std::int64_t interval) {
  Require(interval > 0, "UniformSchedule: interval must be positive");
  std::vector<std::int64_t> steps;
  for (std::int64_t s = interval; s <= total_steps; s += interval) steps.push_back(s);
  return steps;
}

std::vector<std::int64_t> SpacedSchedule(std::int64_t total_steps, int count) {
  Require(count > 0 && count <= total_steps,
          "SpacedSchedule: count must be in [1, total_steps]");
  std::vector<std::int64_t> steps;
  for (int i = 1; i <= count; ++i) steps.push_back(total_steps * i / count);
  return steps;
}

TeacherBank TrainTeacher(const RunConfig& cfg,
                         std::span<const std::int64_t> snapshot_steps,
                         TeacherTrace* trace) {
  Require(!snapshot_steps.empty(), "TrainTeacher: empty snapshot schedule");
  for (std::size_t i = 0; i < snapshot_steps.size(); ++i) {
    Require(snapshot_steps[i] > 0 && snapshot_steps[i] <= cfg.total_steps,
            "TrainTeacher: snapshot step outside (0, total_steps]");
    if (i > 0) {
      Require(snapshot_steps[i] > snapshot_steps[i - 1],
              "TrainTeacher: snapshot steps must be strictly increasing");
    }
  }
  Require(cfg.dataset_window <= cfg.teacher_buffer_capacity,
          "TrainTeacher: dataset_window exceeds teacher_buffer_capacity");

  LossConfig loss = cfg.Loss();
  loss.lambda_e = 0.0;
  loss.lambda_2 = 0.0;
  DdqnLoop loop(cfg, static_cast<std::size_t>(cfg.teacher_buffer_capacity), loss);
  const BlendSchedule own_data_only(0.0, 1);

  TeacherBank bank;
  bank.env_spec = loop.env_spec();
  std::size_t next_snapshot = 0;

  for (std::int64_t t = 1; t <= cfg.total_steps; ++t) {
    loop.EnvStep();
    if (loop.UpdateDue() && loop.WarmedUp()) loop.Update({}, own_data_only);
    loop.MaybeSyncTarget();

    if (next_snapshot < snapshot_steps.size() && snapshot_steps[next_snapshot] == t) {
      Snapshot snap;
      snap.index = static_cast<int>(next_snapshot);
      snap.step_saved = t;
      snap.reward_avg =
          loop.returns().Mean().value_or(bank.env_spec.return_bounds.min);
      snap.params = loop.net().online;
      snap.dataset = loop.buffer().Tail(static_cast<std::size_t>(cfg.dataset_window));
      for (auto& tr : snap.dataset) tr.origin = Origin::kTeacher;
      bank.snapshots.push_back(std::move(snap));
      ++next_snapshot;
    }
    if (trace && t % cfg.log_interval == 0) {
      trace->avg_curve.emplace_back(
          t, loop.returns().Mean().value_or(bank.env_spec.return_bounds.min));
    }
  }
  if (trace) {
    trace->updates_applied = loop.updates_applied();
    trace->episodes = loop.returns().episodes();
  }
  return bank;
}

// ---------------------------------------------------------------- storage

namespace {

std::string ParamsFile(int k) { return "params_" + std::to_string(k) + ".bin"; }
std::string DatasetFile(int k) { return "dataset_" + std::to_string(k) + ".bin"; }

nlohmann::json SpecToJson(const EnvSpec& spec) {
  return {{"env_id", EnvName(spec.env_id)},
          {"obs_dim", spec.obs_dim},
          {"action_count", spec.action_count},
          {"max_episode_steps", spec.max_episode_steps},
          {"return_bounds", {spec.return_bounds.min, spec.return_bounds.max}}};
}

template <typename T>
T Field(const nlohmann::json& j, const std::string& key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path + key, e.what());
  }
}

EnvSpec SpecFromJson(const nlohmann::json& j) {
  EnvSpec spec;
  const auto name = Field<std::string>(j, "env_id", "env_spec.");
  try {
    spec.env_id = ParseEnvId(name);
  } catch (const ContractViolation& e) {
    throw LoadError("env_spec.env_id", e.what());
  }
  spec.obs_dim = Field<int>(j, "obs_dim", "env_spec.");
  spec.action_count = Field<int>(j, "action_count", "env_spec.");
  spec.max_episode_steps = Field<int>(j, "max_episode_steps", "env_spec.");
  const auto bounds = Field<std::vector<double>>(j, "return_bounds", "env_spec.");
  if (bounds.size() != 2) throw LoadError("env_spec.return_bounds", "expected [min, max]");
  spec.return_bounds = {bounds[0], bounds[1]};
  return spec;
}

}  // namespace

void SaveBank(const TeacherBank& bank, const std::filesystem::path& dir) {
  bank.Validate();
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format_version"] = kBankFormatVersion;
  manifest["env_spec"] = SpecToJson(bank.env_spec);
  manifest["layer_sizes"] = bank.snapshots.front().params.layer_sizes;
  manifest["snapshots"] = nlohmann::json::array();
  for (const Snapshot& s : bank.snapshots) {
    const auto params_bytes = nnet::EncodeParams(s.params);
    const auto dataset_bytes = EncodeDataset(s.dataset, bank.env_spec.obs_dim);
    io::WriteFile(dir / ParamsFile(s.index), params_bytes);
    io::WriteFile(dir / DatasetFile(s.index), dataset_bytes);
    manifest["snapshots"].push_back({
        {"index", s.index},
        {"step_saved", s.step_saved},
        {"reward_avg", s.reward_avg},
        {"params_file", ParamsFile(s.index)},
        {"dataset_file", DatasetFile(s.index)},
        {"dataset_len", s.dataset.size()},
        {"params_crc32", io::Crc32(params_bytes)},
        {"dataset_crc32", io::Crc32(dataset_bytes)},
    });
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
}

TeacherBank LoadBank(const std::filesystem::path& dir,
                     std::optional<EnvId> expected_env) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw LoadError("manifest.json", "missing in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("manifest.json", e.what());
  }

  const int version = Field<int>(manifest, "format_version", "");
  if (version != kBankFormatVersion) {
    throw LoadError("format_version", "bank version " + std::to_string(version) +
                                          ", this build reads " +
                                          std::to_string(kBankFormatVersion));
  }

  TeacherBank bank;
  if (!manifest.contains("env_spec")) throw LoadError("env_spec", "missing");
  bank.env_spec = SpecFromJson(manifest["env_spec"]);
  if (expected_env && *expected_env != bank.env_spec.env_id) {
    throw LoadError("env_spec.env_id",
                    "bank was trained on " + EnvName(bank.env_spec.env_id) +
                        " but the run requests " + EnvName(*expected_env));
  }
  const EnvSpec reference = DefaultSpec(bank.env_spec.env_id);
  if (bank.env_spec.obs_dim != reference.obs_dim) {
    throw LoadError("env_spec.obs_dim", "does not match the built-in environment");
  }
  if (bank.env_spec.action_count != reference.action_count) {
    throw LoadError("env_spec.action_count", "does not match the built-in environment");
  }
  const auto layer_sizes = Field<std::vector<int>>(manifest, "layer_sizes", "");

  if (!manifest.contains("snapshots") || !manifest["snapshots"].is_array() ||
      manifest["snapshots"].empty()) {
    throw LoadError("snapshots", "missing or empty");
  }
  const auto& entries = manifest["snapshots"];
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    const std::string path = "snapshots[" + std::to_string(k) + "].";
    Snapshot s;
    s.index = Field<int>(e, "index", path);
    if (s.index != static_cast<int>(k)) throw LoadError(path + "index", "out of sequence");
    s.step_saved = Field<std::int64_t>(e, "step_saved", path);
    if (k > 0 && s.step_saved <= bank.snapshots.back().step_saved) {
      throw LoadError(path + "step_saved", "not strictly increasing");
    }
    s.reward_avg = Field<double>(e, "reward_avg", path);

    auto params_bytes = io::ReadFile(dir / Field<std::string>(e, "params_file", path));
    if (io::Crc32(params_bytes) != Field<std::uint32_t>(e, "params_crc32", path)) {
      throw LoadError(path + "params_crc32", "checksum mismatch");
    }
    try {
      s.params = nnet::DecodeParams(std::move(params_bytes));
    } catch (const LoadError& err) {
      throw LoadError(path + "params." + err.field(), err.what());
    }
    if (s.params.layer_sizes != layer_sizes) {
      throw LoadError(path + "layer_sizes", "params file disagrees with manifest");
    }

    auto dataset_bytes = io::ReadFile(dir / Field<std::string>(e, "dataset_file", path));
    const auto dataset_crc = io::Crc32(dataset_bytes);
    try {
      s.dataset = DecodeDataset(std::move(dataset_bytes), bank.env_spec.obs_dim,
                                bank.env_spec.action_count);
    } catch (const LoadError& err) {
      throw LoadError(path + "dataset." + err.field(), err.what());
    }
    if (s.dataset.size() != Field<std::size_t>(e, "dataset_len", path)) {
      throw LoadError(path + "dataset_len", "manifest length disagrees with dataset file");
    }
    if (dataset_crc != Field<std::uint32_t>(e, "dataset_crc32", path)) {
      throw LoadError(path + "dataset_crc32", "checksum mismatch");
    }
    bank.snapshots.push_back(std::move(s));
  }
  return bank;
}

// ---------------------------------------------------------------- evaluation

double EvaluatePolicy(const nnet::MlpParams& params, EnvId env_id, int episodes,
                      double eval_eps, Rng& rng) {
  Require(episodes >= 1, "EvaluatePolicy: episodes must be >= 1");
  auto env = MakeEnv(env_id);
  Require(params.input_size() == env->spec().obs_dim &&
              params.output_size() == env->spec().action_count,
          "EvaluatePolicy: network does not fit " + EnvName(env_id));
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Observation obs = env->Reset(Rng(rng()));
    for (;;) {
      const int action = ActGreedyOrRandom(params, obs, eval_eps, rng);
      StepResult r = env->Step(action);
      total += r.reward;
      if (r.terminal) break;
      obs = std::move(r.observation);
    }
  }
  return total / episodes;
}

double EvaluateSnapshot(const Snapshot& snapshot, EnvId env, int episodes,
                        double eval_eps, Rng& rng) {
  return EvaluatePolicy(snapshot.params, env, episodes, eval_eps, rng);
}

}  // namespace zpd

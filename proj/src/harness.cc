#include "zpd/harness.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "zpd/training_loop.h"

namespace zpd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string PlanLabel(const TeachingPlan& plan) {
  return plan ? plan->Label() : "no-teacher";
}

TeachingPlan ParsePlan(std::string_view text) {
  if (text == "no-teacher") return std::nullopt;
  return ParseStrategy(text);
}

void FillDerivedMetrics(RunResult& result) {
  result.final_avg100 = kNaN;
  result.average_return_overall = kNaN;
  result.steps_to_threshold.reset();
  double sum = 0.0;
  int count = 0;
  for (const CurvePoint& p : result.curve) {
    if (std::isnan(p.avg100)) continue;
    sum += p.avg100;
    ++count;
    if (!result.steps_to_threshold && p.avg100 >= result.config.success_threshold) {
      result.steps_to_threshold = p.step;
    }
  }
  if (count > 0) result.average_return_overall = sum / count;
  if (!result.curve.empty()) result.final_avg100 = result.curve.back().avg100;
}

RunResult RunStudent(const RunConfig& cfg, const TeacherBank* bank,
                     const TeachingPlan& plan) {
  cfg.Validate();
  Require(bank != nullptr || !plan, "RunStudent: a teaching strategy needs a bank");
  if (bank != nullptr) {
    bank->Validate();
    if (bank->env_spec != DefaultSpec(cfg.env_id)) {
      throw ContractViolation("RunStudent: bank was built for " +
                              EnvName(bank->env_spec.env_id) +
                              ", incompatible with a " + EnvName(cfg.env_id) + " run");
    }
  }
  const bool teacher_active = plan.has_value() && cfg.rho > 0.0;

  RunResult result;
  result.config = cfg;
  result.label = PlanLabel(plan);

  DdqnLoop loop(cfg, static_cast<std::size_t>(cfg.student_buffer_capacity), cfg.Loss());
  BlendSchedule schedule(teacher_active ? cfg.rho : 0.0, cfg.EffectiveAnnealHorizon());

  std::vector<double> rewards;
  double bank_max = 0.0;
  std::optional<SelectorState> selector;
  if (bank != nullptr) {
    rewards = bank->Rewards();
    bank_max = bank->MaxReward();
    result.bank_max_reward = bank_max;
  }
  auto record_selection = [&](std::int64_t step, std::optional<double> avg) {
    result.selections.push_back({step, avg, selector->matched_index,
                                 selector->zpd_index, rewards[selector->zpd_index],
                                 schedule.triggered()});
  };
  if (teacher_active) {
    selector = InitSelector(*plan, rewards, std::nullopt,
                            MakeStream(cfg.seed, kStreamSelect));
    record_selection(0, std::nullopt);
  }

  double last_loss = kNaN;
  for (std::int64_t t = 1; t <= cfg.total_steps; ++t) {
    loop.EnvStep();
    const std::optional<double> avg = loop.returns().Mean();

    if (loop.UpdateDue()) {
      ++result.updates_attempted;
      if (loop.WarmedUp()) {
        std::span<const Transition> teacher_data;
        if (teacher_active) teacher_data = bank->snapshots[selector->zpd_index].dataset;
        last_loss = loop.Update(teacher_data, schedule);
        if (teacher_active && ShouldRetrigger(*selector, rewards, avg)) {
          FSelect(*selector, rewards, avg);
          record_selection(t, avg);
        }
      }
    }
    if (teacher_active && avg && !schedule.triggered() &&
        schedule.MaybeTriggerAnneal(*avg, bank_max, t)) {
      result.anneal_trigger_step = t;
    }
    loop.MaybeSyncTarget();

    if (t % cfg.log_interval == 0 || t == cfg.total_steps) {
      CurvePoint p;
      p.step = t;
      p.episodes = loop.returns().episodes();
      p.avg100 = avg.value_or(kNaN);
      p.matched_index = teacher_active ? selector->matched_index : -1;
      p.zpd_index = teacher_active ? selector->zpd_index : -1;
      p.effective_rho = schedule.EffectiveRho(t);
      p.loss = last_loss;
      result.curve.push_back(p);
    }
  }

  result.env_steps = loop.step();
  result.updates_applied = loop.updates_applied();
  result.episodes = loop.returns().episodes();
  FillDerivedMetrics(result);
  return result;
}

// ---------------------------------------------------------------- files

void WriteCurveCsv(const std::vector<CurvePoint>& curve, std::ostream& out) {
  out << "step,episodes,avg100,matched_index,zpd_index,effective_rho,loss\n";
  for (const CurvePoint& p : curve) {
    out << p.step << ',' << p.episodes << ',' << FormatDouble(p.avg100) << ','
        << p.matched_index << ',' << p.zpd_index << ','
        << FormatDouble(p.effective_rho) << ',' << FormatDouble(p.loss) << '\n';
  }
}

std::vector<CurvePoint> ReadCurveCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.filename().string(), "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "step,episodes,avg100,matched_index,zpd_index,effective_rho,loss") {
    throw LoadError("header", "unexpected curve CSV header in " + path.string());
  }
  std::vector<CurvePoint> curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 7) throw LoadError("row", "expected 7 columns: " + line);
    try {
      CurvePoint p;
      p.step = std::stoll(cells[0]);
      p.episodes = std::stoll(cells[1]);
      p.avg100 = std::strtod(cells[2].c_str(), nullptr);
      p.matched_index = std::stoi(cells[3]);
      p.zpd_index = std::stoi(cells[4]);
      p.effective_rho = std::strtod(cells[5].c_str(), nullptr);
      p.loss = std::strtod(cells[6].c_str(), nullptr);
      curve.push_back(p);
    } catch (const std::logic_error&) {
      throw LoadError("row", "unparsable curve row: " + line);
    }
  }
  return curve;
}

std::string CurveFileName(const std::string& label, std::uint64_t seed) {
  return "curve_" + label + "_" + std::to_string(seed) + ".csv";
}

std::string RunFileName(const std::string& label, std::uint64_t seed) {
  return "run_" + label + "_" + std::to_string(seed) + ".json";
}

nlohmann::json RunSummaryJson(const RunResult& r) {
  auto opt = [](const auto& v) -> nlohmann::json {
    if (v) return *v;
    return nullptr;
  };
  auto finite_or_null = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  return {
      {"env_id", EnvName(r.config.env_id)},
      {"strategy", r.label},
      {"seed", r.config.seed},
      {"config", ToJson(r.config)},
      {"curve_file", CurveFileName(r.label, r.config.seed)},
      {"final_avg100", finite_or_null(r.final_avg100)},
      {"average_return_overall", finite_or_null(r.average_return_overall)},
      {"steps_to_threshold", opt(r.steps_to_threshold)},
      {"env_steps", r.env_steps},
      {"updates_attempted", r.updates_attempted},
      {"updates_applied", r.updates_applied},
      {"episodes", r.episodes},
      {"bank_max_reward", opt(r.bank_max_reward)},
      {"anneal_trigger_step", opt(r.anneal_trigger_step)},
      {"selection_events", r.selections.size()},
  };
}

void WriteRunFiles(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / CurveFileName(result.label, result.config.seed),
                      std::ios::trunc);
    WriteCurveCsv(result.curve, csv);
    if (!csv) throw std::runtime_error("cannot write curve CSV in " + dir.string());
  }
  std::ofstream json(dir / RunFileName(result.label, result.config.seed),
                     std::ios::trunc);
  json << RunSummaryJson(result).dump(2) << "\n";
  if (!json) throw std::runtime_error("cannot write run JSON in " + dir.string());
}

// ---------------------------------------------------------------- suite

SuiteOutcome RunSuite(const RunConfig& base, const TeacherBank* bank,
                      const std::vector<TeachingPlan>& plans,
                      const std::vector<std::uint64_t>& seeds,
                      const std::filesystem::path& out_dir, int threads) {
  Require(!plans.empty(), "RunSuite: need at least one strategy");
  Require(!seeds.empty(), "RunSuite: need at least one seed");
  std::filesystem::create_directories(out_dir);

  struct Job {
    TeachingPlan plan;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& plan : plans) {
    for (std::uint64_t seed : seeds) jobs.push_back({plan, seed});
  }
  std::vector<std::optional<RunResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      RunConfig cfg = base;
      cfg.seed = jobs[i].seed;
      try {
        RunResult r = RunStudent(cfg, bank, jobs[i].plan);
        WriteRunFiles(r, out_dir);
        results[i] = std::move(r);
      } catch (const std::exception& e) {
        errors[i] = PlanLabel(jobs[i].plan) + " seed " +
                    std::to_string(jobs[i].seed) + ": " + e.what();
      }
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SuiteOutcome outcome;
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string label = PlanLabel(jobs[i].plan);
    nlohmann::json entry = {{"strategy", label}, {"seed", jobs[i].seed}};
    if (results[i]) {
      entry["status"] = "ok";
      entry["run_file"] = RunFileName(label, jobs[i].seed);
      outcome.results.push_back(std::move(*results[i]));
    } else {
      entry["status"] = "failed";
      entry["error"] = errors[i];
      outcome.failures.push_back(errors[i]);
    }
    index.push_back(entry);
  }
  std::ofstream suite(out_dir / "suite.json", std::ios::trunc);
  suite << nlohmann::json{{"env_id", EnvName(base.env_id)}, {"runs", index}}.dump(2)
        << "\n";
  return outcome;
}

}  // namespace zpd

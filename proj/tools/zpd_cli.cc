// Command-line front end: teacher training, student runs, suites, reporting,
// plotting and a gradient self-check.

#include <charconv>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zpd/agent.h"
#include "zpd/harness.h"
#include "zpd/report.h"
#include "zpd/teacherbank.h"

namespace {

using namespace zpd;

template <typename T>
std::vector<T> SplitCsv(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
    } else {
      T value{};
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw CLI::ValidationError("bad list element '" + item + "'");
      }
      out.push_back(value);
    }
  }
  return out;
}

// Components smaller than this are compared absolutely: the central
// difference itself carries roundoff of order eps * |J| / h ~ 1e-11.
constexpr double kRelativeFloor = 1e-3;

// Central-difference check of StudentLoss gradients on random instances.
int GradCheck(int instances, std::uint64_t seed) {
  Rng rng = MakeStream(seed, 99);
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const int obs = 3 + UniformInt(rng, 6);
    const int actions = 2 + UniformInt(rng, 3);
    std::vector<int> sizes = {obs, 4 + UniformInt(rng, 6), 4 + UniformInt(rng, 6), actions};
    QNetwork net = MakeQNetwork(sizes, 1e-3, 1, rng);
    net.target = nnet::InitMlp(sizes, rng);
    for (auto& layer : net.online.layers) {
      for (double& b : layer.biases) b = 0.2 * (Uniform01(rng) - 0.5);
    }
    Minibatch batch;
    const int batch_size = 4 + UniformInt(rng, 8);
    for (int i = 0; i < batch_size; ++i) {
      Transition t;
      for (int d = 0; d < obs; ++d) t.state.push_back(Uniform01(rng) * 2 - 1);
      for (int d = 0; d < obs; ++d) t.next_state.push_back(Uniform01(rng) * 2 - 1);
      t.action = UniformInt(rng, actions);
      t.reward = Uniform01(rng) * 2 - 1;
      t.terminal = Uniform01(rng) < 0.2;
      t.origin = Uniform01(rng) < 0.5 ? Origin::kTeacher : Origin::kStudent;
      batch.teacher_count += t.origin == Origin::kTeacher;
      batch.transitions.push_back(std::move(t));
    }
    const LossConfig cfg{0.9, 0.5, 1e-3, 0.8};
    const nnet::LossGradient analytic = StudentLoss(net, batch, cfg);
    const double h = 1e-5;
    for (std::size_t l = 0; l < net.online.layers.size(); ++l) {
      for (int which = 0; which < 2; ++which) {
        auto& values = which == 0 ? net.online.layers[l].weights : net.online.layers[l].biases;
        const auto& grads =
            which == 0 ? analytic.gradients.layers[l].weights : analytic.gradients.layers[l].biases;
        for (std::size_t k = 0; k < values.size(); ++k) {
          const double saved = values[k];
          values[k] = saved + h;
          const double up = StudentLoss(net, batch, cfg).loss;
          values[k] = saved - h;
          const double down = StudentLoss(net, batch, cfg).loss;
          values[k] = saved;
          const double numeric = (up - down) / (2 * h);
          const double scale = std::max({std::abs(numeric), std::abs(grads[k]), kRelativeFloor});
          worst = std::max(worst, std::abs(numeric - grads[k]) / scale);
        }
      }
    }
  }
  std::cout << "gradcheck: " << instances << " instances, max relative error " << worst
            << (worst <= 1e-6 ? " (ok)" : " (FAILED, limit 1e-6)") << "\n";
  return worst <= 1e-6 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-snapshot curriculum for DDQN students"};
  app.require_subcommand(1);

  // train-teacher
  auto* teacher = app.add_subcommand("train-teacher", "train a DDQN teacher and save a snapshot bank");
  std::string t_env = "catch", t_out, t_schedule;
  std::int64_t t_steps = 150000, t_window = 5000;
  int t_count = 10;
  std::uint64_t t_seed = 0;
  teacher->add_option("--env", t_env, "catch | gridgoal");
  teacher->add_option("--steps", t_steps, "environment steps");
  teacher->add_option("--snapshot-steps", t_schedule,
                      "comma-separated snapshot steps (overrides --snapshots)");
  teacher->add_option("--snapshots", t_count, "number of evenly spaced snapshots");
  teacher->add_option("--dataset-window", t_window, "transitions kept per snapshot");
  teacher->add_option("--seed", t_seed);
  teacher->add_option("--out", t_out, "bank directory")->required();

  // train-student
  auto* student = app.add_subcommand("train-student", "train one student against a bank");
  std::string s_bank, s_strategy = "k-ahead:5", s_out;
  double s_rho = 0.5;
  std::int64_t s_steps = 150000;
  int s_u = 2;
  std::optional<double> s_lambda_e;
  std::uint64_t s_seed = 0;
  student->add_option("--bank", s_bank)->required();
  student->add_option("--strategy", s_strategy,
                      "best-ahead | random-ahead | k-ahead:<k> | no-teacher");
  student->add_option("--rho", s_rho, "teacher sample probability");
  student->add_option("--steps", s_steps);
  student->add_option("--steps-per-update", s_u);
  student->add_option("--lambda-e", s_lambda_e, "large-margin loss weight");
  student->add_option("--seed", s_seed);
  student->add_option("--out", s_out)->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "evaluate saved parameters");
  std::string e_params, e_env = "catch";
  int e_episodes = 100;
  double e_eps = 0.01;
  std::uint64_t e_seed = 0;
  evaluate->add_option("--params", e_params)->required();
  evaluate->add_option("--env", e_env);
  evaluate->add_option("--episodes", e_episodes);
  evaluate->add_option("--eval-eps", e_eps);
  evaluate->add_option("--seed", e_seed);

  // suite
  auto* suite = app.add_subcommand("suite", "run strategies x seeds against one bank");
  std::string su_bank, su_strategies =
      "best-ahead,random-ahead,k-ahead:0,k-ahead:2,k-ahead:5,k-ahead:10";
  std::string su_seeds = "0,1", su_out;
  std::int64_t su_steps = 150000;
  int su_u = 2, su_threads = 1;
  suite->add_option("--bank", su_bank)->required();
  suite->add_option("--strategies", su_strategies);
  suite->add_option("--seeds", su_seeds);
  suite->add_option("--steps", su_steps);
  suite->add_option("--steps-per-update", su_u);
  suite->add_option("--threads", su_threads);
  suite->add_option("--out", su_out)->required();

  auto* report = app.add_subcommand("report", "wins table and summary CSV for a run directory");
  std::string r_runs;
  report->add_option("--runs", r_runs)->required();

  auto* plot = app.add_subcommand("plot", "SVG learning curves for a run directory");
  std::string p_runs;
  plot->add_option("--runs", p_runs)->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the loss gradients");
  int g_instances = 10;
  std::uint64_t g_seed = 0;
  gradcheck->add_option("--instances", g_instances);
  gradcheck->add_option("--seed", g_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*teacher) {
      RunConfig cfg = DefaultTeacherConfig(ParseEnvId(t_env));
      cfg.total_steps = t_steps;
      cfg.dataset_window = t_window;
      cfg.seed = t_seed;
      const auto schedule = t_schedule.empty()
                                ? SpacedSchedule(t_steps, t_count)
                                : SplitCsv<std::int64_t>(t_schedule);
      const auto start = std::chrono::steady_clock::now();
      TeacherTrace trace;
      const TeacherBank bank = TrainTeacher(cfg, schedule, &trace);
      SaveBank(bank, t_out);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << "saved " << bank.size() << " snapshots to " << t_out << " in " << secs
                << " s\n";
      for (const auto& s : bank.snapshots) {
        std::cout << "  T" << s.index << " step " << s.step_saved << " reward_avg "
                  << s.reward_avg << " dataset " << s.dataset.size() << "\n";
      }
    } else if (*student) {
      const TeachingPlan plan = ParsePlan(s_strategy);
      TeacherBank bank = LoadBank(s_bank);
      RunConfig cfg = DefaultStudentConfig(bank.env_spec.env_id);
      cfg.total_steps = s_steps;
      cfg.steps_per_update = s_u;
      cfg.rho = s_rho;
      if (s_lambda_e) cfg.lambda_e = *s_lambda_e;
      cfg.seed = s_seed;
      const RunResult r = RunStudent(cfg, &bank, plan);
      WriteRunFiles(r, s_out);
      std::cout << r.label << " seed " << s_seed << ": final avg100 " << r.final_avg100
                << ", updates " << r.updates_applied << "\n";
    } else if (*evaluate) {
      const auto params = nnet::LoadParams(e_params);
      Rng rng = MakeStream(e_seed, 0);
      const double mean = EvaluatePolicy(params, ParseEnvId(e_env), e_episodes, e_eps, rng);
      std::cout << "mean return over " << e_episodes << " episodes: " << mean << "\n";
    } else if (*suite) {
      TeacherBank bank = LoadBank(su_bank);
      RunConfig cfg = DefaultStudentConfig(bank.env_spec.env_id);
      cfg.total_steps = su_steps;
      cfg.steps_per_update = su_u;
      std::vector<TeachingPlan> plans;
      for (const auto& s : SplitCsv<std::string>(su_strategies)) plans.push_back(ParsePlan(s));
      const auto seeds = SplitCsv<std::uint64_t>(su_seeds);
      const SuiteOutcome outcome = RunSuite(cfg, &bank, plans, seeds, su_out, su_threads);
      std::cout << outcome.results.size() << " runs completed, " << outcome.failures.size()
                << " failed\n";
      for (const auto& f : outcome.failures) std::cerr << "  failed: " << f << "\n";
      if (!outcome.failures.empty()) return 1;
    } else if (*report) {
      const auto runs = LoadRuns(r_runs);
      if (runs.empty()) {
        std::cerr << "no run_<strategy>_<seed>.json files in " << r_runs << "\n";
        return 1;
      }
      WriteReport(BuildReport(runs), r_runs, std::cout);
    } else if (*plot) {
      for (const auto& path : EmitPlots(p_runs)) std::cout << "wrote " << path.string() << "\n";
    } else if (*gradcheck) {
      return GradCheck(g_instances, g_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

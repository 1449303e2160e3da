// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Long-running training criteria write
// their runs, report and plots under ./acceptance_out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/scalar_oracle.h"
#include "zpd/agent.h"
#include "zpd/binary_io.h"
#include "zpd/harness.h"
#include "zpd/report.h"
#include "zpd/selector.h"
#include "zpd/teacherbank.h"

namespace {

using namespace zpd;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- tolerances

constexpr int kGradInstances = 12;
constexpr double kGradStep = 1e-5;
constexpr double kGradMaxRelError = 1e-6;
// Below this magnitude a gradient component is compared absolutely; the
// central difference alone carries roundoff near eps * |J| / h ~ 1e-11.
constexpr double kGradRelativeFloor = 1e-3;
constexpr double kGradMaxSeconds = 10.0;

constexpr int kLossTransitions = 100;
constexpr double kLossTolerance = 1e-12;

constexpr int kSelectorBanks = 10000;
constexpr int kUniformDraws = 10000;
constexpr double kUniformTolerance = 0.02;

constexpr int kBlendBatches = 10000;
constexpr int kBlendBatchSize = 32;
constexpr double kBlendLow = 0.49;
constexpr double kBlendHigh = 0.51;

constexpr std::int64_t kShortRunSteps = 20000;

constexpr std::int64_t kTrainSteps = 150000;
constexpr double kCatchThreshold = 8.0;
constexpr int kTeacherSeedsRequired = 2;
constexpr double kTeacherMaxSeconds = 600.0;

constexpr double kSampleEfficiencyRatio = 0.75;
const std::vector<std::uint64_t> kSeeds = {0, 1, 2};

constexpr int kProbeStates = 100;

// ---------------------------------------------------------------- helpers

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string CurveText(const RunResult& r) {
  std::ostringstream out;
  WriteCurveCsv(r.curve, out);
  return out.str();
}

struct RandomCase {
  QNetwork net;
  std::vector<Transition> transitions;
};

RandomCase MakeCase(Rng& rng, int batch_size) {
  const int obs = 3 + UniformInt(rng, 6);
  const int actions = 2 + UniformInt(rng, 3);
  const std::vector<int> sizes = {obs, 4 + UniformInt(rng, 6), 4 + UniformInt(rng, 6), actions};
  RandomCase c;
  c.net = MakeQNetwork(sizes, 1e-3, 1, rng);
  c.net.target = nnet::InitMlp(sizes, rng);
  for (auto& layer : c.net.online.layers) {
    for (double& b : layer.biases) b = 0.2 * (Uniform01(rng) - 0.5);
  }
  for (int i = 0; i < batch_size; ++i) {
    Transition t;
    for (int d = 0; d < obs; ++d) t.state.push_back(2 * Uniform01(rng) - 1);
    for (int d = 0; d < obs; ++d) t.next_state.push_back(2 * Uniform01(rng) - 1);
    t.action = UniformInt(rng, actions);
    t.reward = 2 * Uniform01(rng) - 1;
    t.terminal = Uniform01(rng) < 0.2;
    t.origin = Uniform01(rng) < 0.5 ? Origin::kTeacher : Origin::kStudent;
    c.transitions.push_back(std::move(t));
  }
  return c;
}

Minibatch ToBatch(const std::vector<Transition>& ts) {
  Minibatch b;
  b.transitions = ts;
  for (const auto& t : ts) b.teacher_count += t.origin == Origin::kTeacher;
  return b;
}

// ---------------------------------------------------------------- 1

Outcome GradientCorrectness() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = MakeStream(101, 0);
  const LossConfig cfg{0.9, 0.5, 1e-3, 0.8};
  double worst = 0.0;
  std::size_t components = 0;
  for (int i = 0; i < kGradInstances; ++i) {
    const RandomCase c = MakeCase(rng, 4 + UniformInt(rng, 12));
    const auto analytic =
        oracle::Flatten(StudentLoss(c.net, ToBatch(c.transitions), cfg).gradients);
    const auto numeric = oracle::NumericGradient(c.net.online, c.net.target, c.transitions,
                                                 cfg.gamma, cfg.lambda_e, cfg.lambda_2,
                                                 cfg.margin, kGradStep);
    if (numeric.size() != analytic.size()) return {false, "gradient shape mismatch"};
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      const double scale =
          std::max({std::abs(numeric[k]), std::abs(analytic[k]), kGradRelativeFloor});
      worst = std::max(worst, std::abs(numeric[k] - analytic[k]) / scale);
    }
    components += numeric.size();
  }
  const double secs = Seconds(start);
  const bool pass = worst <= kGradMaxRelError && secs < kGradMaxSeconds;
  return {pass, std::to_string(kGradInstances) + " instances, " + std::to_string(components) +
                    " components, max rel err " + Fmt("%.3g", worst) + " (limit " +
                    Fmt("%.0e", kGradMaxRelError) + "), " + Fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------------- 2

nnet::MlpParams RowsNet(const std::vector<std::vector<double>>& rows) {
  const int in = static_cast<int>(rows.size());
  const int out = static_cast<int>(rows[0].size());
  nnet::MlpParams p = nnet::ZeroMlp({in, out});
  for (int i = 0; i < in; ++i) {
    for (int j = 0; j < out; ++j) p.layers[0].weights[i * out + j] = rows[i][j];
  }
  return p;
}

Transition ToyTransition(int action, double reward, Origin origin) {
  Transition t;
  t.state = {1.0, 0.0};
  t.next_state = {0.0, 1.0};
  t.action = action;
  t.reward = reward;
  t.origin = origin;
  return t;
}

Outcome LossOracles() {
  double worst = 0.0;
  Rng rng = MakeStream(102, 0);
  for (int i = 0; i < kLossTransitions; ++i) {
    const RandomCase c = MakeCase(rng, 1);
    const Transition& t = c.transitions[0];
    worst = std::max(worst, std::abs(TdLoss(c.net, t, 0.99) -
                                     oracle::TdLoss(c.net.online, c.net.target, t, 0.99)));
    worst = std::max(worst, std::abs(MarginLoss(c.net, t, 0.8) -
                                     oracle::MarginLoss(c.net.online, t, 0.8)));
    const double js = StudentLoss(c.net, ToBatch(c.transitions), {0.99, 0.1, 1e-5, 0.8}).loss;
    worst = std::max(worst, std::abs(js - oracle::StudentLoss(c.net.online, c.net.target,
                                                              c.transitions, 0.99, 0.1, 1e-5,
                                                              0.8)));
  }

  auto make_net = [](const nnet::MlpParams& online, const nnet::MlpParams& target) {
    QNetwork n;
    n.online = online;
    n.target = target;
    n.adam = nnet::InitAdam(online, 1e-3);
    return n;
  };
  const auto zero_target = RowsNet({{0, 0}, {0, 0}});
  const QNetwork toy = make_net(RowsNet({{2.0, 1.5}, {1.0, 3.0}}), RowsNet({{0, 0}, {0, 5.0}}));
  const double td_toy = TdLoss(toy, ToyTransition(0, 1.0, Origin::kTeacher), 0.5);
  const double m0 = MarginLoss(make_net(RowsNet({{2.0, 0.1}, {0, 0}}), zero_target),
                               ToyTransition(0, 0, Origin::kTeacher), 0.8);
  const double m1 = MarginLoss(make_net(RowsNet({{1.0, 0.5}, {0, 0}}), zero_target),
                               ToyTransition(0, 0, Origin::kTeacher), 0.8);
  const double m2 = MarginLoss(make_net(RowsNet({{0.0, 0.0}, {0, 0}}), zero_target),
                               ToyTransition(1, 0, Origin::kTeacher), 0.8);
  Minibatch one;
  one.transitions = {ToyTransition(0, 1.0, Origin::kTeacher)};
  one.teacher_count = 1;
  const double js_toy = StudentLoss(toy, one, {0.5, 0.1, 1e-5, 0.8}).loss;
  const double js_expected = 2.25 + 0.1 * 0.3 + 1e-5 * (4.0 + 2.25 + 1.0 + 9.0);

  const bool toys_ok = std::abs(td_toy - 2.25) <= kLossTolerance &&
                       std::abs(m0 - 0.0) <= kLossTolerance &&
                       std::abs(m1 - 0.3) <= kLossTolerance &&
                       std::abs(m2 - 0.8) <= kLossTolerance &&
                       std::abs(js_toy - js_expected) <= kLossTolerance;
  return {worst <= kLossTolerance && toys_ok,
          std::to_string(kLossTransitions) + " random transitions, max |diff| " +
              Fmt("%.3g", worst) + "; toys td " + Fmt("%.15g", td_toy) + ", margins " +
              Fmt("%.15g", m0) + "/" + Fmt("%.15g", m1) + "/" + Fmt("%.15g", m2) +
              ", J_S " + Fmt("%.15g", js_toy)};
}

// ---------------------------------------------------------------- 3

int NearestOracle(const std::vector<double>& rewards, double avg) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(rewards.size()); ++i) {
    if (std::abs(rewards[i] - avg) < std::abs(rewards[best] - avg)) best = i;
  }
  return best;
}

Outcome SelectorProperties() {
  Rng rng = MakeStream(103, 0);
  int violations = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };
  for (int bank = 0; bank < kSelectorBanks; ++bank) {
    const int n = 1 + UniformInt(rng, 30);
    std::vector<double> rewards(n);
    // Half the banks use a coarse grid so ties and exact hits are common.
    const bool coarse = bank % 2 == 0;
    for (double& r : rewards) r = coarse ? UniformInt(rng, 11) - 5 : 20 * Uniform01(rng) - 10;
    const int k = UniformInt(rng, 12);
    SelectorState kah = InitSelector(Strategy::KAhead(k), rewards, std::nullopt, MakeStream(bank, 1));
    SelectorState best = InitSelector(Strategy::BestAhead(), rewards, std::nullopt, MakeStream(bank, 2));
    SelectorState rnd = InitSelector(Strategy::RandomAhead(), rewards, std::nullopt, MakeStream(bank, 3));
    const int argmax = static_cast<int>(std::max_element(rewards.begin(), rewards.end()) -
                                        rewards.begin());
    int expected_match = 0;
    int previous_zpd = kah.zpd_index;
    double avg = coarse ? UniformInt(rng, 11) - 5 : 20 * Uniform01(rng) - 10;
    for (int step = 0; step < 20; ++step) {
      avg += coarse ? UniformInt(rng, 3) - 1 : 2 * Uniform01(rng) - 0.8;
      expected_match = std::max(expected_match, NearestOracle(rewards, avg));
      FSelect(kah, rewards, avg);
      FSelect(best, rewards, avg);
      FSelect(rnd, rewards, avg);
      if (kah.matched_index != expected_match) fail("match differs from brute force");
      if (kah.zpd_index != std::min(kah.matched_index + k, n - 1)) fail("k-ahead formula");
      if (kah.zpd_index < previous_zpd) fail("k-ahead decreased");
      previous_zpd = kah.zpd_index;
      if (best.zpd_index != argmax) fail("best-ahead moved off argmax");
      const bool any_better = std::any_of(rewards.begin(), rewards.end(),
                                          [&](double r) { return r > avg; });
      if (any_better ? !(rewards[rnd.zpd_index] > avg) : rnd.zpd_index != n - 1) {
        fail("random-ahead picked a snapshot not above the student");
      }
      const bool retrigger = ShouldRetrigger(kah, rewards, avg);
      if (retrigger != (avg > rewards[kah.matched_index])) fail("retrigger rule");
    }
    // Exact equality never retriggers; the next double up does.
    const double matched_reward = rewards[kah.matched_index];
    if (ShouldRetrigger(kah, rewards, matched_reward)) fail("retrigger on equality");
    if (!ShouldRetrigger(kah, rewards, std::nextafter(matched_reward, INFINITY))) {
      fail("no retrigger just above the matched reward");
    }
  }

  // Uniformity of random-ahead over the candidate set.
  double worst_dev = 0.0;
  Rng urng = MakeStream(104, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const int n = 4 + 3 * trial;
    std::vector<double> rewards(n);
    for (int i = 0; i < n; ++i) rewards[i] = i + 1;
    const double avg = trial == 0 ? 2.5 : 1.5;
    std::vector<int> candidates;
    for (int i = 0; i < n; ++i) {
      if (rewards[i] > avg) candidates.push_back(i);
    }
    SelectorState s = InitSelector(Strategy::RandomAhead(), rewards, avg, Rng(urng()));
    std::vector<int> counts(n, 0);
    for (int d = 0; d < kUniformDraws; ++d) {
      FSelect(s, rewards, avg);
      ++counts[s.zpd_index];
    }
    for (int i = 0; i < n; ++i) {
      const bool is_candidate =
          std::find(candidates.begin(), candidates.end(), i) != candidates.end();
      const double expected = is_candidate ? 1.0 / candidates.size() : 0.0;
      worst_dev = std::max(worst_dev, std::abs(counts[i] / double(kUniformDraws) - expected));
    }
  }
  const bool pass = violations == 0 && worst_dev <= kUniformTolerance;
  return {pass, std::to_string(kSelectorBanks) + " banks, " + std::to_string(violations) +
                    " violations" + (first.empty() ? "" : " (first: " + first + ")") +
                    "; random-ahead max frequency deviation " + Fmt("%.4f", worst_dev) +
                    " (limit " + Fmt("%.2f", kUniformTolerance) + ")"};
}

// ---------------------------------------------------------------- 4

Outcome BlendStatistics() {
  std::vector<Transition> teacher(50);
  ReplayBuffer student(64, 1);
  for (int i = 0; i < 50; ++i) {
    teacher[i] = {{1.0}, 0, 1.0, {1.0}, false, Origin::kTeacher};
    student.Push({{0.0}, 0, 0.0, {0.0}, false, Origin::kStudent});
  }
  Rng rng = MakeStream(105, 0);
  auto fraction = [&](double rho) {
    const BlendSchedule s(rho, 1000);
    long teacher_slots = 0;
    for (int b = 0; b < kBlendBatches; ++b) {
      teacher_slots += Blend(teacher, student, s, 1, kBlendBatchSize, rng).teacher_count;
    }
    return teacher_slots / double(kBlendBatches * kBlendBatchSize);
  };
  const double half = fraction(0.5);
  const double zero = fraction(0.0);
  const double one = fraction(1.0);

  BlendSchedule s(0.5, 1000);
  s.MaybeTriggerAnneal(10.0, 9.0, 5000);
  bool monotone = true;
  bool linear = true;
  double previous = s.EffectiveRho(0);
  for (std::int64_t t = 0; t <= 8000; ++t) {
    const double r = s.EffectiveRho(t);
    monotone = monotone && r <= previous;
    previous = r;
    if (t >= 5000) {
      const double expected = 0.5 * std::max(0.0, 1.0 - (t - 5000) / 1000.0);
      linear = linear && std::abs(r - expected) <= 1e-15;
    }
  }
  const bool endpoints = s.EffectiveRho(5000) == 0.5 && s.EffectiveRho(5500) == 0.25 &&
                         s.EffectiveRho(6000) == 0.0;
  const bool pass = half >= kBlendLow && half <= kBlendHigh && zero == 0.0 && one == 1.0 &&
                    monotone && linear && endpoints;
  return {pass, "rho 0.5 teacher fraction " + Fmt("%.5f", half) + ", rho 0 -> " +
                    Fmt("%g", zero) + ", rho 1 -> " + Fmt("%g", one) +
                    (monotone && linear && endpoints ? ", anneal linear with exact endpoints"
                                                     : ", anneal schedule wrong")};
}

// ---------------------------------------------------------------- 5 / 10

RunConfig ShortStudentConfig(std::uint64_t seed) {
  RunConfig cfg = DefaultStudentConfig(EnvId::kCatch);
  cfg.total_steps = kShortRunSteps;
  cfg.seed = seed;
  return cfg;
}

Outcome ReductionIdentity(const TeacherBank& bank) {
  RunConfig cfg = ShortStudentConfig(7);
  const std::string baseline = CurveText(RunStudent(cfg, nullptr, std::nullopt));
  cfg.rho = 0.0;
  int identical = 0;
  const std::vector<Strategy> strategies = {Strategy::KAhead(5), Strategy::RandomAhead()};
  for (const Strategy& s : strategies) identical += CurveText(RunStudent(cfg, &bank, s)) == baseline;
  return {identical == static_cast<int>(strategies.size()),
          std::to_string(identical) + "/" + std::to_string(strategies.size()) +
              " rho=0 runs byte-identical to the no-teacher curve (" +
              std::to_string(kShortRunSteps) + " steps)"};
}

std::vector<std::uint8_t> FileBytes(const fs::path& p) { return io::ReadFile(p); }

Outcome Determinism(const TeacherBank& bank, const fs::path& out) {
  const RunConfig cfg = ShortStudentConfig(11);
  const fs::path a = out / "determinism_a", b = out / "determinism_b";
  fs::remove_all(a);
  fs::remove_all(b);
  int identical = 0, total = 0;
  for (const TeachingPlan& plan : {TeachingPlan(Strategy::RandomAhead()),
                                   TeachingPlan(Strategy::KAhead(5)), TeachingPlan()}) {
    WriteRunFiles(RunStudent(cfg, &bank, plan), a);
    WriteRunFiles(RunStudent(cfg, plan ? &bank : nullptr, plan), b);
    const std::string name = CurveFileName(PlanLabel(plan), cfg.seed);
    identical += FileBytes(a / name) == FileBytes(b / name);
    ++total;
  }
  // A short teacher run repeated must also save byte-identical banks.
  RunConfig tcfg = DefaultTeacherConfig(EnvId::kCatch);
  tcfg.total_steps = 6000;
  tcfg.seed = 11;
  SaveBank(TrainTeacher(tcfg, UniformSchedule(6000, 2000)), a / "bank");
  SaveBank(TrainTeacher(tcfg, UniformSchedule(6000, 2000)), b / "bank");
  for (const auto& entry : fs::directory_iterator(a / "bank")) {
    identical += FileBytes(entry.path()) == FileBytes(b / "bank" / entry.path().filename());
    ++total;
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                  " repeated outputs byte-identical (curve CSVs and bank files)"};
}

// ---------------------------------------------------------------- 6

struct TeacherRun {
  std::uint64_t seed;
  TeacherBank bank;
  double best_avg100;
  std::optional<std::int64_t> reached_at;
  double seconds;
};

Outcome TeacherLearnability(std::vector<TeacherRun>& runs) {
  int reached = 0;
  bool fast = true;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    RunConfig cfg = DefaultTeacherConfig(EnvId::kCatch);
    cfg.total_steps = kTrainSteps;
    cfg.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    TeacherTrace trace;
    TeacherBank bank = TrainTeacher(cfg, SpacedSchedule(kTrainSteps, 10), &trace);
    const double secs = Seconds(start);
    double best = -std::numeric_limits<double>::infinity();
    std::optional<std::int64_t> at;
    for (const auto& [step, avg] : trace.avg_curve) {
      best = std::max(best, avg);
      if (!at && avg >= kCatchThreshold) at = step;
    }
    reached += at.has_value();
    fast = fast && secs < kTeacherMaxSeconds;
    detail += "seed " + std::to_string(seed) + ": best avg100 " + Fmt("%.2f", best) +
              (at ? " (>= 8 at step " + std::to_string(*at) + ")" : " (never >= 8)") + ", " +
              Fmt("%.0f", secs) + " s; ";
    runs.push_back({seed, std::move(bank), best, at, secs});
  }
  detail += std::to_string(reached) + "/" + std::to_string(kSeeds.size()) + " seeds reached 8.0";
  return {reached >= kTeacherSeedsRequired && fast, detail};
}

// ---------------------------------------------------------------- 7 / 8

std::map<std::string, std::vector<RunResult>> ByLabel(const SuiteOutcome& o) {
  std::map<std::string, std::vector<RunResult>> m;
  for (const auto& r : o.results) m[r.label].push_back(r);
  return m;
}

double MedianStepsToThreshold(const std::vector<RunResult>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) {
    v.push_back(r.steps_to_threshold ? static_cast<double>(*r.steps_to_threshold)
                                     : std::numeric_limits<double>::infinity());
  }
  return Median(v);
}

std::vector<double> FinalAvgs(const std::vector<RunResult>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.final_avg100);
  return v;
}

Outcome SampleEfficiency(const std::map<std::string, std::vector<RunResult>>& runs) {
  const double teacher_median = MedianStepsToThreshold(runs.at("5-ahead"));
  const double baseline_median = MedianStepsToThreshold(runs.at("no-teacher"));
  const bool faster = teacher_median <= kSampleEfficiencyRatio * baseline_median;

  const double best_final = Mean(FinalAvgs(runs.at("best-ahead")));
  std::string matched_by;
  std::string finals = "final avg100 seed means: best-ahead " + Fmt("%.3f", best_final);
  for (const char* label : {"5-ahead", "10-ahead", "random-ahead"}) {
    const double v = Mean(FinalAvgs(runs.at(label)));
    finals += std::string(", ") + label + " " + Fmt("%.3f", v);
    if (v >= best_final && matched_by.empty()) matched_by = label;
  }
  std::string detail = "median steps to avg100>=8: 5-ahead " + Fmt("%.0f", teacher_median) +
                       ", no-teacher " + Fmt("%.0f", baseline_median) + " (ratio " +
                       Fmt("%.3f", teacher_median / baseline_median) + ", limit " +
                       Fmt("%.2f", kSampleEfficiencyRatio) + ")" +
                       (faster ? "" : " [ratio not met]") + "; " + finals +
                       (matched_by.empty() ? " [no non-best strategy matches best-ahead]"
                                           : " [" + matched_by + " >= best-ahead]");
  return {faster && !matched_by.empty(), detail};
}

Outcome Throughput(const std::vector<RunResult>& u2, const std::vector<RunResult>& u4) {
  bool complete = u2.size() == kSeeds.size() && u4.size() == kSeeds.size();
  bool only_updates_differ = complete;
  std::string counts;
  for (std::size_t i = 0; complete && i < u2.size(); ++i) {
    nlohmann::json c2 = ToJson(u2[i].config), c4 = ToJson(u4[i].config);
    c2.erase("steps_per_update");
    c4.erase("steps_per_update");
    const auto expected = [](const RunResult& r) {
      const std::int64_t u = r.config.steps_per_update;
      return r.config.total_steps / u - r.config.min_fill / u;
    };
    only_updates_differ = only_updates_differ && c2 == c4 &&
                          u2[i].env_steps == u4[i].env_steps &&
                          u2[i].updates_applied == expected(u2[i]) &&
                          u4[i].updates_applied == expected(u4[i]) &&
                          u2[i].updates_applied != u4[i].updates_applied;
    if (i == 0) {
      counts = "updates " + std::to_string(u2[i].updates_applied) + " vs " +
               std::to_string(u4[i].updates_applied);
    }
  }
  if (!complete) return {false, "missing runs"};
  const double m2 = Median(FinalAvgs(u2));
  const double m4 = Median(FinalAvgs(u4));
  return {only_updates_differ && m2 >= m4,
          "10-ahead, " + counts + (only_updates_differ ? "" : " [config/update mismatch]") +
              "; median final avg100 2:1 " + Fmt("%.3f", m2) + " vs 4:1 " + Fmt("%.3f", m4)};
}

// ---------------------------------------------------------------- 9

Outcome Persistence(const TeacherBank& bank, const fs::path& out) {
  const fs::path dir = out / "bank_seed0";
  fs::remove_all(dir);
  SaveBank(bank, dir);
  const TeacherBank loaded = LoadBank(dir, EnvId::kCatch);
  bool outputs_equal = loaded.size() == bank.size();
  bool data_equal = outputs_equal;
  Rng rng = MakeStream(109, 0);
  for (int k = 0; outputs_equal && k < bank.size(); ++k) {
    for (int p = 0; p < kProbeStates; ++p) {
      std::vector<double> x(bank.env_spec.obs_dim);
      for (double& v : x) v = Uniform01(rng) < 0.2 ? 1.0 : 0.0;
      outputs_equal = outputs_equal && nnet::Forward(bank.snapshots[k].params, x) ==
                                           nnet::Forward(loaded.snapshots[k].params, x);
    }
    data_equal = data_equal &&
                 EncodeDataset(bank.snapshots[k].dataset, bank.env_spec.obs_dim) ==
                     EncodeDataset(loaded.snapshots[k].dataset, bank.env_spec.obs_dim);
  }

  // Each corruption must be rejected with the named field.
  struct Case {
    std::string expected_field;
    std::function<void(const fs::path&)> corrupt;
    std::optional<EnvId> env;
  };
  auto edit_manifest = [](const fs::path& d, const std::function<void(nlohmann::json&)>& f) {
    std::ifstream in(d / "manifest.json");
    nlohmann::json j = nlohmann::json::parse(in);
    in.close();
    f(j);
    std::ofstream(d / "manifest.json", std::ios::trunc) << j.dump(2);
  };
  auto flip = [](const fs::path& file, std::size_t offset) {
    auto bytes = io::ReadFile(file);
    bytes[offset] ^= 0x10;
    io::WriteFile(file, bytes);
  };
  const std::vector<Case> cases = {
      {"format_version", [&](const fs::path& d) { edit_manifest(d, [](auto& j) { j["format_version"] = 2; }); }, {}},
      {"env_spec.env_id", [](const fs::path&) {}, EnvId::kGridGoal},
      {"snapshots[3].dataset.record_count", [&](const fs::path& d) { flip(d / "dataset_3.bin", 1); }, {}},
      {"snapshots[4].dataset_crc32", [&](const fs::path& d) { flip(d / "dataset_4.bin", 100); }, {}},
      {"snapshots[5].params_crc32", [&](const fs::path& d) { flip(d / "params_5.bin", 50); }, {}},
      {"snapshots[2].dataset_len", [&](const fs::path& d) { edit_manifest(d, [](auto& j) { j["snapshots"][2]["dataset_len"] = 1; }); }, {}},
  };
  int rejected = 0;
  std::string misses;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const fs::path copy = out / ("bank_corrupt_" + std::to_string(i));
    fs::remove_all(copy);
    fs::copy(dir, copy);
    cases[i].corrupt(copy);
    std::string field = "<accepted>";
    try {
      LoadBank(copy, cases[i].env);
    } catch (const LoadError& e) {
      field = e.field();
    }
    if (field == cases[i].expected_field) {
      ++rejected;
    } else {
      misses += " " + cases[i].expected_field + "->" + field;
    }
    fs::remove_all(copy);
  }
  const bool pass = outputs_equal && data_equal && rejected == static_cast<int>(cases.size());
  return {pass, std::to_string(bank.size()) + " snapshots x " + std::to_string(kProbeStates) +
                    " probes " + (outputs_equal ? "bitwise equal" : "DIFFER") + ", datasets " +
                    (data_equal ? "byte-identical" : "DIFFER") + "; " + std::to_string(rejected) +
                    "/" + std::to_string(cases.size()) + " corruptions rejected with named field" +
                    misses};
}

}  // namespace

int main() {
  const fs::path out = fs::current_path() / "acceptance_out";
  fs::create_directories(out);
  std::map<int, Outcome> results;
  auto report = [&](int id, const std::string& name, const Outcome& o) {
    results[id] = o;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name
              << "): " << o.detail << std::endl;
  };
  auto guarded = [&](int id, const std::string& name, const std::function<Outcome()>& f) {
    try {
      report(id, name, f());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, "gradient correctness", GradientCorrectness);
  guarded(2, "loss oracles", LossOracles);
  guarded(3, "selector properties", SelectorProperties);
  guarded(4, "blend statistics", BlendStatistics);

  std::vector<TeacherRun> teachers;
  guarded(6, "teacher learnability", [&] { return TeacherLearnability(teachers); });
  if (teachers.empty()) {
    for (int id : {5, 7, 8, 9, 10}) report(id, "needs a trained bank", {false, "no teacher bank"});
  } else {
    const TeacherBank& bank = teachers.front().bank;
    guarded(9, "persistence", [&] { return Persistence(bank, out); });
    guarded(5, "reduction identity", [&] { return ReductionIdentity(bank); });
    guarded(10, "determinism", [&] { return Determinism(bank, out); });

    std::map<std::string, std::vector<RunResult>> u2_runs;
    std::vector<RunResult> u4_runs;
    guarded(7, "sample efficiency", [&] {
      RunConfig cfg = DefaultStudentConfig(EnvId::kCatch);
      cfg.total_steps = kTrainSteps;
      std::vector<TeachingPlan> plans;
      for (const char* s : {"no-teacher", "best-ahead", "random-ahead", "k-ahead:5", "k-ahead:10"}) {
        plans.push_back(ParsePlan(s));
      }
      const fs::path dir = out / "runs_u2";
      fs::remove_all(dir);
      const SuiteOutcome o = RunSuite(cfg, &bank, plans, kSeeds, dir);
      if (!o.failures.empty()) return Outcome{false, "run failed: " + o.failures.front()};
      std::ostringstream table;
      WriteReport(BuildReport(LoadRuns(dir)), dir, table);
      EmitPlots(dir);
      u2_runs = ByLabel(o);
      return SampleEfficiency(u2_runs);
    });
    guarded(8, "throughput 2:1 vs 4:1", [&] {
      RunConfig cfg = DefaultStudentConfig(EnvId::kCatch);
      cfg.total_steps = kTrainSteps;
      cfg.steps_per_update = 4;
      const fs::path dir = out / "runs_u4";
      fs::remove_all(dir);
      const SuiteOutcome o = RunSuite(cfg, &bank, {Strategy::KAhead(10)}, kSeeds, dir);
      if (!o.failures.empty()) return Outcome{false, "run failed: " + o.failures.front()};
      u4_runs = o.results;
      if (!u2_runs.count("10-ahead")) return Outcome{false, "2:1 runs missing"};
      return Throughput(u2_runs.at("10-ahead"), u4_runs);
    });
  }

  int passed = 0;
  std::cout << "\nSummary:";
  for (const auto& [id, o] : results) {
    std::cout << " " << id << "=" << (o.pass ? "PASS" : "FAIL");
    passed += o.pass;
  }
  std::cout << "\n" << passed << "/" << results.size() << " criteria passed\n";
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}

#ifndef ZPD_HARNESS_H_
#define ZPD_HARNESS_H_

// Student training (teacher-snapshot curriculum on top of DDQN), experiment
// suites over strategies and seeds, and the per-run output files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zpd/run_config.h"
#include "zpd/selector.h"
#include "zpd/teacherbank.h"

namespace zpd {

// One logged row of a learning curve. Indices are -1 and effective_rho is 0
// for runs without an active teacher; avg100 and loss are NaN before the
// first completed episode / first update.
struct CurvePoint {
  std::int64_t step = 0;
  std::int64_t episodes = 0;
  double avg100 = 0.0;
  int matched_index = -1;
  int zpd_index = -1;
  double effective_rho = 0.0;
  double loss = 0.0;
};

// A call to the teacher selector during a run.
struct SelectionEvent {
  std::int64_t step = 0;
  std::optional<double> student_avg;
  int matched_index = 0;
  int zpd_index = 0;
  double zpd_reward = 0.0;
  bool annealing = false;  // the blend anneal had already latched
};

// nullopt = no teacher (plain DDQN on the student's own experience).
using TeachingPlan = std::optional<Strategy>;

std::string PlanLabel(const TeachingPlan& plan);
// Strategy syntax of ParseStrategy plus "no-teacher".
TeachingPlan ParsePlan(std::string_view text);

struct RunResult {
  RunConfig config;
  std::string label;  // PlanLabel
  std::vector<CurvePoint> curve;
  double final_avg100 = 0.0;
  double average_return_overall = 0.0;  // mean avg100 over logged points
  std::optional<std::int64_t> steps_to_threshold;
  std::int64_t env_steps = 0;
  std::int64_t updates_attempted = 0;  // steps with t % u == 0
  std::int64_t updates_applied = 0;    // attempted after warmup
  std::int64_t episodes = 0;
  std::optional<double> bank_max_reward;
  std::optional<std::int64_t> anneal_trigger_step;
  std::vector<SelectionEvent> selections;
};

// Recomputes final_avg100, average_return_overall and steps_to_threshold
// from `curve`.
void FillDerivedMetrics(RunResult& result);

// Runs the student loop for cfg.total_steps environment steps. `bank` may be
// null only when `plan` is nullopt. A plan with cfg.rho == 0 never touches the
// teacher data and behaves exactly like the no-teacher run.
RunResult RunStudent(const RunConfig& cfg, const TeacherBank* bank,
                     const TeachingPlan& plan);

// Curve CSV: header "step,episodes,avg100,matched_index,zpd_index,
// effective_rho,loss", doubles printed with 17 significant digits.
void WriteCurveCsv(const std::vector<CurvePoint>& curve, std::ostream& out);
std::vector<CurvePoint> ReadCurveCsv(const std::filesystem::path& path);

std::string CurveFileName(const std::string& label, std::uint64_t seed);
std::string RunFileName(const std::string& label, std::uint64_t seed);

nlohmann::json RunSummaryJson(const RunResult& result);
// Writes curve_<label>_<seed>.csv and run_<label>_<seed>.json into `dir`.
void WriteRunFiles(const RunResult& result, const std::filesystem::path& dir);

struct SuiteOutcome {
  std::vector<RunResult> results;     // completed runs, plan-major order
  std::vector<std::string> failures;  // "<label> seed <s>: <error>"
};

// Cross product of plans and seeds sharing one bank. Runs are independent
// and may execute on `threads` worker threads; results are written to
// `out_dir` as they finish, together with suite.json.
SuiteOutcome RunSuite(const RunConfig& base, const TeacherBank* bank,
                      const std::vector<TeachingPlan>& plans,
                      const std::vector<std::uint64_t>& seeds,
                      const std::filesystem::path& out_dir, int threads = 1);

}  // namespace zpd

#endif  // ZPD_HARNESS_H_

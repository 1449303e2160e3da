#ifndef ZPD_REPORT_H_
#define ZPD_REPORT_H_

// Aggregation of finished runs: seed-averaged curves, per-strategy
// "Average" / "Last 100" metrics, winners and win counts, and SVG plots.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zpd/harness.h"

namespace zpd {

struct RunRecord {
  std::string env;
  std::string strategy;
  std::uint64_t seed = 0;
  std::optional<double> bank_max_reward;
  double success_threshold = 0.0;
  std::vector<CurvePoint> curve;
};

// Reads every run_*.json in `dir` together with its curve CSV.
std::vector<RunRecord> LoadRuns(const std::filesystem::path& dir);

// Pointwise mean of avg100 over the runs, on the logging steps every run has
// (NaN entries are skipped per step).
std::vector<std::pair<std::int64_t, double>> SeedAveragedCurve(
    const std::vector<const RunRecord*>& runs);

struct StrategySummary {
  std::string env;
  std::string strategy;
  int seeds = 0;
  double average = 0.0;  // seed mean of the mean avg100 over logged points
  double last100 = 0.0;  // seed mean of the final avg100
  std::optional<double> median_steps_to_threshold;
};

struct EnvWinners {
  std::vector<std::string> average;  // all strategies tied for the best
  std::vector<std::string> last100;
};

struct Report {
  std::vector<StrategySummary> rows;              // env-major, strategy order
  std::map<std::string, EnvWinners> winners;      // by env
  std::map<std::string, std::pair<int, int>> wins;  // strategy -> (avg, last)
};

Report BuildReport(const std::vector<RunRecord>& runs);

// Writes summary.csv and wins.csv into `dir` and prints the wins table.
void WriteReport(const Report& report, const std::filesystem::path& dir,
                 std::ostream& table_out);

// One plot_<env>.svg per environment in `dir`. Throws ContractViolation when
// the directory holds no runs.
std::vector<std::filesystem::path> EmitPlots(const std::filesystem::path& dir);

// Axis range covering [lo, hi] padded by 5% of the span on each side.
std::pair<double, double> PaddedRange(double lo, double hi);

}  // namespace zpd

#endif  // ZPD_REPORT_H_

#include "zpd/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace zpd {

namespace {

// no-teacher, best-ahead, random-ahead, then k-ahead by k.
std::pair<int, int> StrategyOrderKey(const std::string& label) {
  if (label == "no-teacher") return {0, 0};
  if (label == "best-ahead") return {1, 0};
  if (label == "random-ahead") return {2, 0};
  try {
    const Strategy s = ParseStrategy(label);
    return {3, s.k};
  } catch (const ContractViolation&) {
    return {4, 0};
  }
}

bool StrategyLess(const std::string& a, const std::string& b) {
  const auto ka = StrategyOrderKey(a);
  const auto kb = StrategyOrderKey(b);
  return ka != kb ? ka < kb : a < b;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / v.size();
}

std::optional<double> Median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::string> ArgmaxAll(const std::vector<std::pair<std::string, double>>& v) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [name, value] : v) {
    if (!std::isnan(value)) best = std::max(best, value);
  }
  std::vector<std::string> out;
  for (const auto& [name, value] : v) {
    if (value == best) out.push_back(name);
  }
  return out;
}

RunResult AsResult(const RunRecord& rec) {
  RunResult r;
  r.config.success_threshold = rec.success_threshold;
  r.curve = rec.curve;
  FillDerivedMetrics(r);
  return r;
}

}  // namespace

std::vector<RunRecord> LoadRuns(const std::filesystem::path& dir) {
  std::vector<RunRecord> runs;
  if (!std::filesystem::is_directory(dir)) return runs;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("run_") && name.ends_with(".json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path.filename().string(), e.what());
    }
    RunRecord rec;
    rec.env = j.at("env_id").get<std::string>();
    rec.strategy = j.at("strategy").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("bank_max_reward").is_null()) {
      rec.bank_max_reward = j["bank_max_reward"].get<double>();
    }
    rec.success_threshold = j.at("config").at("success_threshold").get<double>();
    rec.curve = ReadCurveCsv(dir / j.at("curve_file").get<std::string>());
    runs.push_back(std::move(rec));
  }
  return runs;
}

std::vector<std::pair<std::int64_t, double>> SeedAveragedCurve(
    const std::vector<const RunRecord*>& runs) {
  std::vector<std::pair<std::int64_t, double>> out;
  if (runs.empty()) return out;
  std::set<std::int64_t> common;
  for (const auto& p : runs.front()->curve) common.insert(p.step);
  for (std::size_t r = 1; r < runs.size(); ++r) {
    std::set<std::int64_t> steps;
    for (const auto& p : runs[r]->curve) {
      if (common.count(p.step)) steps.insert(p.step);
    }
    common = std::move(steps);
  }
  for (std::int64_t step : common) {
    std::vector<double> values;
    for (const RunRecord* run : runs) {
      for (const auto& p : run->curve) {
        if (p.step == step && !std::isnan(p.avg100)) values.push_back(p.avg100);
      }
    }
    if (!values.empty()) out.emplace_back(step, Mean(values));
  }
  return out;
}

Report BuildReport(const std::vector<RunRecord>& runs) {
  Report report;
  std::set<std::string> envs;
  for (const auto& r : runs) envs.insert(r.env);
  for (const std::string& env : envs) {
    std::vector<std::string> strategies;
    for (const auto& r : runs) {
      if (r.env == env &&
          std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) {
        strategies.push_back(r.strategy);
      }
    }
    std::sort(strategies.begin(), strategies.end(), StrategyLess);

    std::vector<std::pair<std::string, double>> averages;
    std::vector<std::pair<std::string, double>> lasts;
    for (const std::string& strategy : strategies) {
      std::vector<double> avg;
      std::vector<double> last;
      std::vector<double> thresholds;
      for (const auto& r : runs) {
        if (r.env != env || r.strategy != strategy) continue;
        const RunResult derived = AsResult(r);
        avg.push_back(derived.average_return_overall);
        last.push_back(derived.final_avg100);
        if (derived.steps_to_threshold) {
          thresholds.push_back(static_cast<double>(*derived.steps_to_threshold));
        }
      }
      StrategySummary row;
      row.env = env;
      row.strategy = strategy;
      row.seeds = static_cast<int>(avg.size());
      row.average = Mean(avg);
      row.last100 = Mean(last);
      // Only meaningful when every seed crossed the threshold.
      if (thresholds.size() == avg.size()) row.median_steps_to_threshold = Median(thresholds);
      averages.emplace_back(strategy, row.average);
      lasts.emplace_back(strategy, row.last100);
      report.rows.push_back(row);
      report.wins.try_emplace(strategy, 0, 0);
    }
    EnvWinners w{ArgmaxAll(averages), ArgmaxAll(lasts)};
    for (const auto& s : w.average) ++report.wins[s].first;
    for (const auto& s : w.last100) ++report.wins[s].second;
    report.winners[env] = std::move(w);
  }
  return report;
}

void WriteReport(const Report& report, const std::filesystem::path& dir,
                 std::ostream& table_out) {
  std::filesystem::create_directories(dir);
  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
  };
  {
    std::ofstream out(dir / "summary.csv", std::ios::trunc);
    out << "env,strategy,seeds,average,last100,median_steps_to_threshold\n";
    for (const auto& row : report.rows) {
      out << row.env << ',' << row.strategy << ',' << row.seeds << ','
          << fmt(row.average) << ',' << fmt(row.last100) << ','
          << (row.median_steps_to_threshold ? fmt(*row.median_steps_to_threshold) : "")
          << '\n';
    }
  }

  std::vector<std::string> strategies;
  for (const auto& [s, counts] : report.wins) strategies.push_back(s);
  std::sort(strategies.begin(), strategies.end(), StrategyLess);
  {
    std::ofstream out(dir / "wins.csv", std::ios::trunc);
    out << "metric";
    for (const auto& s : strategies) out << ',' << s;
    out << "\nAverage";
    for (const auto& s : strategies) out << ',' << report.wins.at(s).first;
    out << "\nLast 100";
    for (const auto& s : strategies) out << ',' << report.wins.at(s).second;
    out << '\n';
  }

  table_out << "Wins per strategy (highest seed-averaged reward per environment)\n";
  table_out << "Method  ";
  for (const auto& s : strategies) table_out << " | " << s;
  table_out << "\nAverage ";
  for (const auto& s : strategies) {
    table_out << " | " << std::string(s.size() - 1, ' ') << report.wins.at(s).first;
  }
  table_out << "\nLast 100";
  for (const auto& s : strategies) {
    table_out << " | " << std::string(s.size() - 1, ' ') << report.wins.at(s).second;
  }
  table_out << "\n";
  for (const auto& row : report.rows) {
    table_out << "  " << row.env << " " << row.strategy << ": average " << fmt(row.average)
              << ", last100 " << fmt(row.last100) << " (" << row.seeds << " seeds)\n";
  }
}

// ---------------------------------------------------------------- plots

std::pair<double, double> PaddedRange(double lo, double hi) {
  double span = hi - lo;
  if (span <= 0.0) span = std::max(1.0, std::abs(hi));
  return {lo - 0.05 * span, hi + 0.05 * span};
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d4a017", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Axes {
  double x0, x1, y0, y1;
  double left = 70, top = 40, width = 640, height = 380;
  double X(double v) const { return left + (v - x0) / (x1 - x0) * width; }
  double Y(double v) const { return top + height - (v - y0) / (y1 - y0) * height; }
};

void WriteSvg(const std::filesystem::path& path, const std::string& env,
              const std::vector<std::pair<std::string,
                                          std::vector<std::pair<std::int64_t, double>>>>& curves,
              std::optional<double> teacher_line) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& [name, pts] : curves) {
    for (const auto& [x, y] : pts) {
      xmin = std::min(xmin, static_cast<double>(x));
      xmax = std::max(xmax, static_cast<double>(x));
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (teacher_line) {
    ymin = std::min(ymin, *teacher_line);
    ymax = std::max(ymax, *teacher_line);
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
  }
  if (!std::isfinite(ymin)) {
    ymin = 0;
    ymax = 1;
  }
  const auto [x0, x1] = PaddedRange(xmin, xmax);
  const auto [y0, y1] = PaddedRange(ymin, ymax);
  Axes ax{x0, x1, y0, y1};

  std::ofstream out(path, std::ios::trunc);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"480\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"900\" height=\"480\" fill=\"white\"/>\n";
  out << "<text x=\"" << ax.left << "\" y=\"24\" font-size=\"15\">" << env
      << ": avg100 return vs environment steps</text>\n";
  out << "<rect x=\"" << ax.left << "\" y=\"" << ax.top << "\" width=\"" << ax.width
      << "\" height=\"" << ax.height << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << ax.X(xv) << "\" y=\"" << ax.top + ax.height + 16
        << "\" text-anchor=\"middle\">" << static_cast<long long>(std::llround(xv))
        << "</text>\n";
    out << "<text x=\"" << ax.left - 6 << "\" y=\"" << ax.Y(yv) + 4
        << "\" text-anchor=\"end\">" << std::round(yv * 100) / 100 << "</text>\n";
  }
  if (teacher_line) {
    out << "<line x1=\"" << ax.X(x0) << "\" y1=\"" << ax.Y(*teacher_line) << "\" x2=\""
        << ax.X(x1) << "\" y2=\"" << ax.Y(*teacher_line)
        << "\" stroke=\"black\" stroke-dasharray=\"6,4\" class=\"teacher\"/>\n";
  }
  std::size_t color = 0;
  double legend_y = ax.top + 10;
  for (const auto& [name, pts] : curves) {
    const char* c = kPalette[color++ % std::size(kPalette)];
    out << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << c
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) out << ax.X(static_cast<double>(x)) << ',' << ax.Y(y) << ' ';
    out << "\"/>\n";
    out << "<line x1=\"725\" y1=\"" << legend_y << "\" x2=\"745\" y2=\"" << legend_y
        << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"750\" y=\"" << legend_y + 4 << "\">" << name << "</text>\n";
    legend_y += 18;
  }
  if (teacher_line) {
    out << "<line x1=\"725\" y1=\"" << legend_y << "\" x2=\"745\" y2=\"" << legend_y
        << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
    out << "<text x=\"750\" y=\"" << legend_y + 4 << "\">best teacher snapshot</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

std::vector<std::filesystem::path> EmitPlots(const std::filesystem::path& dir) {
  const std::vector<RunRecord> runs = LoadRuns(dir);
  if (runs.empty()) {
    throw ContractViolation(
        "no runs found in " + dir.string() +
        ": expected run_<strategy>_<seed>.json files with their "
        "curve_<strategy>_<seed>.csv (written by `suite` or `train-student`)");
  }
  std::set<std::string> envs;
  for (const auto& r : runs) envs.insert(r.env);
  std::vector<std::filesystem::path> written;
  for (const std::string& env : envs) {
    std::vector<std::string> strategies;
    std::optional<double> teacher_line;
    for (const auto& r : runs) {
      if (r.env != env) continue;
      if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) {
        strategies.push_back(r.strategy);
      }
      if (r.bank_max_reward) {
        teacher_line = std::max(teacher_line.value_or(*r.bank_max_reward), *r.bank_max_reward);
      }
    }
    std::sort(strategies.begin(), strategies.end(), StrategyLess);
    std::vector<std::pair<std::string, std::vector<std::pair<std::int64_t, double>>>> curves;
    for (const auto& s : strategies) {
      std::vector<const RunRecord*> subset;
      for (const auto& r : runs) {
        if (r.env == env && r.strategy == s) subset.push_back(&r);
      }
      curves.emplace_back(s, SeedAveragedCurve(subset));
    }
    const auto path = dir / ("plot_" + env + ".svg");
    WriteSvg(path, env, curves, teacher_line);
    written.push_back(path);
  }
  return written;
}

}  // namespace zpd

#include "zpd/selector.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

namespace zpd {

Strategy Strategy::KAhead(int k) {
  Require(k >= 0, "k-ahead: k must be non-negative");
  return {StrategyKind::kKAhead, k};
}

std::string Strategy::Label() const {
  switch (kind) {
    case StrategyKind::kKAhead:
      return std::to_string(k) + "-ahead";
    case StrategyKind::kBestAhead:
      return "best-ahead";
    case StrategyKind::kRandomAhead:
      return "random-ahead";
  }
  return "unknown";
}

namespace {

int ParseK(std::string_view digits, std::string_view original) {
  int k = -1;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || k < 0) {
    throw ContractViolation("bad strategy '" + std::string(original) +
                            "' (expected best-ahead, random-ahead or k-ahead:<k>)");
  }
  return k;
}

}  // namespace

Strategy ParseStrategy(std::string_view text) {
  if (text == "best-ahead") return Strategy::BestAhead();
  if (text == "random-ahead") return Strategy::RandomAhead();
  constexpr std::string_view kPrefix = "k-ahead:";
  if (text.starts_with(kPrefix)) {
    return Strategy::KAhead(ParseK(text.substr(kPrefix.size()), text));
  }
  constexpr std::string_view kSuffix = "-ahead";
  if (text.ends_with(kSuffix) && text.size() > kSuffix.size()) {
    return Strategy::KAhead(ParseK(text.substr(0, text.size() - kSuffix.size()), text));
  }
  throw ContractViolation("bad strategy '" + std::string(text) +
                          "' (expected best-ahead, random-ahead or k-ahead:<k>)");
}

int MatchTeacher(std::span<const double> rewards, double student_avg,
                 int previous_match) {
  Require(!rewards.empty(), "MatchTeacher: empty bank");
  int best = 0;
  double best_gap = std::abs(rewards[0] - student_avg);
  for (std::size_t i = 1; i < rewards.size(); ++i) {
    const double gap = std::abs(rewards[i] - student_avg);
    if (gap < best_gap) {
      best_gap = gap;
      best = static_cast<int>(i);
    }
  }
  const int last = static_cast<int>(rewards.size()) - 1;
  return std::max(best, std::clamp(previous_match, 0, last));
}

int BestSnapshot(std::span<const double> rewards) {
  Require(!rewards.empty(), "BestSnapshot: empty bank");
  return static_cast<int>(std::max_element(rewards.begin(), rewards.end()) -
                          rewards.begin());
}

SelectorState InitSelector(const Strategy& strategy,
                           std::span<const double> rewards,
                           std::optional<double> student_avg, Rng rng) {
  SelectorState state{strategy, 0, 0, std::move(rng)};
  FSelect(state, rewards, student_avg);
  return state;
}

void FSelect(SelectorState& state, std::span<const double> rewards,
             std::optional<double> student_avg) {
  Require(!rewards.empty(), "FSelect: empty bank");
  const int last = static_cast<int>(rewards.size()) - 1;
  state.matched_index =
      student_avg ? MatchTeacher(rewards, *student_avg, state.matched_index)
                  : std::clamp(state.matched_index, 0, last);

  switch (state.strategy.kind) {
    case StrategyKind::kKAhead: {
      // Computed in 64 bits so a huge k cannot overflow.
      const std::int64_t ahead =
          static_cast<std::int64_t>(state.matched_index) + state.strategy.k;
      state.zpd_index = static_cast<int>(std::min<std::int64_t>(ahead, last));
      break;
    }
    case StrategyKind::kBestAhead:
      state.zpd_index = BestSnapshot(rewards);
      break;
    case StrategyKind::kRandomAhead: {
      std::vector<int> candidates;
      for (int i = 0; i <= last; ++i) {
        if (!student_avg || rewards[i] > *student_avg) candidates.push_back(i);
      }
      state.zpd_index = candidates.empty()
                            ? last
                            : candidates[UniformInt(state.rng,
                                                    static_cast<int>(candidates.size()))];
      break;
    }
  }
}

bool ShouldRetrigger(const SelectorState& state, std::span<const double> rewards,
                     std::optional<double> student_avg) {
  Require(state.matched_index >= 0 &&
              state.matched_index < static_cast<int>(rewards.size()),
          "ShouldRetrigger: matched index outside the bank");
  return student_avg.has_value() && *student_avg > rewards[state.matched_index];
}

}  // namespace zpd

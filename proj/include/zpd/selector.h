#ifndef ZPD_SELECTOR_H_
#define ZPD_SELECTOR_H_

// Teacher selection: match the student to the snapshot with the closest
// reward, then pick the snapshot whose data feeds the student's minibatches.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "zpd/common.h"

namespace zpd {

enum class StrategyKind { kKAhead, kBestAhead, kRandomAhead };

struct Strategy {
  StrategyKind kind = StrategyKind::kKAhead;
  int k = 0;  // kKAhead only

  static Strategy KAhead(int k);
  static Strategy BestAhead() { return {StrategyKind::kBestAhead, 0}; }
  static Strategy RandomAhead() { return {StrategyKind::kRandomAhead, 0}; }

  // "5-ahead", "best-ahead", "random-ahead". Safe in file names.
  std::string Label() const;

  bool operator==(const Strategy&) const = default;
};

// Accepts "best-ahead", "random-ahead", "k-ahead:<k>" and "<k>-ahead".
Strategy ParseStrategy(std::string_view text);

// argmin_i |rewards[i] - student_avg| (lowest index on ties), clamped to be
// no smaller than previous_match.
int MatchTeacher(std::span<const double> rewards, double student_avg,
                 int previous_match);

// Lowest index of the maximum reward.
int BestSnapshot(std::span<const double> rewards);

struct SelectorState {
  Strategy strategy;
  int matched_index = 0;
  int zpd_index = 0;
  Rng rng;  // random-ahead draws
};

// Initial selection. With no completed student episode the match is
// snapshot 0.
SelectorState InitSelector(const Strategy& strategy,
                           std::span<const double> rewards,
                           std::optional<double> student_avg, Rng rng);

// Re-matches the student and recomputes the ZPD snapshot:
//   k-ahead      min(matched + k, N - 1)
//   best-ahead   BestSnapshot(rewards), fixed for the run
//   random-ahead uniform over {i : rewards[i] > student_avg}; N - 1 when
//                that set is empty; every snapshot before the first episode.
void FSelect(SelectorState& state, std::span<const double> rewards,
             std::optional<double> student_avg);

// True iff the student's average strictly exceeds the matched snapshot's.
bool ShouldRetrigger(const SelectorState& state, std::span<const double> rewards,
                     std::optional<double> student_avg);

}  // namespace zpd

#endif  // ZPD_SELECTOR_H_

#ifndef ZPD_REPLAY_H_
#define ZPD_REPLAY_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "zpd/common.h"

namespace zpd {

enum class Origin : std::uint8_t { kStudent, kTeacher };

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;  // kept on terminal steps, never bootstrapped
  bool terminal = false;
  Origin origin = Origin::kStudent;

  bool operator==(const Transition&) const = default;
};

// Fixed-capacity FIFO ring of transitions with flat storage.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim);

  void Push(const Transition& t);

  // `i`-th oldest stored transition.
  Transition At(std::size_t i) const;
  // Uniform draw with replacement from the filled region.
  Transition Sample(Rng& rng) const;

  // The most recent min(n, size()) transitions, oldest first.
  std::vector<Transition> Tail(std::size_t n) const;

  std::size_t size() const { return fill_count_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return fill_count_ == 0; }
  int obs_dim() const { return obs_dim_; }

 private:
  Transition Slot(std::size_t slot) const;

  std::size_t capacity_;
  int obs_dim_;
  std::vector<double> states_;
  std::vector<double> next_states_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> terminals_;
  std::vector<Origin> origins_;
  std::size_t write_cursor_ = 0;
  std::size_t fill_count_ = 0;
};

// Probability that a minibatch slot is filled from the teacher dataset.
// Constant until the anneal trigger latches at step t0; afterwards decays
// linearly to zero over `anneal_horizon` steps.
class BlendSchedule {
 public:
  BlendSchedule(double rho, std::int64_t anneal_horizon);

  double rho() const { return rho_; }
  std::int64_t anneal_horizon() const { return anneal_horizon_; }
  std::optional<std::int64_t> anneal_trigger_step() const { return trigger_; }
  bool triggered() const { return trigger_.has_value(); }

  double EffectiveRho(std::int64_t step) const;

  // Latches the trigger at `step` when the student's trailing average
  // strictly exceeds the best snapshot reward. Once latched it stays latched.
  // Returns true if this call latched it.
  bool MaybeTriggerAnneal(double student_avg100, double bank_max_reward,
                          std::int64_t step);

 private:
  double rho_;
  std::int64_t anneal_horizon_;
  std::optional<std::int64_t> trigger_;
};

struct Minibatch {
  std::vector<Transition> transitions;
  int teacher_count = 0;

  std::size_t size() const { return transitions.size(); }
};

// Fills `batch_size` slots; each slot independently comes from
// `teacher_data` with probability schedule.EffectiveRho(step), otherwise from
// `student`. Sampling within a source is uniform with replacement.
// Throws NotReadyError if the student buffer is empty, ContractViolation if a
// slot picks an empty teacher dataset.
Minibatch Blend(std::span<const Transition> teacher_data,
                const ReplayBuffer& student, const BlendSchedule& schedule,
                std::int64_t step, int batch_size, Rng& rng);

// Teacher dataset file: version byte, u64 record count, then records of
// state f64[obs_dim], action u32, reward f64, next_state f64[obs_dim],
// terminal u8. All little-endian. Records load with origin = teacher.
inline constexpr std::uint8_t kDatasetFormatVersion = 1;

std::vector<std::uint8_t> EncodeDataset(std::span<const Transition> data,
                                        int obs_dim);
std::vector<Transition> DecodeDataset(std::vector<std::uint8_t> bytes,
                                      int obs_dim, int action_count);

}  // namespace zpd

#endif  // ZPD_REPLAY_H_

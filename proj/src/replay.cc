#include "zpd/replay.h"

#include <algorithm>
#include <string>

#include "zpd/binary_io.h"

namespace zpd {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim)
    : capacity_(capacity), obs_dim_(obs_dim) {
  Require(capacity > 0, "ReplayBuffer: capacity must be positive");
  Require(obs_dim > 0, "ReplayBuffer: obs_dim must be positive");
  states_.resize(capacity * obs_dim);
  next_states_.resize(capacity * obs_dim);
  actions_.resize(capacity);
  rewards_.resize(capacity);
  terminals_.resize(capacity);
  origins_.resize(capacity);
}

void ReplayBuffer::Push(const Transition& t) {
  Require(t.state.size() == static_cast<std::size_t>(obs_dim_) &&
              t.next_state.size() == static_cast<std::size_t>(obs_dim_),
          "ReplayBuffer: transition width does not match obs_dim");
  const std::size_t slot = write_cursor_;
  std::copy(t.state.begin(), t.state.end(), states_.begin() + slot * obs_dim_);
  std::copy(t.next_state.begin(), t.next_state.end(),
            next_states_.begin() + slot * obs_dim_);
  actions_[slot] = t.action;
  rewards_[slot] = t.reward;
  terminals_[slot] = t.terminal ? 1 : 0;
  origins_[slot] = t.origin;
  write_cursor_ = (write_cursor_ + 1) % capacity_;
  fill_count_ = std::min(fill_count_ + 1, capacity_);
}

Transition ReplayBuffer::Slot(std::size_t slot) const {
  Transition t;
  const auto begin = states_.begin() + slot * obs_dim_;
  t.state.assign(begin, begin + obs_dim_);
  const auto next_begin = next_states_.begin() + slot * obs_dim_;
  t.next_state.assign(next_begin, next_begin + obs_dim_);
  t.action = actions_[slot];
  t.reward = rewards_[slot];
  t.terminal = terminals_[slot] != 0;
  t.origin = origins_[slot];
  return t;
}

Transition ReplayBuffer::At(std::size_t i) const {
  Require(i < fill_count_, "ReplayBuffer: index out of range");
  const std::size_t oldest = fill_count_ < capacity_ ? 0 : write_cursor_;
  return Slot((oldest + i) % capacity_);
}

Transition ReplayBuffer::Sample(Rng& rng) const {
  if (empty()) throw NotReadyError("ReplayBuffer: sample from empty buffer");
  return At(static_cast<std::size_t>(UniformInt(rng, static_cast<int>(fill_count_))));
}

std::vector<Transition> ReplayBuffer::Tail(std::size_t n) const {
  n = std::min(n, fill_count_);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = fill_count_ - n; i < fill_count_; ++i) out.push_back(At(i));
  return out;
}

// ---------------------------------------------------------------- schedule

BlendSchedule::BlendSchedule(double rho, std::int64_t anneal_horizon)
    : rho_(rho), anneal_horizon_(anneal_horizon) {
  Require(rho >= 0.0 && rho <= 1.0, "BlendSchedule: rho must lie in [0, 1]");
  Require(anneal_horizon > 0, "BlendSchedule: anneal_horizon must be positive");
}

double BlendSchedule::EffectiveRho(std::int64_t step) const {
  if (!trigger_ || step <= *trigger_) return rho_;
  const double elapsed = static_cast<double>(step - *trigger_);
  const double remaining =
      std::max(0.0, 1.0 - elapsed / static_cast<double>(anneal_horizon_));
  return rho_ * remaining;
}

bool BlendSchedule::MaybeTriggerAnneal(double student_avg100,
                                       double bank_max_reward,
                                       std::int64_t step) {
  if (trigger_ || !(student_avg100 > bank_max_reward)) return false;
  trigger_ = step;
  return true;
}

// ---------------------------------------------------------------- blend

Minibatch Blend(std::span<const Transition> teacher_data,
                const ReplayBuffer& student, const BlendSchedule& schedule,
                std::int64_t step, int batch_size, Rng& rng) {
  Require(batch_size > 0, "Blend: batch_size must be positive");
  if (student.empty()) {
    throw NotReadyError("Blend: student buffer is empty");
  }
  const double rho = schedule.EffectiveRho(step);
  Minibatch batch;
  batch.transitions.reserve(batch_size);
  for (int slot = 0; slot < batch_size; ++slot) {
    // The Bernoulli draw is made even when rho is 0 or 1 so the stream
    // consumption does not depend on rho.
    const bool from_teacher = Uniform01(rng) < rho;
    if (from_teacher) {
      Require(!teacher_data.empty(), "Blend: teacher slot drawn from an empty dataset");
      const auto idx = UniformInt(rng, static_cast<int>(teacher_data.size()));
      Transition t = teacher_data[idx];
      t.origin = Origin::kTeacher;
      batch.transitions.push_back(std::move(t));
      ++batch.teacher_count;
    } else {
      Transition t = student.Sample(rng);
      t.origin = Origin::kStudent;
      batch.transitions.push_back(std::move(t));
    }
  }
  return batch;
}

// ---------------------------------------------------------------- files

std::vector<std::uint8_t> EncodeDataset(std::span<const Transition> data,
                                        int obs_dim) {
  io::ByteWriter out;
  out.PutU8(kDatasetFormatVersion);
  out.PutU64(data.size());
  for (const Transition& t : data) {
    Require(t.state.size() == static_cast<std::size_t>(obs_dim) &&
                t.next_state.size() == static_cast<std::size_t>(obs_dim),
            "EncodeDataset: transition width does not match obs_dim");
    for (double x : t.state) out.PutF64(x);
    out.PutU32(static_cast<std::uint32_t>(t.action));
    out.PutF64(t.reward);
    for (double x : t.next_state) out.PutF64(x);
    out.PutU8(t.terminal ? 1 : 0);
  }
  return out.bytes();
}

std::vector<Transition> DecodeDataset(std::vector<std::uint8_t> bytes,
                                      int obs_dim, int action_count) {
  io::ByteReader in(std::move(bytes));
  const std::uint8_t version = in.GetU8("format_version");
  if (version != kDatasetFormatVersion) {
    throw LoadError("format_version",
                    "unsupported dataset version " + std::to_string(version));
  }
  const std::uint64_t count = in.GetU64("record_count");
  const std::uint64_t record_bytes = 16ull * obs_dim + 4 + 8 + 1;
  if (in.remaining() % record_bytes != 0 ||
      in.remaining() / record_bytes != count) {
    throw LoadError("record_count",
                    "header says " + std::to_string(count) +
                        " records but payload holds " +
                        std::to_string(in.remaining()) + " bytes");
  }
  std::vector<Transition> data(count);
  for (Transition& t : data) {
    t.state.resize(obs_dim);
    for (double& x : t.state) x = in.GetF64("state");
    const std::uint32_t action = in.GetU32("action");
    if (action >= static_cast<std::uint32_t>(action_count)) {
      throw LoadError("action", "action id " + std::to_string(action) + " out of range");
    }
    t.action = static_cast<int>(action);
    t.reward = in.GetF64("reward");
    t.next_state.resize(obs_dim);
    for (double& x : t.next_state) x = in.GetF64("next_state");
    const std::uint8_t terminal = in.GetU8("terminal");
    if (terminal > 1) throw LoadError("terminal", "flag must be 0 or 1");
    t.terminal = terminal == 1;
    t.origin = Origin::kTeacher;
  }
  return data;
}

}  // namespace zpd

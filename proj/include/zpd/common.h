#ifndef ZPD_COMMON_H_
#define ZPD_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace zpd {

// All stochastic behaviour in the library draws from this engine. The
// engine's output sequence is fixed by the standard, so a seed pins a run.
using Rng = std::mt19937_64;

// Independent, reproducible stream for one consumer (environment, policy,
// blend, ...) of a run seeded with `seed`.
Rng MakeStream(std::uint64_t seed, std::uint64_t stream_id);

double Uniform01(Rng& rng);
int UniformInt(Rng& rng, int upper_exclusive);

// Caller broke an operation precondition (bad action id, shape mismatch, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A NaN/Inf showed up in a loss or a parameter. `what()` names the term.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough data yet to build a minibatch.
class NotReadyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Persisted data could not be read back. `field()` names the offending
// manifest field or record component.
class LoadError : public std::runtime_error {
 public:
  LoadError(std::string field, const std::string& detail)
      : std::runtime_error(field + ": " + detail), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace zpd

#endif  // ZPD_COMMON_H_

#include "zpd/common.h"

namespace zpd {

Rng MakeStream(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return Rng(seq);
}

double Uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

int UniformInt(Rng& rng, int upper_exclusive) {
  Require(upper_exclusive > 0, "UniformInt: empty range");
  return std::uniform_int_distribution<int>(0, upper_exclusive - 1)(rng);
}

}  // namespace zpd

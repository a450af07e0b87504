#pragma once

#include <cmath>
#include <cstdint>

#include "capstream/hashing.hpp"

namespace capstream {

// Independent purposes drawing from one master seed.
enum class Purpose : std::uint64_t {
  element_score = 1,
  eviction = 2,
  rescore = 3,
  workload = 4,
  experiment = 5,
};

// Counter-based randomness: every draw is a pure function of the master seed,
// a purpose and up to three integer coordinates. Element scores use
// (key, stream position), so a stream split across shards sees the same draws
// as the unsplit stream.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t master_seed = 0) noexcept : seed_(master_seed) {}

  std::uint64_t bits(Purpose purpose, std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t c = 0) const noexcept {
    std::uint64_t z = mix64(seed_ ^ (static_cast<std::uint64_t>(purpose) * 0xd1b54a32d192ed03ULL));
    z = mix64(z ^ a);
    z = mix64(z ^ (b * 0x9e3779b97f4a7c15ULL));
    return mix64(z ^ (c * 0xc2b2ae3d27d4eb4fULL));
  }

  double uniform(Purpose purpose, std::uint64_t a, std::uint64_t b = 0,
                 std::uint64_t c = 0) const noexcept {
    return unit_from_bits(bits(purpose, a, b, c));
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

// Exp[rate] from a uniform u in [0, 1).
inline double exponential_from_uniform(double u, double rate) noexcept {
  return -std::log1p(-u) / rate;
}

}  // namespace capstream

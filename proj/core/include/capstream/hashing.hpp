#pragma once

#include <cstdint>

#include "capstream/types.hpp"

namespace capstream {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Top 53 bits as a double in [0, 1).
constexpr double unit_from_bits(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Seeded hash family. unit() gives Hash(x), bucket() gives Hash(b, x); both
// are uniform on [0, 1) and independent across seeds.
class KeyHasher {
 public:
  explicit KeyHasher(std::uint64_t seed = 0) noexcept;

  double unit(KeyId key) const noexcept;
  double bucket(std::uint64_t bucket, KeyId key) const noexcept;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_salt_;
  std::uint64_t bucket_salt_;
};

inline KeyHasher::KeyHasher(std::uint64_t seed) noexcept
    : seed_(seed), key_salt_(mix64(seed ^ 0x6b65796261736531ULL)),
      bucket_salt_(mix64(seed ^ 0x6275636b65747331ULL)) {}

inline double KeyHasher::unit(KeyId key) const noexcept {
  return unit_from_bits(mix64(mix64(key ^ key_salt_) + key_salt_));
}

inline double KeyHasher::bucket(std::uint64_t bucket, KeyId key) const noexcept {
  return unit_from_bits(mix64(mix64(key ^ bucket_salt_) ^ mix64(bucket + 0x5851f42d4c957f2dULL)));
}

}  // namespace capstream

#pragma once

#include <cstddef>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "capstream/hashing.hpp"
#include "capstream/random.hpp"
#include "capstream/types.hpp"

namespace capstream {

// Integer cap parameter, or infinity (classic sample-and-hold).
class DiscreteEll {
 public:
  static DiscreteEll finite(std::uint64_t ell);
  static DiscreteEll infinite() noexcept { return DiscreteEll(); }
  static DiscreteEll parse(std::string_view text);

  bool is_infinite() const noexcept { return value_ == 0; }
  std::uint64_t value() const;
  std::string to_string() const;

  friend bool operator==(const DiscreteEll&, const DiscreteEll&) = default;

 private:
  DiscreteEll() = default;
  explicit DiscreteEll(std::uint64_t v) : value_(v) {}
  std::uint64_t value_ = 0;
};

struct DiscreteConfig {
  DiscreteEll ell = DiscreteEll::finite(1);
  SampleMode mode = SampleMode::fixed_threshold;
  double tau = 1.0;
  std::size_t k = 0;

  static DiscreteConfig fixed_threshold(DiscreteEll ell, double tau);
  static DiscreteConfig fixed_size(DiscreteEll ell, std::size_t k);
  void validate() const;
};

struct DiscreteSampleEntry {
  KeyId key = 0;
  std::uint64_t count = 0;
  double seed = 0.0;
};

struct DiscreteSample {
  DiscreteEll ell = DiscreteEll::finite(1);
  SampleMode mode = SampleMode::fixed_threshold;
  double tau = 1.0;
  std::size_t k = 0;
  std::vector<DiscreteSampleEntry> entries;  // sorted by key

  const DiscreteSampleEntry* find(KeyId key) const;
  std::uint64_t max_count() const;
};

// Score of one element of `key`: Hash(floor(ell * u), key), or u itself for
// infinite ell. `u` is the element's uniform draw.
inline double score_element_discrete(KeyId key, DiscreteEll ell, const KeyHasher& hasher, double u) noexcept {
  if (ell.is_infinite()) return u;
  const std::uint64_t l = ell.value();
  auto b = static_cast<std::uint64_t>(u * static_cast<double>(l));
  if (b >= l) b = l - 1;
  return hasher.bucket(b, key);
}

// Scores element number `seq` of the stream, which belongs to `key`.
class DiscreteScorer {
 public:
  DiscreteScorer(DiscreteEll ell, Seeds seeds) : ell_(ell), hasher_(seeds.hash), random_(seeds.master) {}

  double element(KeyId key, std::uint64_t seq) const noexcept {
    return score_element_discrete(key, ell_, hasher_, random_.uniform(Purpose::element_score, key, seq));
  }
  // Fresh score for lazy rescoring during eviction; `draw` is a counter.
  double rescore(KeyId key, std::uint64_t draw) const noexcept {
    return score_element_discrete(key, ell_, hasher_, random_.uniform(Purpose::rescore, key, draw));
  }
  DiscreteEll ell() const noexcept { return ell_; }

 private:
  DiscreteEll ell_;
  KeyHasher hasher_;
  RandomSource random_;
};

// Fixed threshold: a key enters on its first element scoring below tau and
// counts every later element.
class DiscreteThresholdSampler {
 public:
  DiscreteThresholdSampler(DiscreteEll ell, double tau, Seeds seeds);

  void add(const Element& element, std::uint64_t seq);
  std::size_t size() const noexcept { return cache_.size(); }
  DiscreteSample sample() const;

 private:
  DiscreteScorer scorer_;
  double tau_;
  std::unordered_map<KeyId, DiscreteSampleEntry> cache_;
};

// Fixed size k: bottom-k over lazily maintained seeds.
class DiscreteSizeSampler {
 public:
  DiscreteSizeSampler(DiscreteEll ell, std::size_t k, Seeds seeds);

  void add(const Element& element, std::uint64_t seq);
  double tau() const noexcept { return tau_; }
  std::size_t size() const noexcept { return cache_.size(); }
  DiscreteSample sample() const;

 private:
  struct Slot {
    std::uint64_t count;
    double seed;
  };

  void evict_one();

  DiscreteScorer scorer_;
  std::size_t k_;
  double tau_ = 1.0;
  std::uint64_t draws_ = 0;
  std::unordered_map<KeyId, Slot> cache_;
  // Max-heap on (seed, key). Each cached key has exactly one heap entry.
  std::priority_queue<std::pair<double, KeyId>> heap_;
};

DiscreteSample sample_fixed_tau_discrete(std::span<const Element> stream, DiscreteEll ell, double tau, Seeds seeds);
DiscreteSample sample_fixed_k_discrete(std::span<const Element> stream, DiscreteEll ell, std::size_t k, Seeds seeds);
DiscreteSample sample_discrete(std::span<const Element> stream, const DiscreteConfig& config, Seeds seeds);

}  // namespace capstream

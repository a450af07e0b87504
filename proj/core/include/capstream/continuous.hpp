#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "capstream/hashing.hpp"
#include "capstream/random.hpp"
#include "capstream/types.hpp"

namespace capstream {

inline constexpr double kUnboundedTau = std::numeric_limits<double>::infinity();

struct ContinuousConfig {
  double ell = 1.0;
  SampleMode mode = SampleMode::fixed_threshold;
  double tau = 1.0;
  std::size_t k = 0;
  // Fraction of k evicted per pass; 0 evicts one key at a time.
  double batch_fraction = 0.0;

  static ContinuousConfig fixed_threshold(double ell, double tau);
  static ContinuousConfig fixed_size(double ell, std::size_t k, double batch_fraction = 0.0);
  void validate() const;
};

struct ContinuousSampleEntry {
  KeyId key = 0;
  double count = 0.0;
};

struct ContinuousSample {
  double ell = 1.0;
  SampleMode mode = SampleMode::fixed_threshold;
  double tau = 1.0;  // kUnboundedTau for a fixed-size sample that never filled
  std::size_t k = 0;
  std::uint64_t eviction_passes = 0;
  std::vector<ContinuousSampleEntry> entries;  // sorted by key

  bool bounded() const noexcept { return tau != kUnboundedTau; }
  const ContinuousSampleEntry* find(KeyId key) const;
};

// Hash(x) / ell.
inline double key_base(const KeyHasher& hasher, KeyId key, double ell) noexcept { return hasher.unit(key) / ell; }

// Element score from the element's Exp[w] draw v.
inline double score_element_continuous(double v, double key_base_value, double ell) noexcept {
  return v <= 1.0 / ell ? key_base_value : v;
}

// Scores element `seq` of the stream (key x, weight w) from one uniform draw U:
// v = -ln(1 - U) / w. Samplers derive their Delta from the same U.
class ContinuousScorer {
 public:
  ContinuousScorer(double ell, Seeds seeds) : ell_(ell), hasher_(seeds.hash), random_(seeds.master) {}

  double uniform(KeyId key, std::uint64_t seq) const noexcept {
    return random_.uniform(Purpose::element_score, key, seq);
  }
  double element(const Element& e, std::uint64_t seq) const noexcept {
    double v = exponential_from_uniform(uniform(e.key, seq), e.weight);
    return score_element_continuous(v, key_base(e.key), ell_);
  }
  double key_base(KeyId key) const noexcept { return capstream::key_base(hasher_, key, ell_); }
  double ell() const noexcept { return ell_; }
  const KeyHasher& hasher() const noexcept { return hasher_; }
  const RandomSource& random() const noexcept { return random_; }

 private:
  double ell_;
  KeyHasher hasher_;
  RandomSource random_;
};

class ContinuousThresholdSampler {
 public:
  ContinuousThresholdSampler(double ell, double tau, Seeds seeds);

  void add(const Element& element, std::uint64_t seq);
  std::size_t size() const noexcept { return cache_.size(); }
  ContinuousSample sample() const;

 private:
  ContinuousScorer scorer_;
  double tau_;
  double rate_;
  bool admit_all_bases_;
  std::unordered_map<KeyId, double> cache_;
};

struct EvictionOutcome {
  double tau = kUnboundedTau;
  std::vector<KeyId> evicted;
};

// One eviction pass over an overfull cache. `tau` is the current threshold
// (kUnboundedTau before the first eviction). Evicts `evict_count` keys and
// adjusts the survivors' counters in place. Draws u_x, r_x come from
// (key, pass_index).
EvictionOutcome evict_batch(std::vector<ContinuousSampleEntry>& cache, double tau, double ell, std::size_t evict_count,
                            const ContinuousScorer& scorer, std::uint64_t pass_index);

class ContinuousSizeSampler {
 public:
  ContinuousSizeSampler(double ell, std::size_t k, Seeds seeds, double batch_fraction = 0.0);

  void add(const Element& element, std::uint64_t seq);
  double tau() const noexcept { return tau_; }
  std::size_t size() const noexcept { return cache_.size(); }
  std::uint64_t eviction_passes() const noexcept { return passes_; }
  ContinuousSample sample() const;

 private:
  void evict();

  ContinuousScorer scorer_;
  std::size_t k_;
  double batch_fraction_;
  std::size_t batch_;
  double tau_ = kUnboundedTau;
  std::uint64_t passes_ = 0;
  std::vector<ContinuousSampleEntry> cache_;
  std::unordered_map<KeyId, std::size_t> index_;
};

ContinuousSample sample_fixed_tau_continuous(std::span<const Element> stream, double ell, double tau, Seeds seeds);
ContinuousSample sample_fixed_k_continuous(std::span<const Element> stream, double ell, std::size_t k, Seeds seeds,
                                           double batch_fraction = 0.0);
ContinuousSample sample_continuous(std::span<const Element> stream, const ContinuousConfig& config, Seeds seeds);

}  // namespace capstream

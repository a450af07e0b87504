#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "capstream/continuous.hpp"
#include "capstream/discrete.hpp"
#include "capstream/frequency.hpp"
#include "capstream/segment.hpp"
#include "capstream/types.hpp"

namespace capstream {

struct PassOneConfig {
  Scheme scheme = Scheme::continuous;
  // Discrete: a positive integer or infinity.
  double ell = 1.0;
  SampleMode mode = SampleMode::fixed_size;
  double tau = 1.0;
  std::size_t k = 0;
  Seeds seeds;

  static PassOneConfig discrete_fixed_size(DiscreteEll ell, std::size_t k, Seeds seeds);
  static PassOneConfig discrete_fixed_threshold(DiscreteEll ell, double tau, Seeds seeds);
  static PassOneConfig continuous_fixed_size(double ell, std::size_t k, Seeds seeds);
  static PassOneConfig continuous_fixed_threshold(double ell, double tau, Seeds seeds);

  DiscreteEll discrete_ell() const;
  // Upper end of the score range: 1 for discrete, infinity for continuous.
  double supremum() const noexcept;
  void validate() const;

  friend bool operator==(const PassOneConfig&, const PassOneConfig&) = default;
};

// Mergeable first-pass state: each key's minimum element score, restricted to
// the k smallest (fixed size) or to scores below tau (fixed threshold).
class PassOneSummary {
 public:
  explicit PassOneSummary(PassOneConfig config);

  void add(const Element& element, std::uint64_t seq);
  // Folds a (key, score) observation in; the key keeps its minimum.
  void offer(KeyId key, double seed);
  double element_score(const Element& element, std::uint64_t seq) const;

  const PassOneConfig& config() const noexcept { return config_; }
  // Fixed size: the (k+1)-st smallest seed, or the supremum while fewer keys
  // were seen. Fixed threshold: tau.
  double threshold() const noexcept { return bound_; }
  std::size_t size() const noexcept { return seeds_.size(); }
  bool contains(KeyId key) const { return seeds_.count(key) != 0; }
  std::optional<double> seed(KeyId key) const;
  // Largest retained seed; the supremum when empty.
  double max_seed() const noexcept;

  std::vector<std::pair<KeyId, double>> entries() const;  // sorted by key
  std::vector<KeyId> keys() const;                         // sorted

  // Restores a summary from serialized parts.
  static PassOneSummary restore(PassOneConfig config, double threshold,
                                std::span<const std::pair<KeyId, double>> entries);

  friend bool operator==(const PassOneSummary& a, const PassOneSummary& b);
  friend PassOneSummary merge_pass_one(const PassOneSummary& a, const PassOneSummary& b);

 private:
  void prune_to_bound();

  PassOneConfig config_;
  double bound_;
  DiscreteScorer discrete_scorer_;
  ContinuousScorer continuous_scorer_;
  std::unordered_map<KeyId, double> seeds_;
  std::set<std::pair<double, KeyId>> order_;  // fixed size only
};

PassOneSummary pass_one(std::span<const Element> stream, const PassOneConfig& config, std::uint64_t first_seq = 0);
// Throws ConfigError when the configurations differ.
PassOneSummary merge_pass_one(const PassOneSummary& a, const PassOneSummary& b);

// Exact weights for a fixed key set.
class PassTwoSummary {
 public:
  PassTwoSummary() = default;
  explicit PassTwoSummary(std::span<const KeyId> keys);

  void add(const Element& element);
  bool tracks(KeyId key) const { return weights_.count(key) != 0; }
  double weight(KeyId key) const;
  std::size_t size() const noexcept { return weights_.size(); }
  std::vector<KeyWeight> weights() const;  // sorted by key

  static PassTwoSummary from_weights(std::span<const KeyWeight> weights);
  friend PassTwoSummary merge_pass_two(const PassTwoSummary& a, const PassTwoSummary& b);

 private:
  std::unordered_map<KeyId, double> weights_;
};

PassTwoSummary pass_two(std::span<const Element> stream, std::span<const KeyId> keys);
PassTwoSummary merge_pass_two(const PassTwoSummary& a, const PassTwoSummary& b);

// 2-pass estimate from both summaries, dispatched on the scheme.
double estimate_two_pass(const PassOneSummary& first, const PassTwoSummary& second, const FrequencyFunction& f,
                         const SegmentPredicate& segment);

}  // namespace capstream

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capstream/frequency.hpp"
#include "capstream/hashing.hpp"
#include "capstream/random.hpp"
#include "capstream/segment.hpp"
#include "capstream/twopass.hpp"
#include "capstream/types.hpp"

namespace capstream {

// The set L of cap parameters: a finite grid, or the whole interval (0, inf).
class CapSet {
 public:
  static CapSet grid(std::vector<double> ells);
  // base * 2^i for i in [lo, hi].
  static CapSet geometric(double base, int lo, int hi);
  static CapSet interval() { return CapSet(); }
  // "interval" or a comma-separated list.
  static CapSet parse(std::string_view text);

  bool is_interval() const noexcept { return interval_; }
  const std::vector<double>& values() const noexcept { return ells_; }
  std::string spec() const;

  friend bool operator==(const CapSet&, const CapSet&) = default;

 private:
  CapSet() = default;
  bool interval_ = true;
  std::vector<double> ells_;
};

// Origin-anchored rectangle [0, y) x [0, h) in the (y, Hash) plane.
struct InclusionRect {
  double y;
  double h;
};

// Leave-one-out threshold of a key for one cap parameter.
struct CapThreshold {
  double ell;
  double tau;  // kUnboundedTau when fewer than k other keys exist
};

// P[(y, h) falls in the union] for y ~ Exp[w], h ~ U[0, 1).
double rectangle_union_probability(double w, std::span<const InclusionRect> rects);
InclusionRect threshold_rectangle(const CapThreshold& threshold);
double mo_inclusion_probability(double w, std::span<const CapThreshold> thresholds);

// Keys kept by the interval structure: those with fewer than `depth` points
// dominating them in both y and h.
class Staircase {
 public:
  struct Point {
    KeyId key;
    double h;
    double y;
    std::size_t dominators;
  };

  explicit Staircase(std::size_t depth) : depth_(depth) {}

  void offer(KeyId key, double h, double y);
  void merge(const Staircase& other);
  std::size_t depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Point>& points() const noexcept { return points_; }

 private:
  void drop_saturated();

  std::size_t depth_;
  std::vector<Point> points_;
  std::unordered_map<KeyId, std::size_t> index_;
};

// First pass of multi-objective sampling: one bottom-k per grid point, or a
// (k+1)-deep staircase for the interval.
class MultiObjectivePassOne {
 public:
  MultiObjectivePassOne(std::size_t k, CapSet caps, Seeds seeds);

  void add(const Element& element, std::uint64_t seq);
  void merge(const MultiObjectivePassOne& other);

  std::size_t k() const noexcept { return k_; }
  const CapSet& caps() const noexcept { return caps_; }
  // S_L, sorted.
  std::vector<KeyId> sample_keys() const;
  // Grid only: S_ell for grid point `index`, sorted.
  std::vector<KeyId> sample_keys_at(std::size_t index) const;
  // Grid only: tau_ell, the (k+1)-st smallest seed.
  std::vector<double> thresholds() const;
  std::vector<InclusionRect> inclusion_rectangles(KeyId key) const;
  std::size_t state_size() const;

 private:
  std::size_t k_;
  CapSet caps_;
  Seeds seeds_;
  KeyHasher hasher_;
  RandomSource random_;
  std::vector<PassOneSummary> grid_;
  Staircase staircase_;
};

struct MultiSampleEntry {
  KeyId key = 0;
  double weight = 0.0;
  double phi = 0.0;
};

struct MultiSample {
  std::size_t k = 0;
  CapSet caps = CapSet::interval();
  std::vector<double> thresholds;        // per grid point; empty for the interval
  std::vector<MultiSampleEntry> entries;  // sorted by key

  const MultiSampleEntry* find(KeyId key) const;
};

MultiSample finish_multi_sample(const MultiObjectivePassOne& first, const PassTwoSummary& second);
MultiSample build_multi_sample(std::span<const Element> stream, std::size_t k, const CapSet& caps, Seeds seeds);

double estimate_multi(const MultiSample& sample, const FrequencyFunction& f, const SegmentPredicate& segment);

}  // namespace capstream

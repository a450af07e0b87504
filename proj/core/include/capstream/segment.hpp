#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <variant>

#include "capstream/types.hpp"

namespace capstream {

// Selects the keys H that a query aggregates over.
class SegmentPredicate {
 public:
  static SegmentPredicate all() { return SegmentPredicate(AllKeys{}); }
  static SegmentPredicate keys(std::unordered_set<KeyId> members);
  // Pseudo-random segment: keys whose salted hash falls in [lo, hi).
  static SegmentPredicate hash_range(double lo, double hi, std::uint64_t salt = 0);

  bool contains(KeyId key) const;
  bool operator()(KeyId key) const { return contains(key); }
  bool is_all() const noexcept { return std::holds_alternative<AllKeys>(rule_); }

  std::string spec() const;

 private:
  struct AllKeys {};
  struct KeySet {
    std::unordered_set<KeyId> members;
  };
  struct HashRange {
    double lo;
    double hi;
    std::uint64_t salt;
  };

  explicit SegmentPredicate(std::variant<AllKeys, KeySet, HashRange> rule) : rule_(std::move(rule)) {}

  std::variant<AllKeys, KeySet, HashRange> rule_;
};

}  // namespace capstream

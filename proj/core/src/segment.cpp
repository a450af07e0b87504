#include "capstream/segment.hpp"

#include <sstream>

#include "capstream/hashing.hpp"

namespace capstream {

SegmentPredicate SegmentPredicate::keys(std::unordered_set<KeyId> members) {
  return SegmentPredicate(KeySet{std::move(members)});
}

SegmentPredicate SegmentPredicate::hash_range(double lo, double hi, std::uint64_t salt) {
  if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) throw ConfigError("hash range must satisfy 0 <= lo <= hi <= 1");
  return SegmentPredicate(HashRange{lo, hi, salt});
}

bool SegmentPredicate::contains(KeyId key) const {
  if (std::holds_alternative<AllKeys>(rule_)) return true;
  if (const auto* set = std::get_if<KeySet>(&rule_)) return set->members.count(key) != 0;
  const auto& range = std::get<HashRange>(rule_);
  double u = KeyHasher(range.salt ^ 0x7365676d656e74ULL).unit(key);
  return u >= range.lo && u < range.hi;
}

std::string SegmentPredicate::spec() const {
  if (std::holds_alternative<AllKeys>(rule_)) return "all";
  if (const auto* set = std::get_if<KeySet>(&rule_)) return "keys:" + std::to_string(set->members.size());
  const auto& range = std::get<HashRange>(rule_);
  std::ostringstream out;
  out << "hash:" << range.lo << ',' << range.hi << ',' << range.salt;
  return out.str();
}

}  // namespace capstream

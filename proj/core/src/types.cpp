#include "capstream/types.hpp"

#include <cmath>

#include "capstream/hashing.hpp"

namespace capstream {

void check_weight(double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw InputError("element weight must be positive and finite");
  }
}

void check_unit_weight(double weight) {
  if (weight != 1.0) throw InputError("discrete sampling requires unit element weights");
}

KeyId canonical_key(std::string_view name) noexcept {
  // FNV-1a over the bytes, then a finalizer to spread the bits.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return mix64(h ^ (static_cast<std::uint64_t>(name.size()) << 56));
}

std::string_view to_string(SampleMode mode) noexcept {
  return mode == SampleMode::fixed_threshold ? "tau" : "k";
}

std::string_view to_string(Scheme scheme) noexcept {
  return scheme == Scheme::discrete ? "d" : "c";
}

SampleMode parse_mode(std::string_view text) {
  if (text == "tau" || text == "fixed-tau" || text == "threshold") return SampleMode::fixed_threshold;
  if (text == "k" || text == "fixed-k" || text == "size") return SampleMode::fixed_size;
  throw ConfigError("unknown sampling mode '" + std::string(text) + "' (expected tau or k)");
}

Scheme parse_scheme(std::string_view text) {
  if (text == "d" || text == "discrete") return Scheme::discrete;
  if (text == "c" || text == "continuous") return Scheme::continuous;
  throw ConfigError("unknown scheme '" + std::string(text) + "' (expected d or c)");
}

}  // namespace capstream

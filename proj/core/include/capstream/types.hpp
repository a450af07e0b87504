#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace capstream {

using KeyId = std::uint64_t;

// One stream update: key x with positive weight w.
struct Element {
  KeyId key = 0;
  double weight = 1.0;
};

// Aggregated weight of one key, as produced by the second pass.
struct KeyWeight {
  KeyId key = 0;
  double weight = 0.0;
};

enum class SampleMode { fixed_threshold, fixed_size };

enum class Scheme { discrete, continuous };

// Malformed input: bad weights, bad lines, bad headers.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters (k = 0, tau outside its range, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Per-run seeds. `hash` selects the hash family, `master` the element
// randomness. Both are pure inputs, so runs are reproducible.
struct Seeds {
  std::uint64_t hash = 0;
  std::uint64_t master = 0;
  friend bool operator==(const Seeds&, const Seeds&) = default;
};

void check_weight(double weight);
void check_unit_weight(double weight);

// Stable 64-bit identifier for a textual key.
KeyId canonical_key(std::string_view name) noexcept;

std::string_view to_string(SampleMode mode) noexcept;
std::string_view to_string(Scheme scheme) noexcept;
SampleMode parse_mode(std::string_view text);
Scheme parse_scheme(std::string_view text);

}  // namespace capstream

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capstream/frequency.hpp"
#include "capstream/segment.hpp"
#include "capstream/types.hpp"

namespace capstream {

// m i.i.d. Zipf(alpha) ranks as unit-weight elements; the key is the rank.
// alpha > 1 draws from the unbounded distribution (rejection sampler);
// alpha <= 1 needs a finite universe and uses ranks 1..m.
std::vector<Element> generate_zipf_stream(double alpha, std::size_t m, std::uint64_t seed);

class ExactAggregate {
 public:
  ExactAggregate() = default;
  explicit ExactAggregate(std::span<const Element> stream);

  void add(const Element& element);
  double weight(KeyId key) const;
  std::size_t active_keys() const noexcept { return weights_.size(); }
  double total_weight() const noexcept { return total_; }
  const std::unordered_map<KeyId, double>& weights() const noexcept { return weights_; }
  // Exact weights of the given keys.
  std::vector<KeyWeight> restrict_to(std::span<const KeyId> keys) const;

 private:
  std::unordered_map<KeyId, double> weights_;
  double total_ = 0.0;
};

double exact_query(const ExactAggregate& aggregate, const FrequencyFunction& f, const SegmentPredicate& segment);

struct ErrorStats {
  double mean_relative_error = 0.0;         // mean |Q_hat - Q| / Q
  double nrmse = 0.0;                       // sqrt(mean ((Q_hat - Q) / Q)^2)
  double mean_signed_relative_error = 0.0;  // mean (Q_hat - Q) / Q
  double squared_error_stderr = 0.0;        // standard error of nrmse^2
  std::size_t runs = 0;
};

class ErrorAccumulator {
 public:
  // Throws std::domain_error when truth is 0.
  void add(double estimate, double truth);
  ErrorStats stats() const;

 private:
  double abs_sum_ = 0.0;
  double sq_sum_ = 0.0;
  double quad_sum_ = 0.0;
  double signed_sum_ = 0.0;
  std::size_t runs_ = 0;
};

struct ExperimentConfig {
  Scheme scheme = Scheme::continuous;
  std::size_t k = 100;
  std::vector<double> ells;
  std::vector<double> caps;
  double alpha = 1.5;
  std::size_t stream_length = 100000;
  std::size_t repetitions = 200;
  std::uint64_t seed = 1;
  std::size_t threads = 1;  // 0: hardware concurrency

  void validate() const;
};

// Rows are ell values, columns cap values.
using ErrorTable = std::vector<std::vector<ErrorStats>>;

struct ErrorGrid {
  Scheme scheme = Scheme::continuous;
  std::vector<double> ells;
  std::vector<double> caps;
  ErrorTable one_pass;
  ErrorTable two_pass;
  double mean_active_keys = 0.0;
};

ErrorGrid run_error_grid(const ExperimentConfig& config,
                         const std::function<void(std::size_t done, std::size_t total)>& progress = {});

struct DiagonalReport {
  std::vector<std::size_t> argmin;   // per cap: row index of the smallest error
  std::vector<std::size_t> nearest;  // per cap: row index of the ell closest to the cap (log scale)
  std::vector<bool> within_one_step;
  std::size_t passed = 0;
};

// values[i][j]: error for ells[i], caps[j].
DiagonalReport diagonal_dominance_report(const std::vector<std::vector<double>>& values, std::span<const double> ells,
                                         std::span<const double> caps);
DiagonalReport diagonal_dominance_report(const ErrorTable& table, std::span<const double> ells,
                                         std::span<const double> caps);

enum class TableFormat { tsv, markdown };
TableFormat parse_table_format(std::string_view text);
void write_error_grid(std::ostream& out, const ErrorGrid& grid, TableFormat format);

}  // namespace capstream

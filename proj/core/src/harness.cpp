#include "capstream/harness.hpp"

#include <algorithm>
#include <atomic>
#include <climits>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <random>
#include <stdexcept>
#include <thread>

#include "capstream/continuous.hpp"
#include "capstream/continuous_est.hpp"
#include "capstream/discrete.hpp"
#include "capstream/discrete_est.hpp"
#include "capstream/format.hpp"
#include "capstream/hashing.hpp"
#include "capstream/random.hpp"
#include "capstream/twopass.hpp"

namespace capstream {

namespace {

double draw_unit(std::mt19937_64& gen) { return unit_from_bits(gen()); }

// Rejection sampler for the unbounded Zipf law, alpha > 1.
std::uint64_t zipf_unbounded(std::mt19937_64& gen, double alpha) {
  const double am1 = alpha - 1.0;
  const double b = std::pow(2.0, am1);
  while (true) {
    double u = 1.0 - draw_unit(gen);
    double v = draw_unit(gen);
    double x = std::floor(std::pow(u, -1.0 / am1));
    if (x < 1.0 || x > static_cast<double>(LONG_MAX)) continue;
    double t = std::pow(1.0 + 1.0 / x, am1);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return static_cast<std::uint64_t>(x);
  }
}

}  // namespace

std::vector<Element> generate_zipf_stream(double alpha, std::size_t m, std::uint64_t seed) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("zipf alpha must be positive");
  if (m == 0) throw ConfigError("stream length must be >= 1");
  std::mt19937_64 gen(mix64(seed ^ 0x7a697066ULL));
  std::vector<Element> out;
  out.reserve(m);
  if (alpha > 1.0) {
    for (std::size_t i = 0; i < m; ++i) out.push_back({zipf_unbounded(gen, alpha), 1.0});
    return out;
  }
  std::vector<double> cdf(m);
  double acc = 0.0;
  for (std::size_t r = 1; r <= m; ++r) {
    acc += std::pow(static_cast<double>(r), -alpha);
    cdf[r - 1] = acc;
  }
  for (std::size_t i = 0; i < m; ++i) {
    double target = draw_unit(gen) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    auto rank = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(m - 1))) + 1;
    out.push_back({rank, 1.0});
  }
  return out;
}

ExactAggregate::ExactAggregate(std::span<const Element> stream) {
  for (const auto& e : stream) add(e);
}

void ExactAggregate::add(const Element& element) {
  check_weight(element.weight);
  weights_[element.key] += element.weight;
  total_ += element.weight;
}

double ExactAggregate::weight(KeyId key) const {
  auto it = weights_.find(key);
  return it == weights_.end() ? 0.0 : it->second;
}

std::vector<KeyWeight> ExactAggregate::restrict_to(std::span<const KeyId> keys) const {
  std::vector<KeyWeight> out;
  out.reserve(keys.size());
  for (KeyId k : keys) out.push_back({k, weight(k)});
  return out;
}

double exact_query(const ExactAggregate& aggregate, const FrequencyFunction& f, const SegmentPredicate& segment) {
  double total = 0.0;
  for (const auto& [key, w] : aggregate.weights()) {
    if (segment(key)) total += f(w);
  }
  return total;
}

void ErrorAccumulator::add(double estimate, double truth) {
  if (truth == 0.0) throw std::domain_error("relative error is undefined for a zero true value");
  double rel = (estimate - truth) / truth;
  abs_sum_ += std::abs(rel);
  sq_sum_ += rel * rel;
  quad_sum_ += rel * rel * rel * rel;
  signed_sum_ += rel;
  ++runs_;
}

ErrorStats ErrorAccumulator::stats() const {
  ErrorStats s;
  s.runs = runs_;
  if (runs_ == 0) return s;
  const double n = static_cast<double>(runs_);
  s.mean_relative_error = abs_sum_ / n;
  s.nrmse = std::sqrt(sq_sum_ / n);
  s.mean_signed_relative_error = signed_sum_ / n;
  if (runs_ > 1) {
    const double mean_sq = sq_sum_ / n;
    const double var_sq = std::max(0.0, (quad_sum_ / n - mean_sq * mean_sq) * n / (n - 1.0));
    s.squared_error_stderr = std::sqrt(var_sq / n);
  }
  return s;
}

void ExperimentConfig::validate() const {
  if (k == 0) throw ConfigError("k must be >= 1");
  if (ells.empty() || caps.empty()) throw ConfigError("ell and cap lists must be nonempty");
  if (stream_length == 0) throw ConfigError("stream length must be >= 1");
  if (repetitions == 0) throw ConfigError("repetitions must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("zipf alpha must be positive");
  for (double c : caps) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("cap values must be positive and finite");
  }
  for (double l : ells) {
    if (scheme == Scheme::discrete && !std::isinf(l) && (!(l >= 1.0) || l != std::floor(l))) {
      throw ConfigError("discrete ell values must be positive integers or inf");
    }
    if (scheme == Scheme::continuous && (!(l > 0.0) || !std::isfinite(l))) {
      throw ConfigError("continuous ell values must be positive and finite");
    }
  }
}

namespace {

struct RepOutcome {
  std::vector<std::vector<double>> one_pass;  // relative errors [ell][cap]
  std::vector<std::vector<double>> two_pass;
  std::size_t active_keys = 0;
};

DiscreteEll to_discrete_ell(double ell) {
  return std::isinf(ell) ? DiscreteEll::infinite() : DiscreteEll::finite(static_cast<std::uint64_t>(ell));
}

RepOutcome run_repetition(const ExperimentConfig& config, std::size_t rep) {
  const RandomSource master(config.seed);
  const auto stream = generate_zipf_stream(config.alpha, config.stream_length, master.bits(Purpose::workload, rep));
  const ExactAggregate aggregate(stream);
  const auto all = SegmentPredicate::all();

  std::vector<FrequencyFunction> fs;
  std::vector<double> truth;
  for (double c : config.caps) {
    fs.push_back(FrequencyFunction::cap(c));
    truth.push_back(exact_query(aggregate, fs.back(), all));
  }

  RepOutcome out;
  out.active_keys = aggregate.active_keys();
  out.one_pass.assign(config.ells.size(), std::vector<double>(fs.size()));
  out.two_pass.assign(config.ells.size(), std::vector<double>(fs.size()));

  for (std::size_t i = 0; i < config.ells.size(); ++i) {
    const double ell = config.ells[i];
    const Seeds seeds{master.bits(Purpose::experiment, rep, 1, i), master.bits(Purpose::experiment, rep, 2, i)};
    if (config.scheme == Scheme::discrete) {
      const DiscreteEll dell = to_discrete_ell(ell);
      const auto sample = sample_fixed_k_discrete(stream, dell, config.k, seeds);
      const DiscreteCoefficients one(dell, sample.tau, std::max<std::uint64_t>(1, sample.max_count()));
      const auto first = pass_one(stream, PassOneConfig::discrete_fixed_size(dell, config.k, seeds));
      const auto keys = first.keys();
      const auto weights = aggregate.restrict_to(keys);
      std::uint64_t top = 1;
      for (const auto& kw : weights) top = std::max<std::uint64_t>(top, static_cast<std::uint64_t>(kw.weight));
      const DiscreteCoefficients two(dell, first.threshold(), top, false);
      for (std::size_t j = 0; j < fs.size(); ++j) {
        out.one_pass[i][j] = estimate_discrete_1pass(sample, fs[j], all, one);
        out.two_pass[i][j] = estimate_discrete_2pass(weights, fs[j], all, two);
      }
    } else {
      const auto sample = sample_fixed_k_continuous(stream, ell, config.k, seeds);
      const auto first = pass_one(stream, PassOneConfig::continuous_fixed_size(ell, config.k, seeds));
      const auto keys = first.keys();
      const auto weights = aggregate.restrict_to(keys);
      for (std::size_t j = 0; j < fs.size(); ++j) {
        out.one_pass[i][j] = estimate_continuous_1pass(sample, fs[j], all);
        out.two_pass[i][j] = estimate_continuous_2pass(weights, fs[j], all, first.threshold(), ell);
      }
    }
  }
  for (auto* table : {&out.one_pass, &out.two_pass}) {
    for (auto& row : *table) {
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = row[j] / truth[j];
    }
  }
  return out;
}

}  // namespace

ErrorGrid run_error_grid(const ExperimentConfig& config,
                         const std::function<void(std::size_t done, std::size_t total)>& progress) {
  config.validate();
  const std::size_t reps = config.repetitions;
  std::vector<RepOutcome> outcomes(reps);
  std::size_t threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = std::min(threads, reps);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        outcomes[rep] = run_repetition(config, rep);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = reps;
        return;
      }
      std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, reps);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Reduce in repetition order so results do not depend on the thread count.
  const std::size_t rows = config.ells.size();
  const std::size_t cols = config.caps.size();
  std::vector<std::vector<ErrorAccumulator>> one(rows, std::vector<ErrorAccumulator>(cols));
  std::vector<std::vector<ErrorAccumulator>> two(rows, std::vector<ErrorAccumulator>(cols));
  double active = 0.0;
  for (const auto& o : outcomes) {
    active += static_cast<double>(o.active_keys);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        one[i][j].add(o.one_pass[i][j], 1.0);
        two[i][j].add(o.two_pass[i][j], 1.0);
      }
    }
  }
  ErrorGrid grid;
  grid.scheme = config.scheme;
  grid.ells = config.ells;
  grid.caps = config.caps;
  grid.mean_active_keys = active / static_cast<double>(reps);
  grid.one_pass.assign(rows, std::vector<ErrorStats>(cols));
  grid.two_pass.assign(rows, std::vector<ErrorStats>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      grid.one_pass[i][j] = one[i][j].stats();
      grid.two_pass[i][j] = two[i][j].stats();
    }
  }
  return grid;
}

DiagonalReport diagonal_dominance_report(const std::vector<std::vector<double>>& values, std::span<const double> ells,
                                         std::span<const double> caps) {
  if (values.size() != ells.size()) throw ConfigError("error table rows do not match the ell list");
  DiagonalReport report;
  for (std::size_t j = 0; j < caps.size(); ++j) {
    std::size_t best = 0;
    std::size_t near = 0;
    for (std::size_t i = 0; i < ells.size(); ++i) {
      if (values[i].size() != caps.size()) throw ConfigError("error table columns do not match the cap list");
      if (values[i][j] < values[best][j]) best = i;
      double d = std::abs(std::log(ells[i]) - std::log(caps[j]));
      double dn = std::abs(std::log(ells[near]) - std::log(caps[j]));
      if (d < dn) near = i;
    }
    bool ok = (best > near ? best - near : near - best) <= 1;
    report.argmin.push_back(best);
    report.nearest.push_back(near);
    report.within_one_step.push_back(ok);
    if (ok) ++report.passed;
  }
  return report;
}

DiagonalReport diagonal_dominance_report(const ErrorTable& table, std::span<const double> ells,
                                         std::span<const double> caps) {
  std::vector<std::vector<double>> values;
  for (const auto& row : table) {
    std::vector<double> v;
    for (const auto& s : row) v.push_back(s.nrmse);
    values.push_back(std::move(v));
  }
  return diagonal_dominance_report(values, ells, caps);
}

TableFormat parse_table_format(std::string_view text) {
  if (text == "tsv") return TableFormat::tsv;
  if (text == "markdown" || text == "md") return TableFormat::markdown;
  throw ConfigError("unknown table format '" + std::string(text) + "' (expected tsv or markdown)");
}

namespace {

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

void write_block(std::ostream& out, const ErrorGrid& grid, const ErrorTable& table, std::string_view pass,
                 std::string_view metric, double ErrorStats::*field, TableFormat format) {
  if (format == TableFormat::markdown) {
    out << "\n**" << metric << ", " << pass << "**\n\n| ell \\ T |";
    for (double c : grid.caps) out << ' ' << format_double(c) << " |";
    out << "\n|---|";
    for (std::size_t j = 0; j < grid.caps.size(); ++j) out << "---|";
    out << '\n';
    for (std::size_t i = 0; i < grid.ells.size(); ++i) {
      out << "| " << format_double(grid.ells[i]) << " |";
      for (const auto& s : table[i]) out << ' ' << fixed3(s.*field) << " |";
      out << '\n';
    }
    return;
  }
  for (std::size_t i = 0; i < grid.ells.size(); ++i) {
    out << pass << '\t' << metric << '\t' << format_double(grid.ells[i]);
    for (const auto& s : table[i]) out << '\t' << format_double(s.*field);
    out << '\n';
  }
}

}  // namespace

void write_error_grid(std::ostream& out, const ErrorGrid& grid, TableFormat format) {
  if (format == TableFormat::tsv) {
    out << "pass\tmetric\tell";
    for (double c : grid.caps) out << "\tT=" << format_double(c);
    out << '\n';
  } else {
    out << "scheme: " << (grid.scheme == Scheme::discrete ? "discrete" : "continuous")
        << ", mean active keys: " << grid.mean_active_keys << '\n';
  }
  write_block(out, grid, grid.one_pass, "1-pass", "nrmse", &ErrorStats::nrmse, format);
  write_block(out, grid, grid.one_pass, "1-pass", "mre", &ErrorStats::mean_relative_error, format);
  write_block(out, grid, grid.two_pass, "2-pass", "nrmse", &ErrorStats::nrmse, format);
  write_block(out, grid, grid.two_pass, "2-pass", "mre", &ErrorStats::mean_relative_error, format);
}

}  // namespace capstream

#include "capstream/discrete_est.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace capstream {

namespace {

constexpr double kPrune = 1e-40;
constexpr double kResidualLimit = 1e-6;
constexpr std::size_t kResidualProbe = 32;

// Compensated sum; the error term comes from a branch-free TwoSum.
template <typename T>
struct CompensatedSum {
  T sum = 0;
  T comp = 0;
  void add(T x) {
    T t = sum + x;
    T back = t - sum;
    comp += (sum - (t - back)) + (x - back);
    sum = t;
  }
  T value() const { return sum + comp; }
};

void check_tau(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must be in (0, 1]");
}

// Forward pass over b_{ij} = a_{ij} (1 - tau)^j, the sub-probability that i
// elements left the key uncounted with j distinct buckets seen. Emits phi_1..
// until `max_len` entries or until the countable mass drops below `tol`.
std::vector<double> phi_forward(DiscreteEll ell, double tau, std::size_t max_len, double tol, bool& converged) {
  check_tau(tau);
  std::vector<double> phi;
  converged = false;
  if (max_len == 0) return phi;
  phi.push_back(tau);

  if (ell.is_infinite()) {
    const double q = 1.0 - tau;
    for (std::size_t i = 1; i < max_len; ++i) {
      double rest = std::pow(q, static_cast<double>(i));
      if (rest < tol) {
        converged = true;
        return phi;
      }
      phi.push_back(rest * tau);
    }
    converged = std::pow(q, static_cast<double>(max_len)) < tol;
    return phi;
  }

  const std::uint64_t l = ell.value();
  const double ld = static_cast<double>(l);
  const double q = 1.0 - tau;
  std::vector<double> b(l + 2, 0.0);
  b[1] = q;
  std::size_t lo = 1;
  std::size_t hi = 1;
  while (true) {
    std::size_t top = std::min<std::size_t>(hi, l - 1);
    CompensatedSum<double> rest;
    CompensatedSum<double> next;
    for (std::size_t j = lo; j <= top; ++j) {
      rest.add(b[j]);
      next.add(b[j] * (ld - static_cast<double>(j)) / ld);
    }
    if (rest.value() < tol) {
      converged = true;
      return phi;
    }
    if (phi.size() == max_len) return phi;
    phi.push_back(tau * next.value());

    std::size_t new_hi = std::min<std::size_t>(hi + 1, l);
    for (std::size_t j = new_hi; j >= lo; --j) {
      double stay = b[j] * static_cast<double>(j) / ld;
      double move = j > lo ? b[j - 1] * q * (ld - static_cast<double>(j) + 1.0) / ld : 0.0;
      b[j] = stay + move;
      if (j == lo) break;
    }
    hi = new_hi;
    while (lo < hi && b[lo] < kPrune) b[lo++] = 0.0;
    while (hi > lo && hi < l && b[hi] < kPrune) b[hi--] = 0.0;
  }
}

template <typename T>
std::vector<T> psi_recurrence(std::span<const double> phi) {
  const std::size_t n = phi.size();
  std::size_t support = n;
  while (support > 1 && phi[support - 1] == 0.0) --support;
  std::vector<T> psi(n, T(0));
  const T inv = T(1) / static_cast<T>(phi[0]);
  psi[0] = inv;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t m_lo = i >= support ? i - support + 1 : 0;
    std::array<CompensatedSum<T>, 4> lanes{};
    std::size_t m = m_lo;
    for (; m + 4 <= i; m += 4) {
      lanes[0].add(static_cast<T>(phi[i - m]) * psi[m]);
      lanes[1].add(static_cast<T>(phi[i - m - 1]) * psi[m + 1]);
      lanes[2].add(static_cast<T>(phi[i - m - 2]) * psi[m + 2]);
      lanes[3].add(static_cast<T>(phi[i - m - 3]) * psi[m + 3]);
    }
    for (; m < i; ++m) lanes[0].add(static_cast<T>(phi[i - m]) * psi[m]);
    CompensatedSum<T> total;
    for (const auto& lane : lanes) {
      total.add(lane.sum);
      total.add(lane.comp);
    }
    psi[i] = -total.value() * inv;
  }
  return psi;
}

long double residual_at(std::span<const double> phi, std::span<const double> psi, std::size_t i) {
  CompensatedSum<long double> s;
  for (std::size_t m = 0; m <= i; ++m) {
    s.add(static_cast<long double>(phi[i - m]) * static_cast<long double>(psi[m]));
  }
  return std::abs(s.value() - (i == 0 ? 1.0L : 0.0L));
}

double probe_residual(std::span<const double> phi, std::span<const double> psi) {
  const std::size_t n = psi.size();
  long double worst = 0;
  for (std::size_t i = 0; i < std::min(n, kResidualProbe); ++i) worst = std::max(worst, residual_at(phi, psi, i));
  for (std::size_t i = n > kResidualProbe ? n - kResidualProbe : 0; i < n; ++i) {
    worst = std::max(worst, residual_at(phi, psi, i));
  }
  return static_cast<double>(worst);
}

}  // namespace

std::vector<std::vector<double>> compute_a_table(std::uint64_t ell, std::size_t max_i) {
  if (ell == 0) throw ConfigError("ell must be >= 1");
  std::vector<std::vector<double>> table;
  if (max_i == 0) return table;
  table.reserve(max_i);
  table.push_back({1.0});
  const double ld = static_cast<double>(ell);
  for (std::size_t i = 2; i <= max_i; ++i) {
    const auto& prev = table.back();
    const std::size_t width = std::min<std::uint64_t>(i, ell);
    std::vector<double> row(width, 0.0);
    for (std::size_t j = 1; j <= width; ++j) {
      double v = 0.0;
      if (j <= prev.size()) v += prev[j - 1] * static_cast<double>(j) / ld;
      if (j >= 2 && j - 1 <= prev.size()) v += prev[j - 2] * (ld - static_cast<double>(j) + 1.0) / ld;
      row[j - 1] = v;
    }
    table.push_back(std::move(row));
  }
  return table;
}

std::size_t a_table_convergence(std::uint64_t ell) {
  if (ell == 0) throw ConfigError("ell must be >= 1");
  if (ell == 1) return 1;
  // The mass still short of all buckets is summed directly; 1 - a_{i,ell}
  // would stall on rounding.
  const double ld = static_cast<double>(ell);
  std::vector<double> row(ell + 1, 0.0);
  row[1] = 1.0;
  for (std::size_t i = 1;; ++i) {
    double rest = 0.0;
    for (std::size_t j = 1; j < ell; ++j) rest += row[j];
    if (rest <= 1e-15) return i;
    for (std::size_t j = std::min<std::size_t>(i + 1, ell); j >= 1; --j) {
      row[j] = row[j] * static_cast<double>(j) / ld + row[j - 1] * (ld - static_cast<double>(j) + 1.0) / ld;
    }
  }
}

std::vector<double> compute_phi(DiscreteEll ell, double tau, std::size_t length) {
  bool converged = false;
  auto phi = phi_forward(ell, tau, length, 0.0, converged);
  phi.resize(length, 0.0);
  return phi;
}

std::size_t truncation_length(DiscreteEll ell, double tau, double tolerance) {
  bool converged = false;
  auto phi = phi_forward(ell, tau, std::numeric_limits<std::size_t>::max(), tolerance, converged);
  return phi.size();
}

std::vector<double> compute_psi(std::span<const double> phi) {
  if (phi.empty() || !(phi[0] > 0.0)) throw ConfigError("degenerate threshold: phi_1 must be positive");
  auto psi = psi_recurrence<double>(phi);
  if (probe_residual(phi, psi) > kResidualLimit) {
    auto wide = psi_recurrence<long double>(phi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = static_cast<double>(wide[i]);
  }
  return psi;
}

double inverse_residual(std::span<const double> phi, std::span<const double> psi) {
  const std::size_t n = std::min(phi.size(), psi.size());
  long double worst = 0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, residual_at(phi, psi, i));
  return static_cast<double>(worst);
}

double beta_discrete(const FrequencyFunction& f, std::span<const double> psi, std::uint64_t i) {
  if (i == 0) return 0.0;
  const std::uint64_t top = std::min<std::uint64_t>(psi.size(), i);
  CompensatedSum<double> s;
  for (std::uint64_t j = 1; j <= top; ++j) s.add(psi[j - 1] * f(static_cast<double>(i - j + 1)));
  return s.value();
}

std::vector<double> beta_discrete(const FrequencyFunction& f, std::span<const double> psi) {
  std::vector<double> out(psi.size());
  for (std::size_t i = 1; i <= psi.size(); ++i) out[i - 1] = beta_discrete(f, psi, i);
  return out;
}

DiscreteCoefficients::DiscreteCoefficients(DiscreteEll ell, double tau, std::uint64_t max_count, bool with_psi)
    : ell_(ell), tau_(tau) {
  const std::size_t limit = max_count == 0 ? std::numeric_limits<std::size_t>::max() : max_count;
  phi_ = phi_forward(ell, tau, limit, kPhiTailTolerance, converged_);
  prefix_.resize(phi_.size());
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    s.add(phi_[i]);
    prefix_[i] = s.value();
  }
  if (with_psi) psi_ = compute_psi(phi_);
}

double DiscreteCoefficients::inclusion_probability(std::uint64_t w) const {
  if (w == 0) return 0.0;
  if (w > prefix_.size() && !converged_) {
    throw std::out_of_range("inclusion probability requested past the computed length");
  }
  return prefix_[std::min<std::uint64_t>(w, prefix_.size()) - 1];
}

double DiscreteCoefficients::beta(const FrequencyFunction& f, std::uint64_t i) const {
  if (i > psi_.size() && !converged_) throw std::out_of_range("beta requested past the computed length");
  if (psi_.empty() && i > 0) throw std::logic_error("coefficients were built without psi");
  return beta_discrete(f, psi_, i);
}

double inclusion_probability_discrete(std::uint64_t w, const DiscreteCoefficients& coefficients) {
  return coefficients.inclusion_probability(w);
}

double estimate_discrete_1pass(const DiscreteSample& sample, const FrequencyFunction& f, const SegmentPredicate& segment) {
  std::uint64_t top = 0;
  for (const auto& e : sample.entries) {
    if (segment(e.key)) top = std::max(top, e.count);
  }
  if (top == 0) return 0.0;
  DiscreteCoefficients coefficients(sample.ell, sample.tau, top);
  return estimate_discrete_1pass(sample, f, segment, coefficients);
}

double estimate_discrete_1pass(const DiscreteSample& sample, const FrequencyFunction& f, const SegmentPredicate& segment,
                               const DiscreteCoefficients& coefficients) {
  if (!(coefficients.ell() == sample.ell) || coefficients.tau() != sample.tau) {
    throw ConfigError("coefficients do not match the sample's ell and tau");
  }
  std::unordered_map<std::uint64_t, double> cache;
  CompensatedSum<double> total;
  for (const auto& e : sample.entries) {
    if (!segment(e.key)) continue;
    auto [it, fresh] = cache.try_emplace(e.count, 0.0);
    if (fresh) it->second = coefficients.beta(f, e.count);
    total.add(it->second);
  }
  return total.value();
}

double estimate_discrete_2pass(std::span<const KeyWeight> weights, const FrequencyFunction& f,
                               const SegmentPredicate& segment, const DiscreteCoefficients& coefficients) {
  CompensatedSum<double> total;
  for (const auto& kw : weights) {
    if (!segment(kw.key)) continue;
    double value = f(kw.weight);
    if (value == 0.0) continue;
    auto w = static_cast<std::uint64_t>(std::llround(kw.weight));
    double p = coefficients.inclusion_probability(w);
    if (!(p > 0.0)) throw std::domain_error("zero inclusion probability for a sampled key");
    total.add(value / p);
  }
  return total.value();
}

}  // namespace capstream

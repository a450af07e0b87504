#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "capstream/discrete.hpp"
#include "capstream/frequency.hpp"
#include "capstream/segment.hpp"
#include "capstream/types.hpp"

namespace capstream {

// Mass of the "not yet counted, still countable" event below which the
// transform is truncated.
inline constexpr double kPhiTailTolerance = 1e-13;

// a_{ij}: probability that i elements of a key hit exactly j distinct buckets.
// table[i-1][j-1] = a_{ij} for 1 <= j <= min(i, ell).
std::vector<std::vector<double>> compute_a_table(std::uint64_t ell, std::size_t max_i);

// First row index i at which 1 - a_{i,ell} <= 1e-15.
std::size_t a_table_convergence(std::uint64_t ell);

// phi_i: probability that the i-th element of a key is the first one counted.
// Returns exactly `length` entries; entries past the truncation point are 0.
std::vector<double> compute_phi(DiscreteEll ell, double tau, std::size_t length);

// Smallest M whose remaining countable mass is below `tolerance`.
std::size_t truncation_length(DiscreteEll ell, double tau, double tolerance = kPhiTailTolerance);

// Inverse of the upper-triangular Toeplitz operator with first row phi.
std::vector<double> compute_psi(std::span<const double> phi);

// max |Y(psi) Y(phi) - I| over the leading block.
double inverse_residual(std::span<const double> phi, std::span<const double> psi);

// beta_i = sum_{j <= min(|psi|, i)} psi_j f(i - j + 1).
double beta_discrete(const FrequencyFunction& f, std::span<const double> psi, std::uint64_t i);
std::vector<double> beta_discrete(const FrequencyFunction& f, std::span<const double> psi);

class DiscreteCoefficients {
 public:
  // Tables covering counts up to `max_count` (0: up to the truncation point).
  DiscreteCoefficients(DiscreteEll ell, double tau, std::uint64_t max_count = 0, bool with_psi = true);

  DiscreteEll ell() const noexcept { return ell_; }
  double tau() const noexcept { return tau_; }
  // Number of phi entries held; equals the truncation point when converged().
  std::size_t length() const noexcept { return phi_.size(); }
  bool converged() const noexcept { return converged_; }

  std::span<const double> phi() const noexcept { return phi_; }
  std::span<const double> psi() const noexcept { return psi_; }

  // Phi(w) = sum_{j <= w} phi_j.
  double inclusion_probability(std::uint64_t w) const;
  double beta(const FrequencyFunction& f, std::uint64_t i) const;

 private:
  DiscreteEll ell_;
  double tau_;
  bool converged_ = false;
  std::vector<double> phi_;
  std::vector<double> prefix_;
  std::vector<double> psi_;
};

double inclusion_probability_discrete(std::uint64_t w, const DiscreteCoefficients& coefficients);

double estimate_discrete_1pass(const DiscreteSample& sample, const FrequencyFunction& f, const SegmentPredicate& segment);
// Same, reusing coefficients built for the sample's (ell, tau).
double estimate_discrete_1pass(const DiscreteSample& sample, const FrequencyFunction& f, const SegmentPredicate& segment,
                               const DiscreteCoefficients& coefficients);

double estimate_discrete_2pass(std::span<const KeyWeight> weights, const FrequencyFunction& f,
                               const SegmentPredicate& segment, const DiscreteCoefficients& coefficients);

}  // namespace capstream

#pragma once

#include <span>

#include "capstream/continuous.hpp"
#include "capstream/frequency.hpp"
#include "capstream/segment.hpp"
#include "capstream/types.hpp"

namespace capstream {

struct ContinuousEstimatorContext {
  double tau;
  double ell;
  FrequencyFunction f;
};

// Phi(w) = (1 - exp(-w max{1/ell, tau})) min{1, tau ell}.
double inclusion_probability_continuous(double w, double tau, double ell);

// beta(c) = f(c) / min{1, ell tau} + f'(c) / tau.
double beta_continuous(double c, const ContinuousEstimatorContext& ctx);

// Sum of beta(c_x) over sampled keys in the segment. A fixed-size sample that
// never filled holds every key with its full weight and is summed exactly.
double estimate_continuous_1pass(const ContinuousSample& sample, const FrequencyFunction& f,
                                 const SegmentPredicate& segment);

// Inverse-probability estimate over exact weights of the sampled keys.
// tau = kUnboundedTau means every key was sampled.
double estimate_continuous_2pass(std::span<const KeyWeight> weights, const FrequencyFunction& f,
                                 const SegmentPredicate& segment, double tau, double ell);

}  // namespace capstream

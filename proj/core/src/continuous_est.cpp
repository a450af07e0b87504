#include "capstream/continuous_est.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capstream {

namespace {

void check_context(double tau, double ell) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive and finite");
  if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("ell must be positive and finite");
}

void require_derivative(const FrequencyFunction& f) {
  if (!f.has_derivative()) {
    throw ConfigError("frequency function '" + f.spec() +
                      "' has no derivative rule; the continuous estimator needs one (use cap:1 for distinct)");
  }
}

}  // namespace

double inclusion_probability_continuous(double w, double tau, double ell) {
  check_context(tau, ell);
  if (!(w > 0.0)) return 0.0;
  return -std::expm1(-w * std::max(1.0 / ell, tau)) * std::min(1.0, tau * ell);
}

double beta_continuous(double c, const ContinuousEstimatorContext& ctx) {
  check_context(ctx.tau, ctx.ell);
  if (!(c > 0.0)) return 0.0;
  return ctx.f(c) / std::min(1.0, ctx.ell * ctx.tau) + ctx.f.derivative(c) / ctx.tau;
}

double estimate_continuous_1pass(const ContinuousSample& sample, const FrequencyFunction& f,
                                 const SegmentPredicate& segment) {
  double total = 0.0;
  if (!sample.bounded()) {
    for (const auto& e : sample.entries) {
      if (segment(e.key)) total += f(e.count);
    }
    return total;
  }
  require_derivative(f);
  const ContinuousEstimatorContext ctx{sample.tau, sample.ell, f};
  for (const auto& e : sample.entries) {
    if (segment(e.key)) total += beta_continuous(e.count, ctx);
  }
  return total;
}

double estimate_continuous_2pass(std::span<const KeyWeight> weights, const FrequencyFunction& f,
                                 const SegmentPredicate& segment, double tau, double ell) {
  const bool bounded = tau != kUnboundedTau;
  double total = 0.0;
  for (const auto& kw : weights) {
    if (!segment(kw.key)) continue;
    double value = f(kw.weight);
    if (value == 0.0) continue;
    if (!bounded) {
      total += value;
      continue;
    }
    double p = inclusion_probability_continuous(kw.weight, tau, ell);
    if (!(p > 0.0)) throw std::domain_error("zero inclusion probability for a sampled key");
    total += value / p;
  }
  return total;
}

}  // namespace capstream

#include "capstream/twopass.hpp"

#include <algorithm>
#include <cmath>

#include "capstream/continuous_est.hpp"
#include "capstream/discrete_est.hpp"

namespace capstream {

PassOneConfig PassOneConfig::discrete_fixed_size(DiscreteEll ell, std::size_t k, Seeds seeds) {
  PassOneConfig c{Scheme::discrete, ell.is_infinite() ? kUnboundedTau : static_cast<double>(ell.value()),
                  SampleMode::fixed_size, 1.0, k, seeds};
  c.validate();
  return c;
}

PassOneConfig PassOneConfig::discrete_fixed_threshold(DiscreteEll ell, double tau, Seeds seeds) {
  PassOneConfig c{Scheme::discrete, ell.is_infinite() ? kUnboundedTau : static_cast<double>(ell.value()),
                  SampleMode::fixed_threshold, tau, 0, seeds};
  c.validate();
  return c;
}

PassOneConfig PassOneConfig::continuous_fixed_size(double ell, std::size_t k, Seeds seeds) {
  PassOneConfig c{Scheme::continuous, ell, SampleMode::fixed_size, kUnboundedTau, k, seeds};
  c.validate();
  return c;
}

PassOneConfig PassOneConfig::continuous_fixed_threshold(double ell, double tau, Seeds seeds) {
  PassOneConfig c{Scheme::continuous, ell, SampleMode::fixed_threshold, tau, 0, seeds};
  c.validate();
  return c;
}

DiscreteEll PassOneConfig::discrete_ell() const {
  if (std::isinf(ell)) return DiscreteEll::infinite();
  return DiscreteEll::finite(static_cast<std::uint64_t>(std::llround(ell)));
}

double PassOneConfig::supremum() const noexcept { return scheme == Scheme::discrete ? 1.0 : kUnboundedTau; }

void PassOneConfig::validate() const {
  if (scheme == Scheme::discrete) {
    if (!std::isinf(ell) && (!(ell >= 1.0) || ell != std::floor(ell))) {
      throw ConfigError("discrete ell must be a positive integer or infinity");
    }
    if (mode == SampleMode::fixed_threshold && !(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must be in (0, 1]");
  } else {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("ell must be positive and finite");
    if (mode == SampleMode::fixed_threshold && (!(tau > 0.0) || !std::isfinite(tau))) {
      throw ConfigError("tau must be positive and finite");
    }
  }
  if (mode == SampleMode::fixed_size && k == 0) throw ConfigError("k must be >= 1");
}

namespace {

Seeds scorer_seeds(const PassOneConfig& c) {
  c.validate();
  return c.seeds;
}

}  // namespace

PassOneSummary::PassOneSummary(PassOneConfig config)
    : config_(config),
      bound_(config.mode == SampleMode::fixed_threshold ? config.tau : config.supremum()),
      discrete_scorer_(config.scheme == Scheme::discrete ? config.discrete_ell() : DiscreteEll::infinite(),
                       scorer_seeds(config)),
      continuous_scorer_(config.scheme == Scheme::continuous ? config.ell : 1.0, config.seeds) {}

double PassOneSummary::element_score(const Element& element, std::uint64_t seq) const {
  if (config_.scheme == Scheme::discrete) {
    check_unit_weight(element.weight);
    return discrete_scorer_.element(element.key, seq);
  }
  check_weight(element.weight);
  return continuous_scorer_.element(element, seq);
}

void PassOneSummary::add(const Element& element, std::uint64_t seq) { offer(element.key, element_score(element, seq)); }

void PassOneSummary::offer(KeyId key, double seed) {
  auto it = seeds_.find(key);
  if (it != seeds_.end()) {
    if (!(seed < it->second)) return;
    if (config_.mode == SampleMode::fixed_size) {
      order_.erase({it->second, key});
      order_.emplace(seed, key);
    }
    it->second = seed;
    return;
  }
  if (!(seed < bound_)) return;
  seeds_.emplace(key, seed);
  if (config_.mode == SampleMode::fixed_threshold) return;
  order_.emplace(seed, key);
  if (seeds_.size() > config_.k) {
    auto last = std::prev(order_.end());
    bound_ = last->first;
    seeds_.erase(last->second);
    order_.erase(last);
  }
}

std::optional<double> PassOneSummary::seed(KeyId key) const {
  auto it = seeds_.find(key);
  if (it == seeds_.end()) return std::nullopt;
  return it->second;
}

double PassOneSummary::max_seed() const noexcept {
  if (seeds_.empty()) return config_.supremum();
  if (config_.mode == SampleMode::fixed_size) return order_.rbegin()->first;
  double m = 0.0;
  for (const auto& kv : seeds_) m = std::max(m, kv.second);
  return m;
}

std::vector<std::pair<KeyId, double>> PassOneSummary::entries() const {
  std::vector<std::pair<KeyId, double>> out(seeds_.begin(), seeds_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<KeyId> PassOneSummary::keys() const {
  std::vector<KeyId> out;
  out.reserve(seeds_.size());
  for (const auto& kv : seeds_) out.push_back(kv.first);
  std::sort(out.begin(), out.end());
  return out;
}

void PassOneSummary::prune_to_bound() {
  for (auto it = seeds_.begin(); it != seeds_.end();) {
    if (it->second >= bound_) {
      order_.erase({it->second, it->first});
      it = seeds_.erase(it);
    } else {
      ++it;
    }
  }
}

PassOneSummary PassOneSummary::restore(PassOneConfig config, double threshold,
                                       std::span<const std::pair<KeyId, double>> entries) {
  PassOneSummary s(config);
  if (config.mode == SampleMode::fixed_size) {
    if (entries.size() > config.k) throw InputError("pass-one summary holds more than k keys");
    s.bound_ = threshold;
  }
  for (const auto& [key, seed] : entries) s.offer(key, seed);
  return s;
}

bool operator==(const PassOneSummary& a, const PassOneSummary& b) {
  if (!(a.config_ == b.config_) || a.bound_ != b.bound_ || a.seeds_.size() != b.seeds_.size()) return false;
  for (const auto& [key, seed] : a.seeds_) {
    auto it = b.seeds_.find(key);
    if (it == b.seeds_.end() || it->second != seed) return false;
  }
  return true;
}

PassOneSummary merge_pass_one(const PassOneSummary& a, const PassOneSummary& b) {
  if (!(a.config_ == b.config_)) throw ConfigError("cannot merge pass-one summaries with different parameters");
  PassOneSummary out = a;
  for (const auto& [key, seed] : b.entries()) out.offer(key, seed);
  if (b.bound_ < out.bound_) {
    out.bound_ = b.bound_;
    out.prune_to_bound();
  }
  return out;
}

PassOneSummary pass_one(std::span<const Element> stream, const PassOneConfig& config, std::uint64_t first_seq) {
  PassOneSummary s(config);
  for (std::size_t i = 0; i < stream.size(); ++i) s.add(stream[i], first_seq + i);
  return s;
}

PassTwoSummary::PassTwoSummary(std::span<const KeyId> keys) {
  weights_.reserve(keys.size());
  for (KeyId k : keys) weights_.emplace(k, 0.0);
}

void PassTwoSummary::add(const Element& element) {
  auto it = weights_.find(element.key);
  if (it == weights_.end()) return;
  check_weight(element.weight);
  it->second += element.weight;
}

double PassTwoSummary::weight(KeyId key) const {
  auto it = weights_.find(key);
  return it == weights_.end() ? 0.0 : it->second;
}

std::vector<KeyWeight> PassTwoSummary::weights() const {
  std::vector<KeyWeight> out;
  out.reserve(weights_.size());
  for (const auto& [key, w] : weights_) out.push_back({key, w});
  std::sort(out.begin(), out.end(), [](const KeyWeight& x, const KeyWeight& y) { return x.key < y.key; });
  return out;
}

PassTwoSummary PassTwoSummary::from_weights(std::span<const KeyWeight> weights) {
  PassTwoSummary s;
  for (const auto& kw : weights) s.weights_[kw.key] += kw.weight;
  return s;
}

PassTwoSummary merge_pass_two(const PassTwoSummary& a, const PassTwoSummary& b) {
  PassTwoSummary out = a;
  for (const auto& [key, w] : b.weights_) out.weights_[key] += w;
  return out;
}

PassTwoSummary pass_two(std::span<const Element> stream, std::span<const KeyId> keys) {
  PassTwoSummary s(keys);
  for (const auto& e : stream) s.add(e);
  return s;
}

double estimate_two_pass(const PassOneSummary& first, const PassTwoSummary& second, const FrequencyFunction& f,
                         const SegmentPredicate& segment) {
  const auto& config = first.config();
  std::vector<KeyWeight> weights;
  weights.reserve(first.size());
  for (KeyId key : first.keys()) weights.push_back({key, second.weight(key)});
  if (config.scheme == Scheme::continuous) {
    return estimate_continuous_2pass(weights, f, segment, first.threshold(), config.ell);
  }
  std::uint64_t top = 0;
  for (const auto& kw : weights) {
    if (segment(kw.key)) top = std::max<std::uint64_t>(top, static_cast<std::uint64_t>(std::llround(kw.weight)));
  }
  if (top == 0) return 0.0;
  DiscreteCoefficients coefficients(config.discrete_ell(), first.threshold(), top, false);
  return estimate_discrete_2pass(weights, f, segment, coefficients);
}

}  // namespace capstream

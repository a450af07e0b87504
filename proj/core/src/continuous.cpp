#include "capstream/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace capstream {

ContinuousConfig ContinuousConfig::fixed_threshold(double ell, double tau) {
  ContinuousConfig c{ell, SampleMode::fixed_threshold, tau, 0, 0.0};
  c.validate();
  return c;
}

ContinuousConfig ContinuousConfig::fixed_size(double ell, std::size_t k, double batch_fraction) {
  ContinuousConfig c{ell, SampleMode::fixed_size, kUnboundedTau, k, batch_fraction};
  c.validate();
  return c;
}

void ContinuousConfig::validate() const {
  if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("ell must be positive and finite");
  if (mode == SampleMode::fixed_threshold && (!(tau > 0.0) || !std::isfinite(tau))) {
    throw ConfigError("tau must be positive and finite");
  }
  if (mode == SampleMode::fixed_size && k == 0) throw ConfigError("k must be >= 1");
  if (!(batch_fraction >= 0.0 && batch_fraction < 1.0)) throw ConfigError("batch fraction must be in [0, 1)");
}

const ContinuousSampleEntry* ContinuousSample::find(KeyId key) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const ContinuousSampleEntry& e, KeyId k) { return e.key < k; });
  return it != entries.end() && it->key == key ? &*it : nullptr;
}

namespace {

void sort_entries(std::vector<ContinuousSampleEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
}

}  // namespace

ContinuousThresholdSampler::ContinuousThresholdSampler(double ell, double tau, Seeds seeds)
    : scorer_(ell, seeds), tau_(tau), rate_(std::max(tau, 1.0 / ell)), admit_all_bases_(tau * ell >= 1.0) {
  ContinuousConfig::fixed_threshold(ell, tau);
}

void ContinuousThresholdSampler::add(const Element& element, std::uint64_t seq) {
  check_weight(element.weight);
  auto it = cache_.find(element.key);
  if (it != cache_.end()) {
    it->second += element.weight;
    return;
  }
  double delta = exponential_from_uniform(scorer_.uniform(element.key, seq), rate_);
  if (delta < element.weight && (admit_all_bases_ || scorer_.key_base(element.key) < tau_)) {
    cache_.emplace(element.key, element.weight - delta);
  }
}

ContinuousSample ContinuousThresholdSampler::sample() const {
  ContinuousSample out{scorer_.ell(), SampleMode::fixed_threshold, tau_, 0, 0, {}};
  out.entries.reserve(cache_.size());
  for (const auto& [key, count] : cache_) out.entries.push_back({key, count});
  sort_entries(out.entries);
  return out;
}

EvictionOutcome evict_batch(std::vector<ContinuousSampleEntry>& cache, double tau, double ell, std::size_t evict_count,
                            const ContinuousScorer& scorer, std::uint64_t pass_index) {
  const std::size_t n = cache.size();
  if (evict_count == 0 || evict_count > n) throw std::invalid_argument("eviction count out of range");
  const double inv_ell = 1.0 / ell;
  const bool bounded = tau != kUnboundedTau;

  std::vector<double> rank(n);
  std::vector<double> u(n);
  std::vector<double> e(n);
  const bool simulate = !bounded || tau * ell > 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const KeyId key = cache[i].key;
    if (simulate) {
      u[i] = scorer.random().uniform(Purpose::eviction, key, pass_index, 0);
      e[i] = -std::log1p(-scorer.random().uniform(Purpose::eviction, key, pass_index, 1));
      double z = e[i] / cache[i].count;
      if (bounded) z = std::min(tau * u[i], z);
      if (z <= inv_ell) z = scorer.key_base(key);
      rank[i] = z;
    } else {
      rank[i] = scorer.key_base(key);
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto larger = [&](std::size_t a, std::size_t b) {
    if (rank[a] != rank[b]) return rank[a] > rank[b];
    return cache[a].key > cache[b].key;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(evict_count - 1), order.end(), larger);
  std::vector<char> evicted(n, 0);
  for (std::size_t i = 0; i < evict_count; ++i) evicted[order[i]] = 1;

  EvictionOutcome out;
  out.tau = rank[order[evict_count - 1]];
  if (simulate) {
    const double tau_star = out.tau;
    const double bar = bounded ? std::max(tau_star, inv_ell) / tau : 0.0;
    const double rate = std::max(inv_ell, tau_star);
    for (std::size_t i = 0; i < n; ++i) {
      if (evicted[i] || !(u[i] > bar)) continue;
      cache[i].count -= e[i] / rate;
      if (!(cache[i].count > 0.0)) throw std::logic_error("eviction left a non-positive counter");
    }
  }

  std::vector<ContinuousSampleEntry> kept;
  kept.reserve(n - evict_count);
  for (std::size_t i = 0; i < n; ++i) {
    if (evicted[i]) {
      out.evicted.push_back(cache[i].key);
    } else {
      kept.push_back(cache[i]);
    }
  }
  cache.swap(kept);
  return out;
}

ContinuousSizeSampler::ContinuousSizeSampler(double ell, std::size_t k, Seeds seeds, double batch_fraction)
    : scorer_(ell, seeds), k_(k), batch_fraction_(batch_fraction) {
  ContinuousConfig::fixed_size(ell, k, batch_fraction);
  batch_ = batch_fraction > 0.0
               ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(batch_fraction * static_cast<double>(k))))
               : 1;
  cache_.reserve(k + 1);
  index_.reserve(k + 1);
}

void ContinuousSizeSampler::add(const Element& element, std::uint64_t seq) {
  check_weight(element.weight);
  auto it = index_.find(element.key);
  if (it != index_.end()) {
    cache_[it->second].count += element.weight;
    return;
  }
  const bool bounded = tau_ != kUnboundedTau;
  const double ell = scorer_.ell();
  double delta = 0.0;
  if (bounded) delta = exponential_from_uniform(scorer_.uniform(element.key, seq), std::max(1.0 / ell, tau_));
  if (!(delta < element.weight)) return;
  if (bounded && !(tau_ * ell > 1.0) && !(scorer_.key_base(element.key) < tau_)) return;
  index_.emplace(element.key, cache_.size());
  cache_.push_back({element.key, element.weight - delta});
  if (cache_.size() == k_ + 1) evict();
}

void ContinuousSizeSampler::evict() {
  auto outcome = evict_batch(cache_, tau_, scorer_.ell(), batch_, scorer_, passes_);
  ++passes_;
  tau_ = outcome.tau;
  index_.clear();
  for (std::size_t i = 0; i < cache_.size(); ++i) index_.emplace(cache_[i].key, i);
}

ContinuousSample ContinuousSizeSampler::sample() const {
  ContinuousSample out{scorer_.ell(), SampleMode::fixed_size, tau_, k_, passes_, cache_};
  sort_entries(out.entries);
  return out;
}

ContinuousSample sample_fixed_tau_continuous(std::span<const Element> stream, double ell, double tau, Seeds seeds) {
  ContinuousThresholdSampler sampler(ell, tau, seeds);
  for (std::size_t i = 0; i < stream.size(); ++i) sampler.add(stream[i], i);
  return sampler.sample();
}

ContinuousSample sample_fixed_k_continuous(std::span<const Element> stream, double ell, std::size_t k, Seeds seeds,
                                           double batch_fraction) {
  ContinuousSizeSampler sampler(ell, k, seeds, batch_fraction);
  for (std::size_t i = 0; i < stream.size(); ++i) sampler.add(stream[i], i);
  return sampler.sample();
}

ContinuousSample sample_continuous(std::span<const Element> stream, const ContinuousConfig& config, Seeds seeds) {
  config.validate();
  if (config.mode == SampleMode::fixed_threshold) return sample_fixed_tau_continuous(stream, config.ell, config.tau, seeds);
  return sample_fixed_k_continuous(stream, config.ell, config.k, seeds, config.batch_fraction);
}

}  // namespace capstream

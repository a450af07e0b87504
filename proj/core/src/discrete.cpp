#include "capstream/discrete.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace capstream {

DiscreteEll DiscreteEll::finite(std::uint64_t ell) {
  if (ell == 0) throw ConfigError("ell must be >= 1");
  return DiscreteEll(ell);
}

DiscreteEll DiscreteEll::parse(std::string_view text) {
  if (text == "inf" || text == "infinity") return infinite();
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0) {
    throw ConfigError("discrete ell must be a positive integer or 'inf', got '" + std::string(text) + "'");
  }
  return DiscreteEll(v);
}

std::uint64_t DiscreteEll::value() const {
  if (is_infinite()) throw ConfigError("ell is infinite");
  return value_;
}

std::string DiscreteEll::to_string() const { return is_infinite() ? "inf" : std::to_string(value_); }

DiscreteConfig DiscreteConfig::fixed_threshold(DiscreteEll ell, double tau) {
  DiscreteConfig c{ell, SampleMode::fixed_threshold, tau, 0};
  c.validate();
  return c;
}

DiscreteConfig DiscreteConfig::fixed_size(DiscreteEll ell, std::size_t k) {
  DiscreteConfig c{ell, SampleMode::fixed_size, 1.0, k};
  c.validate();
  return c;
}

void DiscreteConfig::validate() const {
  if (mode == SampleMode::fixed_threshold && !(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must be in (0, 1]");
  if (mode == SampleMode::fixed_size && k == 0) throw ConfigError("k must be >= 1");
}

const DiscreteSampleEntry* DiscreteSample::find(KeyId key) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const DiscreteSampleEntry& e, KeyId k) { return e.key < k; });
  return it != entries.end() && it->key == key ? &*it : nullptr;
}

std::uint64_t DiscreteSample::max_count() const {
  std::uint64_t m = 0;
  for (const auto& e : entries) m = std::max(m, e.count);
  return m;
}

namespace {

void sort_entries(std::vector<DiscreteSampleEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
}

}  // namespace

DiscreteThresholdSampler::DiscreteThresholdSampler(DiscreteEll ell, double tau, Seeds seeds)
    : scorer_(ell, seeds), tau_(tau) {
  DiscreteConfig::fixed_threshold(ell, tau);
}

void DiscreteThresholdSampler::add(const Element& element, std::uint64_t seq) {
  check_unit_weight(element.weight);
  auto it = cache_.find(element.key);
  if (it != cache_.end()) {
    ++it->second.count;
    return;
  }
  double s = scorer_.element(element.key, seq);
  if (s < tau_) cache_.emplace(element.key, DiscreteSampleEntry{element.key, 1, s});
}

DiscreteSample DiscreteThresholdSampler::sample() const {
  DiscreteSample out{scorer_.ell(), SampleMode::fixed_threshold, tau_, 0, {}};
  out.entries.reserve(cache_.size());
  for (const auto& [key, entry] : cache_) out.entries.push_back(entry);
  sort_entries(out.entries);
  return out;
}

DiscreteSizeSampler::DiscreteSizeSampler(DiscreteEll ell, std::size_t k, Seeds seeds) : scorer_(ell, seeds), k_(k) {
  DiscreteConfig::fixed_size(ell, k);
  cache_.reserve(k + 1);
}

void DiscreteSizeSampler::add(const Element& element, std::uint64_t seq) {
  check_unit_weight(element.weight);
  auto it = cache_.find(element.key);
  if (it != cache_.end()) {
    ++it->second.count;
    return;
  }
  double s = scorer_.element(element.key, seq);
  if (!(s < tau_)) return;
  cache_.emplace(element.key, Slot{1, s});
  heap_.emplace(s, element.key);
  while (cache_.size() > k_) evict_one();
}

void DiscreteSizeSampler::evict_one() {
  auto [seed, key] = heap_.top();
  heap_.pop();
  tau_ = seed;
  auto it = cache_.find(key);
  Slot& slot = it->second;
  while (slot.count > 0 && slot.seed >= tau_) {
    --slot.count;
    if (slot.count == 0) break;
    slot.seed = scorer_.rescore(key, draws_++);
  }
  if (slot.count == 0) {
    cache_.erase(it);
  } else {
    heap_.emplace(slot.seed, key);
  }
}

DiscreteSample DiscreteSizeSampler::sample() const {
  DiscreteSample out{scorer_.ell(), SampleMode::fixed_size, tau_, k_, {}};
  out.entries.reserve(cache_.size());
  for (const auto& [key, slot] : cache_) out.entries.push_back({key, slot.count, slot.seed});
  sort_entries(out.entries);
  return out;
}

DiscreteSample sample_fixed_tau_discrete(std::span<const Element> stream, DiscreteEll ell, double tau, Seeds seeds) {
  DiscreteThresholdSampler sampler(ell, tau, seeds);
  for (std::size_t i = 0; i < stream.size(); ++i) sampler.add(stream[i], i);
  return sampler.sample();
}

DiscreteSample sample_fixed_k_discrete(std::span<const Element> stream, DiscreteEll ell, std::size_t k, Seeds seeds) {
  DiscreteSizeSampler sampler(ell, k, seeds);
  for (std::size_t i = 0; i < stream.size(); ++i) sampler.add(stream[i], i);
  return sampler.sample();
}

DiscreteSample sample_discrete(std::span<const Element> stream, const DiscreteConfig& config, Seeds seeds) {
  config.validate();
  if (config.mode == SampleMode::fixed_threshold) return sample_fixed_tau_discrete(stream, config.ell, config.tau, seeds);
  return sample_fixed_k_discrete(stream, config.ell, config.k, seeds);
}

}  // namespace capstream

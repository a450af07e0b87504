#include "capstream/multiobjective.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "capstream/continuous.hpp"

namespace capstream {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Total order on (y, key) and on (h, key): ties on a coordinate fall back to
// the key identifier so dominance is a strict partial order.
bool dominates(const Staircase::Point& a, const Staircase::Point& b) {
  bool y_less = a.y < b.y || (a.y == b.y && a.key < b.key);
  bool h_less = a.h < b.h || (a.h == b.h && a.key < b.key);
  return y_less && h_less;
}

}  // namespace

CapSet CapSet::grid(std::vector<double> ells) {
  if (ells.empty()) throw ConfigError("the set of cap parameters is empty");
  for (double l : ells) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("cap parameters must be positive and finite");
  }
  std::sort(ells.begin(), ells.end());
  ells.erase(std::unique(ells.begin(), ells.end()), ells.end());
  CapSet c;
  c.interval_ = false;
  c.ells_ = std::move(ells);
  return c;
}

CapSet CapSet::geometric(double base, int lo, int hi) {
  if (hi < lo) throw ConfigError("empty geometric grid");
  std::vector<double> ells;
  for (int i = lo; i <= hi; ++i) ells.push_back(std::ldexp(base, i));
  return grid(std::move(ells));
}

CapSet CapSet::parse(std::string_view text) {
  if (text == "interval" || text == "all") return interval();
  std::vector<double> ells;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("bad cap parameter '" + std::string(item) + "'");
    }
    ells.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return grid(std::move(ells));
}

std::string CapSet::spec() const {
  if (interval_) return "interval";
  std::string out;
  for (std::size_t i = 0; i < ells_.size(); ++i) {
    if (i) out += ',';
    out += shortest(ells_[i]);
  }
  return out;
}

double rectangle_union_probability(double w, std::span<const InclusionRect> rects) {
  if (rects.empty()) throw ConfigError("inclusion probability needs at least one cap parameter");
  std::vector<InclusionRect> sorted(rects.begin(), rects.end());
  std::sort(sorted.begin(), sorted.end(), [](const InclusionRect& a, const InclusionRect& b) { return a.y > b.y; });
  auto survival = [w](double y) { return std::isinf(y) ? 0.0 : std::exp(-w * y); };
  double total = 0.0;
  double h_run = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    h_run = std::max(h_run, std::min(1.0, sorted[i].h));
    double lower = i + 1 < sorted.size() ? sorted[i + 1].y : 0.0;
    // F(Y_i) - F(Y_next) with F(y) = 1 - exp(-w y).
    total += (survival(lower) - survival(sorted[i].y)) * h_run;
  }
  return total;
}

InclusionRect threshold_rectangle(const CapThreshold& t) {
  if (t.tau == kUnboundedTau) return {kUnboundedTau, 1.0};
  return {std::max(t.tau, 1.0 / t.ell), std::min(1.0, t.ell * t.tau)};
}

double mo_inclusion_probability(double w, std::span<const CapThreshold> thresholds) {
  std::vector<InclusionRect> rects;
  rects.reserve(thresholds.size());
  for (const auto& t : thresholds) rects.push_back(threshold_rectangle(t));
  return rectangle_union_probability(w, rects);
}

void Staircase::offer(KeyId key, double h, double y) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    Point& p = points_[it->second];
    if (!(y < p.y)) return;
    const Point before = p;
    const Point after{key, h, y, 0};
    std::size_t count = 0;
    for (auto& q : points_) {
      if (q.key == key) continue;
      if (dominates(after, q) && !dominates(before, q)) ++q.dominators;
      if (dominates(q, after)) ++count;
    }
    p.y = y;
    p.dominators = count;
    drop_saturated();
    return;
  }
  const Point fresh{key, h, y, 0};
  std::size_t count = 0;
  for (const auto& q : points_) {
    if (dominates(q, fresh) && ++count >= depth_) return;
  }
  for (auto& q : points_) {
    if (dominates(fresh, q)) ++q.dominators;
  }
  index_.emplace(key, points_.size());
  points_.push_back({key, h, y, count});
  drop_saturated();
}

void Staircase::drop_saturated() {
  // A point dominated by a dropped point is itself saturated, so the
  // remaining counts stay exact.
  bool any = false;
  for (const auto& q : points_) any = any || q.dominators >= depth_;
  if (!any) return;
  std::erase_if(points_, [this](const Point& q) { return q.dominators >= depth_; });
  index_.clear();
  for (std::size_t i = 0; i < points_.size(); ++i) index_.emplace(points_[i].key, i);
}

void Staircase::merge(const Staircase& other) {
  if (other.depth_ != depth_) throw ConfigError("cannot merge staircases of different depth");
  for (const auto& p : other.points_) offer(p.key, p.h, p.y);
}

MultiObjectivePassOne::MultiObjectivePassOne(std::size_t k, CapSet caps, Seeds seeds)
    : k_(k), caps_(std::move(caps)), seeds_(seeds), hasher_(seeds.hash), random_(seeds.master), staircase_(k + 1) {
  if (k == 0) throw ConfigError("k must be >= 1");
  if (!caps_.is_interval()) {
    for (double ell : caps_.values()) grid_.emplace_back(PassOneConfig::continuous_fixed_size(ell, k, seeds));
  }
}

void MultiObjectivePassOne::add(const Element& element, std::uint64_t seq) {
  check_weight(element.weight);
  const double v = exponential_from_uniform(random_.uniform(Purpose::element_score, element.key, seq), element.weight);
  const double h = hasher_.unit(element.key);
  if (caps_.is_interval()) {
    staircase_.offer(element.key, h, v);
    return;
  }
  const auto& ells = caps_.values();
  for (std::size_t i = 0; i < ells.size(); ++i) {
    grid_[i].offer(element.key, score_element_continuous(v, h / ells[i], ells[i]));
  }
}

void MultiObjectivePassOne::merge(const MultiObjectivePassOne& other) {
  if (other.k_ != k_ || !(other.caps_ == caps_) || !(other.seeds_ == seeds_)) {
    throw ConfigError("cannot merge multi-objective summaries with different parameters");
  }
  if (caps_.is_interval()) {
    staircase_.merge(other.staircase_);
    return;
  }
  for (std::size_t i = 0; i < grid_.size(); ++i) grid_[i] = merge_pass_one(grid_[i], other.grid_[i]);
}

std::vector<KeyId> MultiObjectivePassOne::sample_keys() const {
  std::vector<KeyId> out;
  if (caps_.is_interval()) {
    for (const auto& p : staircase_.points()) {
      if (p.dominators < k_) out.push_back(p.key);
    }
  } else {
    for (const auto& s : grid_) {
      auto keys = s.keys();
      out.insert(out.end(), keys.begin(), keys.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<KeyId> MultiObjectivePassOne::sample_keys_at(std::size_t index) const {
  if (caps_.is_interval()) throw ConfigError("per-parameter samples exist only for a grid");
  return grid_.at(index).keys();
}

std::vector<double> MultiObjectivePassOne::thresholds() const {
  std::vector<double> out;
  for (const auto& s : grid_) out.push_back(s.threshold());
  return out;
}

std::vector<InclusionRect> MultiObjectivePassOne::inclusion_rectangles(KeyId key) const {
  std::vector<InclusionRect> rects;
  if (!caps_.is_interval()) {
    const auto& ells = caps_.values();
    for (std::size_t i = 0; i < ells.size(); ++i) {
      const auto& s = grid_[i];
      double tau = kUnboundedTau;
      if (s.size() == k_) tau = s.contains(key) ? s.threshold() : s.max_seed();
      rects.push_back(threshold_rectangle({ells[i], tau}));
    }
    return rects;
  }

  // Others sorted by y. For y between the i-th and (i+1)-st of them, the key
  // needs h below the k-th smallest h among the first i (or any h if i < k).
  std::vector<const Staircase::Point*> others;
  others.reserve(staircase_.size());
  for (const auto& p : staircase_.points()) {
    if (p.key != key) others.push_back(&p);
  }
  std::sort(others.begin(), others.end(), [](const auto* a, const auto* b) {
    return a->y < b->y || (a->y == b->y && a->key < b->key);
  });
  const std::size_t r = others.size();
  if (r < k_) {
    rects.push_back({kUnboundedTau, 1.0});
    return rects;
  }
  rects.push_back({others[k_ - 1]->y, 1.0});
  std::priority_queue<double> smallest;  // max-heap of the k smallest h
  for (std::size_t i = 1; i <= r; ++i) {
    double h = others[i - 1]->h;
    if (smallest.size() < k_) {
      smallest.push(h);
    } else if (h < smallest.top()) {
      smallest.pop();
      smallest.push(h);
    }
    if (i >= k_) rects.push_back({i < r ? others[i]->y : kUnboundedTau, smallest.top()});
  }
  return rects;
}

std::size_t MultiObjectivePassOne::state_size() const {
  if (caps_.is_interval()) return staircase_.size();
  std::size_t n = 0;
  for (const auto& s : grid_) n += s.size();
  return n;
}

const MultiSampleEntry* MultiSample::find(KeyId key) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const MultiSampleEntry& e, KeyId k) { return e.key < k; });
  return it != entries.end() && it->key == key ? &*it : nullptr;
}

MultiSample finish_multi_sample(const MultiObjectivePassOne& first, const PassTwoSummary& second) {
  MultiSample out;
  out.k = first.k();
  out.caps = first.caps();
  out.thresholds = first.thresholds();
  for (KeyId key : first.sample_keys()) {
    double w = second.weight(key);
    auto rects = first.inclusion_rectangles(key);
    double phi = rectangle_union_probability(w, rects);
    if (!(phi > 0.0)) throw std::logic_error("sampled key has zero inclusion probability");
    out.entries.push_back({key, w, phi});
  }
  return out;
}

MultiSample build_multi_sample(std::span<const Element> stream, std::size_t k, const CapSet& caps, Seeds seeds) {
  MultiObjectivePassOne first(k, caps, seeds);
  for (std::size_t i = 0; i < stream.size(); ++i) first.add(stream[i], i);
  auto keys = first.sample_keys();
  return finish_multi_sample(first, pass_two(stream, keys));
}

double estimate_multi(const MultiSample& sample, const FrequencyFunction& f, const SegmentPredicate& segment) {
  double total = 0.0;
  for (const auto& e : sample.entries) {
    if (!segment(e.key)) continue;
    double value = f(e.weight);
    if (value == 0.0) continue;
    total += value / e.phi;
  }
  return total;
}

}  // namespace capstream

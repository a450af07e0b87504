#include "capstream/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace capstream {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("malformed number '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("malformed integer '" + std::string(text) + "'");
  }
  return v;
}

struct Header {
  std::string tag;
  std::map<std::string, std::string, std::less<>> fields;

  const std::string& get(std::string_view name) const {
    auto it = fields.find(name);
    if (it == fields.end()) throw InputError("header " + tag + " lacks field '" + std::string(name) + "'");
    return it->second;
  }
  bool has(std::string_view name) const { return fields.find(name) != fields.end(); }
};

Header parse_header(const std::string& line) {
  std::istringstream in(line);
  Header h;
  in >> h.tag;
  std::string token;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos) throw InputError("malformed header field '" + token + "'");
    h.fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return h;
}

// Splits "a\tb\tc" into fields.
std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> parts;
  while (true) {
    auto tab = line.find('\t');
    parts.push_back(line.substr(0, tab));
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  return parts;
}

template <typename Fn>
void for_each_row(std::istream& in, std::size_t columns, KeyNames* names, Fn&& fn) {
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line[0] == '#' && line.find('\t') == std::string::npos)) continue;
    auto parts = split_tabs(line);
    if (parts.size() != columns) {
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
    }
    KeyId key = names ? names->intern(parts[0]) : KeyNames::resolve(parts[0]);
    try {
      fn(key, parts);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

void write_sample(std::ostream& out, const DiscreteSample& sample, const KeyNames& names) {
  out << "#shl-discrete ell=" << sample.ell.to_string() << " mode=" << to_string(sample.mode)
      << " tau=" << format_double(sample.tau) << " k=" << sample.k << '\n';
  for (const auto& e : sample.entries) out << names.name(e.key) << '\t' << e.count << '\n';
}

void write_sample(std::ostream& out, const ContinuousSample& sample, const KeyNames& names) {
  out << "#shl-continuous ell=" << format_double(sample.ell) << " mode=" << to_string(sample.mode)
      << " tau=" << format_double(sample.tau) << " k=" << sample.k << '\n';
  for (const auto& e : sample.entries) out << names.name(e.key) << '\t' << format_double(e.count) << '\n';
}

void write_pass_one(std::ostream& out, const PassOneSummary& summary, const KeyNames& names) {
  const auto& c = summary.config();
  out << "#pass1 scheme=" << to_string(c.scheme) << " ell=" << format_double(c.ell) << " mode=" << to_string(c.mode)
      << " k=" << c.k << " tau=" << format_double(c.tau) << " hashseed=" << c.seeds.hash
      << " seed=" << c.seeds.master << " bound=" << format_double(summary.threshold()) << '\n';
  for (const auto& [key, seed] : summary.entries()) out << names.name(key) << '\t' << format_double(seed) << '\n';
}

void write_pass_two(std::ostream& out, const PassTwoSummary& summary, const KeyNames& names) {
  for (const auto& kw : summary.weights()) out << names.name(kw.key) << '\t' << format_double(kw.weight) << '\n';
}

void write_multi_sample(std::ostream& out, const MultiSample& sample, const KeyNames& names) {
  out << "#shl-mo k=" << sample.k << " L=" << sample.caps.spec() << '\n';
  for (const auto& e : sample.entries) {
    out << names.name(e.key) << '\t' << format_double(e.weight) << '\t' << format_double(e.phi) << '\n';
  }
}

void write_coefficients(std::ostream& out, const DiscreteCoefficients& coefficients, const FrequencyFunction& f) {
  out << "#coefficients ell=" << coefficients.ell().to_string() << " tau=" << format_double(coefficients.tau())
      << " f=" << f.spec() << '\n';
  const auto phi = coefficients.phi();
  const auto psi = coefficients.psi();
  for (std::size_t i = 1; i <= phi.size(); ++i) {
    out << i << '\t' << format_double(phi[i - 1]) << '\t';
    if (i <= psi.size()) {
      out << format_double(psi[i - 1]) << '\t' << format_double(coefficients.beta(f, i));
    } else {
      out << "nan\tnan";
    }
    out << '\n';
  }
}

SampleFile read_sample_file(std::istream& in, KeyNames* names) {
  std::string first;
  if (!std::getline(in, first)) throw InputError("empty sample file");
  if (!first.empty() && first.back() == '\r') first.pop_back();
  const Header h = parse_header(first);

  if (h.tag == "#shl-discrete") {
    DiscreteSample s;
    s.ell = DiscreteEll::parse(h.get("ell"));
    s.mode = parse_mode(h.get("mode"));
    s.tau = parse_double(h.get("tau"));
    s.k = static_cast<std::size_t>(parse_u64(h.get("k")));
    for_each_row(in, 2, names, [&](KeyId key, const auto& parts) {
      auto count = parse_u64(parts[1]);
      if (count == 0) throw InputError("sampled counts must be >= 1");
      s.entries.push_back({key, count, 0.0});
    });
    std::sort(s.entries.begin(), s.entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    return s;
  }
  if (h.tag == "#shl-continuous") {
    ContinuousSample s;
    s.ell = parse_double(h.get("ell"));
    s.mode = parse_mode(h.get("mode"));
    s.tau = parse_double(h.get("tau"));
    s.k = static_cast<std::size_t>(parse_u64(h.get("k")));
    for_each_row(in, 2, names, [&](KeyId key, const auto& parts) {
      double c = parse_double(parts[1]);
      if (!(c > 0.0)) throw InputError("sampled counts must be positive");
      s.entries.push_back({key, c});
    });
    std::sort(s.entries.begin(), s.entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    return s;
  }
  if (h.tag == "#pass1") {
    PassOneConfig c;
    c.scheme = parse_scheme(h.get("scheme"));
    c.ell = parse_double(h.get("ell"));
    c.mode = parse_mode(h.get("mode"));
    c.k = static_cast<std::size_t>(parse_u64(h.get("k")));
    c.tau = parse_double(h.get("tau"));
    c.seeds.hash = parse_u64(h.get("hashseed"));
    c.seeds.master = h.has("seed") ? parse_u64(h.get("seed")) : 0;
    c.validate();
    double bound = h.has("bound") ? parse_double(h.get("bound")) : c.supremum();
    std::vector<std::pair<KeyId, double>> entries;
    for_each_row(in, 2, names, [&](KeyId key, const auto& parts) { entries.emplace_back(key, parse_double(parts[1])); });
    return PassOneSummary::restore(c, bound, entries);
  }
  if (h.tag == "#shl-mo") {
    MultiSample s;
    s.k = static_cast<std::size_t>(parse_u64(h.get("k")));
    s.caps = CapSet::parse(h.get("L"));
    for_each_row(in, 3, names, [&](KeyId key, const auto& parts) {
      double phi = parse_double(parts[2]);
      if (!(phi > 0.0 && phi <= 1.0)) throw InputError("inclusion probability must be in (0, 1]");
      s.entries.push_back({key, parse_double(parts[1]), phi});
    });
    std::sort(s.entries.begin(), s.entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    return s;
  }
  throw InputError("unrecognized sample header '" + first + "'");
}

PassTwoSummary read_pass_two(std::istream& in, KeyNames* names) {
  std::vector<KeyWeight> weights;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto parts = split_tabs(line);
    if (parts.size() != 2) throw InputError("line " + std::to_string(line_no) + ": expected key<TAB>weight");
    KeyId key = names ? names->intern(parts[0]) : KeyNames::resolve(parts[0]);
    double w = parse_double(parts[1]);
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("line " + std::to_string(line_no) + ": bad weight");
    weights.push_back({key, w});
  }
  return PassTwoSummary::from_weights(weights);
}

std::string format_estimate_line(const EstimateLine& line) {
  std::ostringstream out;
  out << "Q_hat=" << format_double(line.estimate) << " tau=" << format_double(line.tau)
      << " ell=" << format_double(line.ell) << " f=" << line.f << " segment=" << line.segment
      << " n_sampled=" << line.sampled;
  return out.str();
}

}  // namespace capstream

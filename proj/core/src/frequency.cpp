#include "capstream/frequency.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>

#include "capstream/types.hpp"

namespace capstream {

namespace {

double parse_positive(std::string_view text, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError("invalid " + std::string(what) + " parameter: '" + std::string(text) + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

FrequencyFunction FrequencyFunction::cap(double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw ConfigError("cap threshold must be positive and finite");
  return FrequencyFunction(Kind::cap, threshold);
}

FrequencyFunction FrequencyFunction::moment(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("moment exponent must be positive and finite");
  return FrequencyFunction(Kind::moment, p);
}

FrequencyFunction FrequencyFunction::distinct() { return FrequencyFunction(Kind::distinct, 0.0); }

FrequencyFunction FrequencyFunction::sum() { return FrequencyFunction(Kind::sum, 0.0); }

FrequencyFunction FrequencyFunction::table(std::vector<double> values) {
  if (values.empty()) throw ConfigError("frequency table is empty");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("frequency table values must be finite and nonnegative");
  }
  FrequencyFunction f(Kind::table, 0.0);
  f.table_ = std::move(values);
  return f;
}

FrequencyFunction FrequencyFunction::custom(std::string name, std::function<double(double)> value,
                                            std::function<double(double)> derivative) {
  if (!value) throw ConfigError("custom frequency function needs a value rule");
  FrequencyFunction f(Kind::custom, 0.0);
  f.name_ = std::move(name);
  f.value_ = std::move(value);
  f.derivative_ = std::move(derivative);
  return f;
}

FrequencyFunction FrequencyFunction::parse(std::string_view text) {
  if (text == "distinct") return distinct();
  if (text == "sum") return sum();
  auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    auto name = text.substr(0, colon);
    auto arg = text.substr(colon + 1);
    if (name == "cap") return cap(parse_positive(arg, "cap"));
    if (name == "moment") return moment(parse_positive(arg, "moment"));
  }
  throw ConfigError("unknown frequency function '" + std::string(text) + "' (expected cap:T, moment:p, distinct, sum)");
}

double FrequencyFunction::operator()(double w) const {
  if (!(w > 0.0)) return 0.0;
  switch (kind_) {
    case Kind::cap:
      return std::min(w, param_);
    case Kind::moment:
      return std::pow(w, param_);
    case Kind::distinct:
      return 1.0;
    case Kind::sum:
      return w;
    case Kind::table: {
      auto i = static_cast<std::size_t>(std::llround(w));
      if (i == 0) return 0.0;
      return i <= table_.size() ? table_[i - 1] : table_.back();
    }
    case Kind::custom:
      return value_(w);
  }
  return 0.0;
}

bool FrequencyFunction::has_derivative() const noexcept {
  switch (kind_) {
    case Kind::cap:
    case Kind::moment:
    case Kind::sum:
      return true;
    case Kind::custom:
      return static_cast<bool>(derivative_);
    default:
      return false;
  }
}

double FrequencyFunction::derivative(double c) const {
  switch (kind_) {
    case Kind::cap:
      return c < param_ ? 1.0 : 0.0;
    case Kind::moment:
      return param_ * std::pow(c, param_ - 1.0);
    case Kind::sum:
      return 1.0;
    case Kind::custom:
      if (derivative_) return derivative_(c);
      break;
    default:
      break;
  }
  throw ConfigError("frequency function '" + spec() +
                    "' has no derivative rule; use cap:1 instead of distinct for real-valued counts");
}

std::string FrequencyFunction::spec() const {
  switch (kind_) {
    case Kind::cap:
      return "cap:" + format_number(param_);
    case Kind::moment:
      return "moment:" + format_number(param_);
    case Kind::distinct:
      return "distinct";
    case Kind::sum:
      return "sum";
    case Kind::table:
      return "table";
    case Kind::custom:
      return name_.empty() ? "custom" : name_;
  }
  return "unknown";
}

}  // namespace capstream

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace capstream {

// The statistic f applied to each key's total weight.
class FrequencyFunction {
 public:
  enum class Kind { cap, moment, distinct, sum, table, custom };

  static FrequencyFunction cap(double threshold);
  static FrequencyFunction moment(double p);
  static FrequencyFunction distinct();
  static FrequencyFunction sum();
  // f(i) = values[i - 1] for 1 <= i <= size; f(i) = values.back() beyond.
  // Integer arguments only, so the continuous path rejects it.
  static FrequencyFunction table(std::vector<double> values);
  // Arbitrary function with an optional derivative rule.
  static FrequencyFunction custom(std::string name, std::function<double(double)> value,
                                  std::function<double(double)> derivative = {});

  // Accepts "cap:T", "moment:p", "distinct", "sum".
  static FrequencyFunction parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  double operator()(double w) const;
  // f'(c) for c > 0. At the cap point the right derivative 0 is returned.
  double derivative(double c) const;
  bool has_derivative() const noexcept;
  // True when f is defined on integer arguments only.
  bool integer_only() const noexcept { return kind_ == Kind::table; }

  std::string spec() const;

 private:
  FrequencyFunction(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_;
  double param_ = 0.0;
  std::vector<double> table_;
  std::string name_;
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
};

}  // namespace capstream

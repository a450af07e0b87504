#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>

#include "capstream/continuous.hpp"
#include "capstream/discrete.hpp"
#include "capstream/discrete_est.hpp"
#include "capstream/frequency.hpp"
#include "capstream/keys.hpp"
#include "capstream/multiobjective.hpp"
#include "capstream/twopass.hpp"

namespace capstream {

// Shortest round-trip text for a double; "inf" for infinity.
std::string format_double(double v);
double parse_double(std::string_view text);

void write_sample(std::ostream& out, const DiscreteSample& sample, const KeyNames& names);
void write_sample(std::ostream& out, const ContinuousSample& sample, const KeyNames& names);
void write_pass_one(std::ostream& out, const PassOneSummary& summary, const KeyNames& names);
void write_pass_two(std::ostream& out, const PassTwoSummary& summary, const KeyNames& names);
void write_multi_sample(std::ostream& out, const MultiSample& sample, const KeyNames& names);
// i, phi_i, psi_i, beta_i for i = 1..length.
void write_coefficients(std::ostream& out, const DiscreteCoefficients& coefficients, const FrequencyFunction& f);

using SampleFile = std::variant<DiscreteSample, ContinuousSample, PassOneSummary, MultiSample>;

// Reads any of the sample formats, dispatching on the header line. Key names
// seen in the file are recorded in `names` when given.
SampleFile read_sample_file(std::istream& in, KeyNames* names = nullptr);
PassTwoSummary read_pass_two(std::istream& in, KeyNames* names = nullptr);

struct EstimateLine {
  double estimate;
  double tau;
  double ell;
  std::string f;
  std::string segment;
  std::size_t sampled;
};
std::string format_estimate_line(const EstimateLine& line);

}  // namespace capstream

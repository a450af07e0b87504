#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "capstream/continuous.hpp"
#include "capstream/continuous_est.hpp"
#include "capstream/discrete.hpp"
#include "capstream/discrete_est.hpp"
#include "capstream/format.hpp"
#include "capstream/frequency.hpp"
#include "capstream/harness.hpp"
#include "capstream/keys.hpp"
#include "capstream/multiobjective.hpp"
#include "capstream/segment.hpp"
#include "capstream/twopass.hpp"

using namespace capstream;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(item == "inf" ? kUnboundedTau : parse_double(item));
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

double parse_ell(const std::string& text, Scheme scheme) {
  if (scheme == Scheme::discrete) {
    auto ell = DiscreteEll::parse(text);
    return ell.is_infinite() ? kUnboundedTau : static_cast<double>(ell.value());
  }
  double ell = parse_double(text);
  if (!(ell > 0.0)) throw ConfigError("ell must be positive");
  return ell;
}

// "all" or "file:PATH" with one key name per line.
SegmentPredicate parse_segment(const std::string& spec) {
  if (spec == "all") return SegmentPredicate::all();
  if (spec.rfind("file:", 0) == 0) {
    auto in = open_input(spec.substr(5));
    std::unordered_set<KeyId> members;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) members.insert(KeyNames::resolve(line));
    }
    return SegmentPredicate::keys(std::move(members));
  }
  throw ConfigError("segment must be 'all' or 'file:PATH'");
}

struct SamplerOptions {
  std::string scheme = "c";
  std::string mode = "k";
  std::size_t k = 100;
  double tau = 0.01;
  std::string ell = "1";
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> hash_seed;
  double batch = 0.0;
  std::uint64_t offset = 0;

  Seeds seeds() const { return Seeds{hash_seed.value_or(seed), seed}; }
};

void add_sampler_options(CLI::App* cmd, SamplerOptions& o) {
  cmd->add_option("--scheme", o.scheme, "d (discrete) or c (continuous)")->capture_default_str();
  cmd->add_option("--mode", o.mode, "tau (fixed threshold) or k (fixed size)")->capture_default_str();
  cmd->add_option("--k", o.k, "sample size for --mode k")->capture_default_str();
  cmd->add_option("--tau", o.tau, "threshold for --mode tau")->capture_default_str();
  cmd->add_option("--ell", o.ell, "cap parameter; discrete accepts a positive integer or inf")->capture_default_str();
  cmd->add_option("--seed", o.seed, "seed of the element randomness")->capture_default_str();
  cmd->add_option("--hash-seed", o.hash_seed, "seed of the hash family (defaults to --seed)");
}

int run_sample(const SamplerOptions& o) {
  KeyNames names;
  auto stream = read_stream(std::cin, &names);
  const Scheme scheme = parse_scheme(o.scheme);
  const SampleMode mode = parse_mode(o.mode);
  if (scheme == Scheme::discrete) {
    DiscreteEll ell = DiscreteEll::parse(o.ell);
    auto config = mode == SampleMode::fixed_size ? DiscreteConfig::fixed_size(ell, o.k)
                                                 : DiscreteConfig::fixed_threshold(ell, o.tau);
    write_sample(std::cout, sample_discrete(stream, config, o.seeds()), names);
  } else {
    double ell = parse_ell(o.ell, scheme);
    auto config = mode == SampleMode::fixed_size ? ContinuousConfig::fixed_size(ell, o.k, o.batch)
                                                 : ContinuousConfig::fixed_threshold(ell, o.tau);
    write_sample(std::cout, sample_continuous(stream, config, o.seeds()), names);
  }
  return 0;
}

PassOneConfig pass_one_config(const SamplerOptions& o) {
  PassOneConfig c;
  c.scheme = parse_scheme(o.scheme);
  c.mode = parse_mode(o.mode);
  c.ell = parse_ell(o.ell, c.scheme);
  c.k = c.mode == SampleMode::fixed_size ? o.k : 0;
  c.tau = c.mode == SampleMode::fixed_threshold ? o.tau : c.supremum();
  c.seeds = o.seeds();
  c.validate();
  return c;
}

int run_pass1(const SamplerOptions& o) {
  KeyNames names;
  auto stream = read_stream(std::cin, &names);
  auto summary = pass_one(stream, pass_one_config(o), o.offset);
  names.retain([&](KeyId key) { return summary.contains(key); });
  write_pass_one(std::cout, summary, names);
  return 0;
}

std::vector<KeyId> keys_of(const SampleFile& file) {
  return std::visit(Overloaded{
                        [](const PassOneSummary& s) { return s.keys(); },
                        [](const auto& s) {
                          std::vector<KeyId> keys;
                          for (const auto& e : s.entries) keys.push_back(e.key);
                          return keys;
                        },
                    },
                    file);
}

int run_pass2(const std::string& keys_path) {
  KeyNames names;
  auto in = open_input(keys_path);
  auto keys = keys_of(read_sample_file(in, &names));
  auto stream = read_stream(std::cin);
  write_pass_two(std::cout, pass_two(stream, keys), names);
  return 0;
}

int run_merge(const std::vector<std::string>& paths) {
  KeyNames names;
  std::string first_line;
  {
    auto in = open_input(paths.front());
    std::getline(in, first_line);
  }
  if (first_line.rfind("#pass1", 0) == 0) {
    std::optional<PassOneSummary> merged;
    for (const auto& path : paths) {
      auto in = open_input(path);
      auto file = read_sample_file(in, &names);
      auto* summary = std::get_if<PassOneSummary>(&file);
      if (!summary) throw InputError("'" + path + "' is not a first-pass summary");
      merged = merged ? merge_pass_one(*merged, *summary) : *summary;
    }
    names.retain([&](KeyId key) { return merged->contains(key); });
    write_pass_one(std::cout, *merged, names);
    return 0;
  }
  PassTwoSummary merged;
  for (const auto& path : paths) {
    auto in = open_input(path);
    merged = merge_pass_two(merged, read_pass_two(in, &names));
  }
  write_pass_two(std::cout, merged, names);
  return 0;
}

struct EstimateOptions {
  std::string sample;
  std::string f = "sum";
  std::string segment = "all";
  std::string two_pass;
};

int run_estimate(const EstimateOptions& o) {
  auto in = open_input(o.sample);
  auto file = read_sample_file(in);
  const auto f = FrequencyFunction::parse(o.f);
  const auto segment = parse_segment(o.segment);

  std::optional<std::vector<KeyWeight>> weights;
  if (!o.two_pass.empty()) {
    if (o.two_pass.rfind("weights:", 0) != 0) throw ConfigError("--two-pass expects weights:PATH");
    auto win = open_input(o.two_pass.substr(8));
    weights = read_pass_two(win).weights();
  }

  EstimateLine line{0.0, 0.0, 0.0, f.spec(), o.segment, 0};
  auto count_in_segment = [&](const std::vector<KeyId>& keys) {
    std::size_t n = 0;
    for (KeyId key : keys) n += segment(key) ? 1 : 0;
    return n;
  };
  line.sampled = count_in_segment(keys_of(file));

  std::visit(Overloaded{
                 [&](const DiscreteSample& s) {
                   line.tau = s.tau;
                   line.ell = s.ell.is_infinite() ? kUnboundedTau : static_cast<double>(s.ell.value());
                   if (!weights) {
                     line.estimate = estimate_discrete_1pass(s, f, segment);
                     return;
                   }
                   if (s.mode != SampleMode::fixed_threshold) {
                     throw ConfigError("--two-pass with a fixed-size sample needs a pass1 summary");
                   }
                   double top = 1.0;
                   for (const auto& kw : *weights) top = std::max(top, kw.weight);
                   DiscreteCoefficients c(s.ell, s.tau, static_cast<std::uint64_t>(std::llround(top)), false);
                   line.estimate = estimate_discrete_2pass(*weights, f, segment, c);
                 },
                 [&](const ContinuousSample& s) {
                   line.tau = s.tau;
                   line.ell = s.ell;
                   if (!weights) {
                     line.estimate = estimate_continuous_1pass(s, f, segment);
                     return;
                   }
                   if (s.mode != SampleMode::fixed_threshold) {
                     throw ConfigError("--two-pass with a fixed-size sample needs a pass1 summary");
                   }
                   line.estimate = estimate_continuous_2pass(*weights, f, segment, s.tau, s.ell);
                 },
                 [&](const PassOneSummary& s) {
                   if (!weights) throw ConfigError("a pass1 summary needs --two-pass weights:PATH");
                   line.tau = s.threshold();
                   line.ell = s.config().ell;
                   line.estimate = estimate_two_pass(s, PassTwoSummary::from_weights(*weights), f, segment);
                 },
                 [&](const MultiSample& s) {
                   line.tau = std::nan("");
                   line.ell = std::nan("");
                   line.estimate = estimate_multi(s, f, segment);
                 },
             },
             file);
  std::cout << format_estimate_line(line) << '\n';
  return 0;
}

struct SimulateOptions {
  std::string scheme = "c";
  std::size_t k = 100;
  double alpha = 1.5;
  std::size_t m = 100000;
  std::size_t rep = 200;
  std::string ells = "0.1,1,5,20,50,100,500,1000,10000";
  std::string caps = "1,5,20,50,100,500,1000,10000";
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "tsv";
  std::size_t threads = 0;
  bool progress = false;
};

int run_simulate(const SimulateOptions& o) {
  ExperimentConfig config;
  config.scheme = parse_scheme(o.scheme);
  config.k = o.k;
  config.alpha = o.alpha;
  config.stream_length = o.m;
  config.repetitions = o.rep;
  config.ells = parse_list(o.ells);
  config.caps = parse_list(o.caps);
  config.seed = o.seed;
  config.threads = o.threads;
  const auto format = parse_table_format(o.format);
  config.validate();

  std::function<void(std::size_t, std::size_t)> progress;
  if (o.progress) {
    progress = [](std::size_t done, std::size_t total) {
      std::cerr << "\rrun " << done << "/" << total << std::flush;
      if (done == total) std::cerr << '\n';
    };
  }
  auto grid = run_error_grid(config, progress);
  if (o.out.empty() || o.out == "-") {
    write_error_grid(std::cout, grid, format);
  } else {
    std::ofstream out(o.out);
    if (!out) throw InputError("cannot write '" + o.out + "'");
    write_error_grid(out, grid, format);
  }
  return 0;
}

int run_coeffs(const std::string& ell, double tau, std::uint64_t length, const std::string& f) {
  DiscreteCoefficients c(DiscreteEll::parse(ell), tau, length);
  write_coefficients(std::cout, c, FrequencyFunction::parse(f));
  return 0;
}

int run_mo(std::size_t k, const std::string& caps, const Seeds& seeds) {
  KeyNames names;
  auto stream = read_stream(std::cin, &names);
  auto sample = build_multi_sample(stream, k, CapSet::parse(caps), seeds);
  write_multi_sample(std::cout, sample, names);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capped-frequency stream sampling (SH_ell) and estimation"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Error grid over Zipf streams (rows ell, columns cap T)");
  simulate->add_option("--scheme", sim.scheme, "d or c")->capture_default_str();
  simulate->add_option("--k", sim.k, "sample size")->capture_default_str();
  simulate->add_option("--alpha", sim.alpha, "Zipf parameter")->capture_default_str();
  simulate->add_option("--m", sim.m, "stream length")->capture_default_str();
  simulate->add_option("--rep", sim.rep, "repetitions")->capture_default_str();
  simulate->add_option("--ells", sim.ells, "comma-separated ell values")->capture_default_str();
  simulate->add_option("--caps", sim.caps, "comma-separated cap values T")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "experiment seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "output file (default stdout)");
  simulate->add_option("--format", sim.format, "tsv or markdown")->capture_default_str();
  simulate->add_option("--threads", sim.threads, "worker threads, 0 for all cores")->capture_default_str();
  simulate->add_flag("--progress", sim.progress, "report progress on stderr");

  SamplerOptions smp;
  auto* sample = app.add_subcommand("sample", "1-pass SH_ell sample of the stream on stdin");
  add_sampler_options(sample, smp);
  sample->add_option("--batch", smp.batch, "continuous fixed-size eviction batch as a fraction of k")
      ->capture_default_str();

  SamplerOptions p1;
  auto* pass1 = app.add_subcommand("pass1", "first pass of the 2-pass method (mergeable)");
  add_sampler_options(pass1, p1);
  pass1->add_option("--offset", p1.offset, "stream position of the first element on stdin")->capture_default_str();

  std::string keys_path;
  auto* pass2 = app.add_subcommand("pass2", "exact weights on stdin for the keys of a sample or pass1 file");
  pass2->add_option("--keys", keys_path, "sample or pass1 file")->required();

  std::vector<std::string> merge_paths;
  auto* merge = app.add_subcommand("merge", "merge pass1 summaries or pass2 weight files");
  merge->add_option("files", merge_paths, "files to merge")->required()->expected(1, -1);

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "estimate Q(f, H) from a sample file");
  estimate->add_option("--sample", est.sample, "sample, pass1 or multi-objective file")->required();
  estimate->add_option("--f", est.f, "cap:T, sum, distinct or moment:p")->capture_default_str();
  estimate->add_option("--segment", est.segment, "all or file:PATH")->capture_default_str();
  estimate->add_option("--two-pass", est.two_pass, "weights:PATH with exact weights of the sampled keys");

  std::string c_ell = "1";
  double c_tau = 0.1;
  std::uint64_t c_length = 20;
  std::string c_f = "cap:1";
  auto* coeffs = app.add_subcommand("coeffs", "discrete phi, psi and beta coefficients");
  coeffs->add_option("--ell", c_ell, "positive integer or inf")->capture_default_str();
  coeffs->add_option("--tau", c_tau, "threshold")->capture_default_str();
  coeffs->add_option("--length", c_length, "number of indices")->capture_default_str();
  coeffs->add_option("--f", c_f, "frequency function for beta")->capture_default_str();

  std::size_t mo_k = 100;
  std::string mo_caps = "interval";
  std::uint64_t mo_seed = 1;
  std::optional<std::uint64_t> mo_hash_seed;
  auto* mo = app.add_subcommand("mo", "multi-objective sample of the stream on stdin");
  mo->add_option("--k", mo_k, "per-objective sample size")->capture_default_str();
  mo->add_option("--caps", mo_caps, "interval or a comma-separated ell list")->capture_default_str();
  mo->add_option("--seed", mo_seed, "seed of the element randomness")->capture_default_str();
  mo->add_option("--hash-seed", mo_hash_seed, "seed of the hash family (defaults to --seed)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(sim);
    if (*sample) return run_sample(smp);
    if (*pass1) return run_pass1(p1);
    if (*pass2) return run_pass2(keys_path);
    if (*merge) return run_merge(merge_paths);
    if (*estimate) return run_estimate(est);
    if (*coeffs) return run_coeffs(c_ell, c_tau, c_length, c_f);
    if (*mo) return run_mo(mo_k, mo_caps, Seeds{mo_hash_seed.value_or(mo_seed), mo_seed});
  } catch (const InputError& e) {
    std::cerr << "capstream: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "capstream: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include <benchmark/benchmark.h>

#include <vector>

#include "capstream/continuous.hpp"
#include "capstream/discrete.hpp"
#include "capstream/discrete_est.hpp"
#include "capstream/harness.hpp"
#include "capstream/multiobjective.hpp"
#include "capstream/twopass.hpp"

using namespace capstream;

namespace {

const std::vector<Element>& zipf_stream() {
  static const std::vector<Element> stream = generate_zipf_stream(1.2, 200000, 11);
  return stream;
}

void BM_DiscreteFixedK(benchmark::State& state) {
  const auto& stream = zipf_stream();
  const auto ell = DiscreteEll::finite(static_cast<std::uint64_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto sample = sample_fixed_k_discrete(stream, ell, 100, Seeds{seed, seed});
    benchmark::DoNotOptimize(sample.tau);
    ++seed;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.size()));
}
BENCHMARK(BM_DiscreteFixedK)->Arg(1)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ContinuousFixedK(benchmark::State& state) {
  const auto& stream = zipf_stream();
  const double ell = static_cast<double>(state.range(0));
  const double batch = static_cast<double>(state.range(1)) / 100.0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto sample = sample_fixed_k_continuous(stream, ell, 100, Seeds{seed, seed}, batch);
    benchmark::DoNotOptimize(sample.tau);
    ++seed;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.size()));
}
BENCHMARK(BM_ContinuousFixedK)
    ->Args({1, 0})
    ->Args({100, 0})
    ->Args({100, 10})
    ->Args({10000, 10})
    ->Unit(benchmark::kMillisecond);

void BM_PassOne(benchmark::State& state) {
  const auto& stream = zipf_stream();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto summary = pass_one(stream, PassOneConfig::continuous_fixed_size(100.0, 100, Seeds{seed, seed}));
    benchmark::DoNotOptimize(summary.threshold());
    ++seed;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.size()));
}
BENCHMARK(BM_PassOne)->Unit(benchmark::kMillisecond);

void BM_MultiObjectiveInterval(benchmark::State& state) {
  const auto& stream = zipf_stream();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto sample = build_multi_sample(stream, 100, CapSet::interval(), Seeds{seed, seed});
    benchmark::DoNotOptimize(sample.entries.size());
    ++seed;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.size()));
}
BENCHMARK(BM_MultiObjectiveInterval)->Unit(benchmark::kMillisecond);

// Coefficient tables up to count M; psi costs O(M min(M, support)).
void BM_DiscreteCoefficients(benchmark::State& state) {
  const auto ell = DiscreteEll::finite(static_cast<std::uint64_t>(state.range(0)));
  const auto length = static_cast<std::uint64_t>(state.range(1));
  for (auto _ : state) {
    DiscreteCoefficients c(ell, 0.001, length);
    benchmark::DoNotOptimize(c.psi().data());
  }
}
BENCHMARK(BM_DiscreteCoefficients)
    ->Args({10, 10000})
    ->Args({1000, 10000})
    ->Args({10000, 20000})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <vector>

#include "gaitseg/ar.hpp"
#include "gaitseg/detector.hpp"
#include "gaitseg/rng.hpp"
#include "gaitseg/segmenter.hpp"
#include "gaitseg/synth.hpp"
#include "gaitseg/trend.hpp"

using namespace gaitseg;

namespace {

std::vector<double> noisy_ramp(std::size_t n) {
  Rng rng(7);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t)
    x[t] = 9.8 + 0.001 * static_cast<double>(t) + rng.normal(0.0, 0.05);
  return x;
}

AmplitudeSeries preset_amplitude(double duration_s) {
  return generate(default3_spec(1, duration_s)).amplitude;
}

HdpHyper bench_hyper(int order) {
  HdpHyper h;
  h.order = order;
  h.ar_prior = ArPrior::conjugate(order, 0.25);
  h.kappa = 50.0;
  h.truncation = 10;
  return h;
}

}  // namespace

static void BM_L1TrendFilter(benchmark::State& state) {
  auto x = noisy_ramp(static_cast<std::size_t>(state.range(0)));
  const double lambda = default_trend_lambda(x.size(), 30.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(l1_trend_filter(x, lambda));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_L1TrendFilter)->Arg(1800)->Arg(9000)->Complexity();

static void BM_ArPsd(benchmark::State& state) {
  ArState st = make_cycle_bump_state(static_cast<int>(state.range(0)), 40.0,
                                     8.0, 0.7, 0.3);
  std::vector<double> freqs;
  for (double f = 0.05; f <= 5.0; f += 0.005) freqs.push_back(f);
  for (auto _ : state)
    benchmark::DoNotOptimize(ar_psd(st, freqs, 30.0));
}
BENCHMARK(BM_ArPsd)->Arg(8)->Arg(90);

static void BM_ConjugatePosterior(benchmark::State& state) {
  ArState truth;
  truth.coeffs = {0.8};
  truth.noise_var = 1.0;
  Rng rng(3);
  auto x = ar_simulate(truth, static_cast<std::size_t>(state.range(0)), rng,
                       100);
  ArPrior prior = ArPrior::conjugate(1);
  for (auto _ : state) {
    RegressionStats stats(1);
    stats.add(make_design(x, 1));
    benchmark::DoNotOptimize(conjugate_posterior(stats, prior));
  }
}
BENCHMARK(BM_ConjugatePosterior)->Arg(1000)->Arg(10000);

static void BM_DirectSamplerIteration(benchmark::State& state) {
  AmplitudeSeries amp = preset_amplitude(60.0);
  HdpHyper h = bench_hyper(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(gibbs_direct_assignment(amp, h, 1, rng));
  }
}
BENCHMARK(BM_DirectSamplerIteration)->Arg(4)->Arg(90)->Unit(benchmark::kMillisecond);

static void BM_BlockedSamplerIteration(benchmark::State& state) {
  AmplitudeSeries amp = preset_amplitude(60.0);
  HdpHyper h = bench_hyper(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(gibbs_blocked_weak_limit(amp, h, 1, rng));
  }
}
BENCHMARK(BM_BlockedSamplerIteration)->Arg(4)->Arg(90)->Unit(benchmark::kMillisecond);

static void BM_DetectNasc(benchmark::State& state) {
  AmplitudeSeries amp = preset_amplitude(300.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(detect_nasc(amp, 5.0, 10, 74, 0.5));
}
BENCHMARK(BM_DetectNasc)->Unit(benchmark::kMillisecond);

static void BM_DetectStft(benchmark::State& state) {
  AmplitudeSeries amp = preset_amplitude(300.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(detect_stft(amp, 5.0, 0.5, 3.0, 0.5));
}
BENCHMARK(BM_DetectStft)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <vector>

#include "logcorr/functionals.hpp"
#include "logcorr/kernel.hpp"
#include "logcorr/paths.hpp"
#include "logcorr/renewal.hpp"
#include "logcorr/rng.hpp"
#include "logcorr/sampler.hpp"

using namespace logcorr;

static void BM_FillNormal(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  RandomStream rng(1, 0, 0);
  for (auto _ : state) {
    rng.fill_normal(out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FillNormal)->Range(64, 1 << 16);

static void BM_SamplerAdvance(benchmark::State& state) {
  GridSpec g;
  g.d = static_cast<int>(state.range(1));
  g.n = static_cast<int>(state.range(0));
  const FieldSampler sampler(KernelSpec::bump_autocorr(g.d), g, 0.05);
  sampler.prepare(1.0);
  auto s = sampler.initial_state(1, 0);
  for (auto _ : state) {
    if (s.t >= 1.0) s = sampler.initial_state(1, s.replica + 1);
    sampler.advance(s, 0.05);
    benchmark::DoNotOptimize(s.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_SamplerAdvance)->Args({256, 1})->Args({4096, 1})->Args({64, 2})->Args({256, 2});

static void BM_BallotMc(benchmark::State& state) {
  const std::vector<double> xs{0.5, 1.0, 2.0}, ts{1.0};
  const PathConfig cfg{1e-2, 1.0, true};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ballot_mc(xs, ts, cfg, static_cast<std::size_t>(state.range(0)), 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BallotMc)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_CovScaleIntegral(benchmark::State& state) {
  const auto k = KernelSpec::bump_autocorr(1);
  double r = 0.0;
  for (auto _ : state) {
    r = r > 0.5 ? 0.0 : r + 1e-3;
    benchmark::DoNotOptimize(cov_scale_integral(k, 0.0, 4.0, {r, 0.0}));
  }
}
BENCHMARK(BM_CovScaleIntegral);

static void BM_RenewalLhs(benchmark::State& state) {
  RenewalConfig c;
  c.sigma = 1.0;
  c.paths = static_cast<std::size_t>(state.range(0));
  const auto f = endpoint_indicator(-0.5);
  for (auto _ : state) benchmark::DoNotOptimize(renewal_lhs(f, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RenewalLhs)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

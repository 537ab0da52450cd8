// Microbenchmarks for the hot paths: the two statistic evaluation routes,
// the per-series decomposition, panel generation, and an end-to-end test
// run at study scale.

#include <benchmark/benchmark.h>

#include <vector>

#include "fpanel/config.hpp"
#include "fpanel/fpca.hpp"
#include "fpanel/portmanteau.hpp"
#include "fpanel/rng.hpp"
#include "fpanel/simulate.hpp"
#include "support/test_helpers.hpp"

using namespace fpanel;
using fpanel::testing::coupled_panel_generator;
using fpanel::testing::random_matrix;

namespace {

ScoreMatrix make_scores(int n, int total_dim) {
  CounterRng rng(7);
  return ScoreMatrix(random_matrix(n, total_dim, rng),
                     std::vector<int>{total_dim});
}

void BM_statistic_fast(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  ScoreMatrix scores = make_scores(500, dim);
  PooledCovariance pooled = pooled_covariance(scores, 0.85);
  for (auto _ : state) {
    benchmark::DoNotOptimize(statistic_fast(scores, pooled, 10));
  }
}
BENCHMARK(BM_statistic_fast)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_statistic_kron(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  ScoreMatrix scores = make_scores(500, dim);
  PooledCovariance pooled = pooled_covariance(scores, 0.85);
  for (auto _ : state) {
    benchmark::DoNotOptimize(statistic_kron(scores, pooled, 10));
  }
}
BENCHMARK(BM_statistic_kron)->Arg(8)->Arg(16)->Arg(32);

void BM_fit_fpca(benchmark::State& state) {
  PanelGenerator gen = coupled_panel_generator(120);
  FunctionalPanel panel = generate_h0_panel(gen, 5);
  CenteredPanel centered = center_panel(panel);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fit_fpca(centered.panel.series(0), panel.grid(), 0.85));
  }
}
BENCHMARK(BM_fit_fpca);

void BM_generate_panel(benchmark::State& state) {
  PanelGenerator gen = coupled_panel_generator(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_ar_panel(gen, 0.38, ++seed));
  }
}
BENCHMARK(BM_generate_panel)->Arg(60)->Arg(120)->Arg(480);

void BM_run_test(benchmark::State& state) {
  PanelGenerator gen = coupled_panel_generator(static_cast<int>(state.range(0)));
  FunctionalPanel panel = generate_h0_panel(gen, 11);
  RunConfig config;
  config.h_max = 6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_test(panel, config));
  }
}
BENCHMARK(BM_run_test)->Arg(60)->Arg(120);

} // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "cvlab/curvature.hpp"
#include "cvlab/families.hpp"
#include "cvlab/integrals.hpp"

using namespace cvlab;

namespace {

ExecPolicy policy_of(const benchmark::State& st) { return st.range(0) ? ExecPolicy::Parallel : ExecPolicy::Serial; }

void BM_BuildPoly(benchmark::State& st) {
  BuildOptions o;
  o.policy = policy_of(st);
  const auto p = polynomial_xi(0.5);
  for (auto _ : st) benchmark::DoNotOptimize(build_metric(p, 3, o).piece_count());
}

void BM_BuildYau(benchmark::State& st) {
  BuildOptions o = x_domain_options();
  o.policy = policy_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(yau_counterexample(3, 2, 64, o).piece_count());
}

void BM_CurvatureTable(benchmark::State& st) {
  const auto m = build_metric(polynomial_xi(0.5), 3);
  for (auto _ : st) benchmark::DoNotOptimize(curvature_table(m, policy_of(st)).size());
}

void BM_SigmaSeriesYau(benchmark::State& st) {
  const auto m = yau_counterexample(3, 2);
  const auto grid = default_s_grid(m);
  for (auto _ : st) benchmark::DoNotOptimize(normalized_sigma_series(m, 2, grid, {1e-8, policy_of(st)}).rows.size());
}

}  // namespace

BENCHMARK(BM_BuildPoly)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildYau)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CurvatureTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SigmaSeriesYau)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

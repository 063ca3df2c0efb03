#include <benchmark/benchmark.h>

#include <cmath>

#include "biharm/asymptotics.hpp"
#include "biharm/phase_space.hpp"
#include "biharm/shooting.hpp"

using namespace biharm;

static void BM_IntegrateGlobal(benchmark::State& state) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 3.0;
  p.r_stop = std::pow(10.0, static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate(p));
}
BENCHMARK(BM_IntegrateGlobal)->DenseRange(3, 8, 1)->Unit(benchmark::kMillisecond);

static void BM_IntegrateBlowDown(benchmark::State& state) {
  ProblemParams p;
  p.q = 7.0;
  p.beta = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(p));
}
BENCHMARK(BM_IntegrateBlowDown)->Unit(benchmark::kMicrosecond);

static void BM_Eigenvalues(benchmark::State& state) {
  const Mat4 j = jacobian({2, 0, 6, 0}, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(eigenvalues(j));
}
BENCHMARK(BM_Eigenvalues);

static void BM_Classify(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(classify_beta(2.0, 2.1));
}
BENCHMARK(BM_Classify)->Unit(benchmark::kMillisecond);

static void BM_FindBetaStar(benchmark::State& state) {
  const double q = state.range(0) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(find_beta_star(q, std::nullopt, 1e-6));
}
BENCHMARK(BM_FindBetaStar)->Arg(125)->Arg(200)->Arg(700)->Unit(benchmark::kMillisecond);

static void BM_Analyze(benchmark::State& state) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 3.0;
  const auto t = integrate(p);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(t));
}
BENCHMARK(BM_Analyze)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

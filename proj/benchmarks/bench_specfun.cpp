#include <benchmark/benchmark.h>

#include "amforge/specfun.hpp"

using namespace amforge::specfun;

static void BM_Laguerre(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(laguerre(n, 1.5, x));
    x = x < 20.0 ? x + 0.37 : 0.1;
  }
}
BENCHMARK(BM_Laguerre)->Arg(2)->Arg(8)->Arg(32);

static void BM_Jacobi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double x = -0.99;
  for (auto _ : state) {
    benchmark::DoNotOptimize(jacobi(n, 2.5, 0.5, x));
    x = x < 0.99 ? x + 0.013 : -0.99;
  }
}
BENCHMARK(BM_Jacobi)->Arg(2)->Arg(8)->Arg(32);

static void BM_Hyp1f1(benchmark::State& state) {
  double x = -30.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hyp1f1(-0.5, -0.5, x));
    x = x < 30.0 ? x + 0.29 : -30.0;
  }
}
BENCHMARK(BM_Hyp1f1);

static void BM_Hyp2f1(benchmark::State& state) {
  double z = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hyp2f1(-0.3, 3.2, 1.5, z, 1.0 - z));
    z = z < 0.99 ? z + 0.0071 : 0.0;
  }
}
BENCHMARK(BM_Hyp2f1);

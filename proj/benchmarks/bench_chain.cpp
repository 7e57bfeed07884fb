#include <benchmark/benchmark.h>

#include <cmath>

#include "amforge/amcore.hpp"
#include "amforge/oracle.hpp"

using namespace amforge;

namespace {

const SolvableSystem& l2() {
  static const SolvableSystem s = SolvableSystem::make(SystemKind::L, {2.0, NAN, NAN});
  return s;
}

std::vector<SeedSolution> l1_seeds(int m) {
  std::vector<SeedSolution> out;
  for (int v = 0; v < m; ++v) out.push_back(virtual_state(l2(), BoundaryType::I, v));
  return out;
}

}  // namespace

static void BM_MakeGrid(benchmark::State& state) {
  const auto seeds = l1_seeds(1);
  for (auto _ : state) benchmark::DoNotOptimize(make_grid(l2(), seeds, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_MakeGrid)->Arg(512)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_AddBlock(benchmark::State& state) {
  const auto seeds = l1_seeds(static_cast<int>(state.range(0)));
  const TransformedSystem base(l2(), make_grid(l2(), seeds, 1024));
  for (auto _ : state) benchmark::DoNotOptimize(add_states_direct(base, seeds));
}
BENCHMARK(BM_AddBlock)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

static void BM_DeleteGround(benchmark::State& state) {
  const TransformedSystem base(l2(), make_grid(l2(), {}, 1024));
  for (auto _ : state) benchmark::DoNotOptimize(delete_state(base, 0));
}
BENCHMARK(BM_DeleteGround)->Unit(benchmark::kMillisecond);

static void BM_Oracle(benchmark::State& state) {
  const auto seeds = l1_seeds(1);
  const TransformedSystem base(l2(), make_grid(l2(), seeds, 1024));
  const TransformedSystem t = add_state(base, seeds[0]);
  const Domain s = t.support();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fd_spectrum([&](double x) { return t.potential(x); }, l2().domain(),
                                         static_cast<int>(state.range(0)), 4, std::pair{s.lower, s.upper}));
  }
}
BENCHMARK(BM_Oracle)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

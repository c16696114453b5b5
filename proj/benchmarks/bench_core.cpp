#include <benchmark/benchmark.h>

#include "blochflow/scenario.hpp"

using namespace blochflow;

namespace {

const Crystal& cu() {
  static Crystal c = cu_fcc_preset();
  return c;
}

void bm_zone_solve_200(benchmark::State& state) {
  for (auto _ : state) {
    auto s = zone_axis_setup(cu(), {1, 0, 0}, 200.0, 80.0, 90.0, 2.0, false);
    benchmark::DoNotOptimize(s.sol.gammas);
  }
}
BENCHMARK(bm_zone_solve_200);

void bm_zone_solve_30(benchmark::State& state) {
  for (auto _ : state) {
    auto s = zone_axis_setup(cu(), {1, 0, 0}, 30.0, 245.0, 500.0, 2.8, false);
    benchmark::DoNotOptimize(s.sol.gammas);
  }
}
BENCHMARK(bm_zone_solve_30);

void bm_wave_sample(benchmark::State& state) {
  auto s = zone_axis_setup(cu(), {1, 0, 0}, 200.0, 80.0, 90.0, 2.0, false);
  Vec3 r(1.1, 0.7, 137.0);
  for (auto _ : state) {
    auto w = wave_at(s.sol, r, int(state.range(0)));
    benchmark::DoNotOptimize(w.psi);
  }
}
BENCHMARK(bm_wave_sample)->Arg(0)->Arg(2);

void bm_trajectory(benchmark::State& state) {
  auto s = two_beam_setup(cu(), {2, 0, 0}, 200.0, true, true);
  Vec3 seed(0.9, 1.8, 0.0);
  for (auto _ : state) {
    auto t = propagate_trajectory(s.sol, seed, 50.0, 0.1);
    benchmark::DoNotOptimize(t.points.back().r);
  }
}
BENCHMARK(bm_trajectory);

void bm_field_map(benchmark::State& state) {
  auto s = zone_axis_setup(cu(), {1, 0, 0}, 200.0, 80.0, 90.0, 2.0, false);
  for (auto _ : state) {
    auto g = field_map(s.sol, cu(), "intensity", 250.0, 32);
    benchmark::DoNotOptimize(g.values.data());
  }
}
BENCHMARK(bm_field_map);

}  // namespace

BENCHMARK_MAIN();

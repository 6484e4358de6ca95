#include <benchmark/benchmark.h>

#include "platoon/config.hpp"
#include "platoon/sim.hpp"
#include "platoon/threshold.hpp"

using namespace platoon;

static void BM_SolveThreshold(benchmark::State& st) {
  PolicyParams p;
  p.lambda = static_cast<double>(st.range(0)) / 3600.0;
  p.d2 = static_cast<double>(st.range(1));
  for (auto _ : st) benchmark::DoNotOptimize(solve_threshold(p));
}
BENCHMARK(BM_SolveThreshold)->Args({108, 30000})->Args({216, 2000})->Unit(benchmark::kMicrosecond);

static void BM_Oracle(benchmark::State& st) {
  PolicyParams p;
  for (auto _ : st) benchmark::DoNotOptimize(value_iteration_oracle(p));
}
BENCHMARK(BM_Oracle)->Unit(benchmark::kMillisecond);

static void BM_RunNguyenDupuis(benchmark::State& st) {
  ScenarioConfig c = default_nguyen_dupuis();
  c.policy.kind = static_cast<PolicyKind>(st.range(0));
  st.SetLabel(to_string(c.policy.kind));
  for (auto _ : st) benchmark::DoNotOptimize(run_simulation(c));
}
BENCHMARK(BM_RunNguyenDupuis)
    ->Arg(static_cast<int>(PolicyKind::kBaseline))
    ->Arg(static_cast<int>(PolicyKind::kThresholdNetwork))
    ->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

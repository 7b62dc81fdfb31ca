// Microbenchmarks for the hot paths: power allocation, graph construction,
// loop finding, and an end-to-end solve at moderate scale.

#include <benchmark/benchmark.h>

#include "noma/graph.hpp"
#include "noma/power.hpp"
#include "noma/scenario.hpp"
#include "noma/solvers.hpp"

using namespace noma;

namespace {

Scenario scenario_for(int n, int g) { return generate_scenario(n, g, 12345); }

void BM_GenerateScenario(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_scenario(n, n / 2, 12345));
  }
}
BENCHMARK(BM_GenerateScenario)->Arg(64)->Arg(256);

void BM_AllocateAll(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Scenario s = scenario_for(n, n / 4);
  const Grouping g = init_grouping(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(allocate_all(g, s));
  }
}
BENCHMARK(BM_AllocateAll)->Arg(16)->Arg(64)->Arg(256);

void BM_BuildGraph(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Scenario s = scenario_for(n, n / 4);
  const ExtendedGrouping eg = extend_with_virtuals(init_grouping(s), s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_graph(eg, s));
  }
}
BENCHMARK(BM_BuildGraph)->Arg(16)->Arg(64)->Arg(256);

void BM_FindLoopGreedy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Scenario s = scenario_for(n, n / 4);
  const ExtendedGrouping eg = extend_with_virtuals(init_grouping(s), s);
  const GroupingGraph g = build_graph(eg, s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_loop_greedy(g, eg, 5.0, {}, 1e-9));
  }
}
BENCHMARK(BM_FindLoopGreedy)->Arg(16)->Arg(64)->Arg(256);

void BM_FindLoopLabelCorrecting(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Scenario s = scenario_for(n, n / 4);
  const ExtendedGrouping eg = extend_with_virtuals(init_grouping(s), s);
  const GroupingGraph g = build_graph(eg, s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_loop_label_correcting(g, eg, 1e-9));
  }
}
BENCHMARK(BM_FindLoopLabelCorrecting)->Arg(16)->Arg(64)->Arg(256);

void BM_FindLoopExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Scenario s = scenario_for(n, 4);
  const ExtendedGrouping eg = extend_with_virtuals(init_grouping(s), s);
  const GroupingGraph g = build_graph(eg, s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_loop_bellman_ford(g, eg, 1e-9));
  }
}
BENCHMARK(BM_FindLoopExact)->Arg(16)->Arg(64);

void BM_SolveGreedy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Scenario s = scenario_for(n, n / 4);
  SolverConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(s, cfg));
  }
}
BENCHMARK(BM_SolveGreedy)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

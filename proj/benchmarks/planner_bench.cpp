/*
 * Copyright 2026 The avmap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "avmap/pipeline.hpp"
#include "avmap/planner.hpp"

using namespace avmap;

namespace {

PlanProblem bench_problem(int positions, int rays_per_position) {
  BenchInstanceSpec spec;
  spec.positions = positions;
  spec.rays_per_position = rays_per_position;
  spec.grid_n = 32;
  spec.budget = 50;
  spec.seed = 1;
  return build_bench_instance(spec);
}

}  // namespace

static void BM_GreedyPlan(benchmark::State& state) {
  const PlanProblem problem =
      bench_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::uint64_t evaluations = 0;
  for (auto _ : state) {
    const PlanResult r = greedy_plan(problem);
    evaluations = r.evaluations;
    benchmark::DoNotOptimize(r.final_loss);
  }
  state.counters["evals"] = static_cast<double>(evaluations);
}
BENCHMARK(BM_GreedyPlan)->Args({2, 200})->Args({5, 500})->Args({5, 1000})->Unit(benchmark::kMillisecond);

static void BM_PrioritizedGreedyPlan(benchmark::State& state) {
  const PlanProblem problem =
      bench_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::uint64_t evaluations = 0;
  for (auto _ : state) {
    const PlanResult r = prioritized_greedy_plan(problem);
    evaluations = r.evaluations;
    benchmark::DoNotOptimize(r.final_loss);
  }
  state.counters["evals"] = static_cast<double>(evaluations);
}
BENCHMARK(BM_PrioritizedGreedyPlan)
    ->Args({2, 200})
    ->Args({5, 500})
    ->Args({5, 1000})
    ->Unit(benchmark::kMillisecond);

static void BM_CoverageProbability(benchmark::State& state) {
  const VoxelGrid grid(64, 64, 32, 0.25);
  ConfidenceMap estimate(grid, 0.3);
  const auto traversal = traverse(grid, {0.1, 8.0, 4.0}, {0.9, 0.3, 0.1}, 16.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coverage_probability(estimate, traversal));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(traversal.size()));
}
BENCHMARK(BM_CoverageProbability);

static void BM_Traverse(benchmark::State& state) {
  const VoxelGrid grid(128, 128, 32, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(traverse(grid, {0.1, 16.0, 4.0}, {0.8, 0.55, 0.1}, 30.0));
  }
}
BENCHMARK(BM_Traverse);

BENCHMARK_MAIN();

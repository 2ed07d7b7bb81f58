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

#ifndef AVMAP_PLANNER_HPP_
#define AVMAP_PLANNER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "avmap/raycast.hpp"

namespace avmap {

struct PlanRay {
  int ray_id = 0;
  int position = 0;
  CoverageVector coverage;  // entries sorted by voxel index inside a PlanProblem
};

/// Budgeted ray-selection instance: pick at most `budget` rays per position so
/// the residual loss sum_i epsilon_i * prod_{selected j} p_ij is minimized.
struct PlanProblem {
  int num_positions = 1;
  int budget = 1;
  std::vector<double> epsilon;
  std::vector<PlanRay> rays;

  /// Sorts coverage entries by voxel index and checks the invariants
  /// (epsilon >= 0, positions in range, budget >= 1, unique ray ids,
  /// p values in [0,1]). Throws std::invalid_argument on violation.
  void normalize();
};

struct PlanResult {
  std::vector<std::vector<int>> selected;   // ray ids per position, in selection order
  std::vector<int> selection_order;         // ray ids in global selection order
  std::vector<double> cost_trace;           // residual loss; [0] is sum(epsilon)
  std::vector<double> selected_deltas;      // fresh loss decrease of each selection
  double final_loss = 0.0;
  std::uint64_t evaluations = 0;            // objective evaluations performed
};

/// Called on every objective evaluation: (ray_id, fresh delta value).
using EvalObserver = std::function<void(int, double)>;

/// Loss decrease of selecting a ray at residual losses b:
/// delta = sum over coverage entries of b_i * (1 - p_ij).
double delta(const std::vector<double>& residual, const CoverageVector& coverage);

/// sum_i epsilon_i * prod_j p_ij (implicit p = 1 off each ray's support).
double expected_loss(const std::vector<double>& epsilon,
                     const std::vector<CoverageVector>& rays);
double expected_loss(const std::vector<double>& epsilon, const PlanProblem& problem,
                     const std::vector<std::vector<int>>& selected);

/// Naive greedy: every iteration evaluates every available ray, selects the
/// largest loss decrease (smallest ray id on ties), and closes a position once
/// its budget fills. Runs until no ray remains available.
PlanResult greedy_plan(const PlanProblem& problem, const EvalObserver& observer = {});

/// Lazy variant: rays stay sorted by stale priority; per iteration priorities
/// are refreshed in stale order until the freshest value strictly exceeds the
/// next stale one, which is sound because loss decreases never grow as rays
/// are selected. Produces selections and cost traces identical to greedy_plan.
PlanResult prioritized_greedy_plan(const PlanProblem& problem, const EvalObserver& observer = {});

/// Plan problem text format, exact round trip:
///   line 1: num_positions budget ray_count voxel_count
///   line 2: epsilon values
///   then per ray: ray_id position i:p i:p ...
void save_problem(const std::filesystem::path& path, const PlanProblem& problem);
PlanProblem load_problem(const std::filesystem::path& path);

struct RandomProblemSpec {
  int max_positions = 3;
  int max_budget = 2;
  int max_rays = 12;
  int max_voxels = 64;
  int max_support = 8;     // coverage entries per ray
};

/// Seeded random instance for oracle tests, fuzzing, and reports.
PlanProblem make_random_problem(const RandomProblemSpec& spec, std::mt19937_64& gen);

}  // namespace avmap

#endif  // AVMAP_PLANNER_HPP_

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

#ifndef AVMAP_PIPELINE_HPP_
#define AVMAP_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "avmap/bounds.hpp"
#include "avmap/planner.hpp"
#include "avmap/reconstruction.hpp"
#include "avmap/roc.hpp"
#include "avmap/worldgen.hpp"

namespace avmap {

struct Trajectory {
  std::vector<SensorPose> poses;
  int horizon = 5;        // planning lookahead L, in positions
  double max_step = 5.0;  // largest allowed distance between consecutive poses

  void validate() const;
};

struct TrajectorySpec {
  Vec3 start{2.0, 12.0, 1.25};
  Vec3 step{2.0, 0.0, 0.0};
  int count = 10;
  double yaw = 0.0;
  int horizon = 5;
};

Trajectory make_trajectory(const TrajectorySpec& spec);

enum class PlannerKind { kRandom, kGreedy, kPrioritized };

const char* planner_name(PlannerKind kind);
PlannerKind planner_from_name(const std::string& name);

struct EpisodeConfig {
  int budget = 50;  // K rays fired per position
  RayBundle bundle{120.0, 90.0, 40, 30};
  double max_range = 12.0;
  PlannerKind planner = PlannerKind::kPrioritized;
  std::uint64_t seed = 0;
  LocalGridSpec local;
  double confidence_clamp = kDefaultConfidenceClamp;
  bool freespace_on_miss = false;
  bool coverage_includes_self = true;
};

struct StepStats {
  int pose_index = 0;
  int rays_fired = 0;
  int valid_hits = 0;
  // Fields below describe the planning call made at this step for the next
  // positions; zero on the last step, which plans nothing.
  double pre_plan_entropy = 0.0;       // sum of epsilon at planning time
  double planned_expected_loss = 0.0;  // objective value of the chosen rays
  std::uint64_t plan_evaluations = 0;
  double plan_seconds = 0.0;           // wall clock; never serialized
};

struct EpisodeResult {
  ConfidenceMap confidence;  // final global estimate
  EvidenceMap evidence;      // final sparse measurements
  std::vector<StepStats> steps;
  double measured_fraction = 0.0;
};

/// Runs the measure-reconstruct-plan loop over the trajectory. The first
/// position fires seeded uniform random rays; afterwards each step executes
/// the next position's rays from the plan made one step earlier and re-plans
/// over the upcoming horizon. When `dataset_out` is given, every visited
/// position appends its (local evidence, local labels) training pair.
EpisodeResult run_episode(const GroundTruthMap& world, const Trajectory& traj,
                          const MappingModel& model, const EpisodeConfig& cfg,
                          std::vector<TrainExample>* dataset_out = nullptr);

/// Coverage vectors and entropy losses for all bundle rays over the horizon
/// poses, against the current confidence map.
PlanProblem build_plan_problem(const ConfidenceMap& estimate,
                               const std::vector<SensorPose>& horizon_poses,
                               const std::vector<Vec3>& directions, int budget,
                               double max_range, bool coverage_includes_self = true);

struct LearnConfig {
  TrainConfig train;
  EpisodeConfig episode;
  int max_rounds = 4;                // re-planning rounds after theta^0
  double min_rel_improvement = 1e-3; // validation-loss stop threshold
  FeatureSpec feature_spec;
};

struct LearnResult {
  std::vector<MappingModel> models;               // theta^0 .. theta^t
  std::vector<double> val_losses;                 // one per model
  std::vector<std::vector<double>> train_losses;  // per model, per epoch
};

/// Iterative coupled learning: theta^0 trains on randomly measured data;
/// each later round regenerates the dataset by running the pipeline with the
/// previous model and the prioritized planner, then retrains. Stops when the
/// validation loss fails to improve by `min_rel_improvement` (the
/// non-improving model is discarded) or after `max_rounds` rounds.
LearnResult learn_active_mapping(const std::vector<GroundTruthMap>& train_worlds,
                                 const std::vector<GroundTruthMap>& val_worlds,
                                 const Trajectory& traj, const LearnConfig& cfg);

struct PolicyRunMetrics {
  double auc = 0.0;
  double measured_fraction = 0.0;
  std::uint64_t plan_evaluations = 0;
  double plan_seconds = 0.0;
};

struct ComparisonRow {
  std::size_t world_index = 0;
  PolicyRunMetrics random_arm;   // theta^0 with random rays
  PolicyRunMetrics coupled_arm;  // final theta with prioritized planning
};

struct ComparisonSummary {
  std::vector<ComparisonRow> rows;
  double median_auc_random = 0.0;
  double median_auc_coupled = 0.0;
};

/// Paired evaluation of the random and coupled policies on identical worlds
/// and seeds. Worlds are independent; `jobs` caps parallel workers and the
/// result is identical for any worker count.
ComparisonSummary compare_policies(const std::vector<GroundTruthMap>& test_worlds,
                                   const Trajectory& traj, const MappingModel& theta0,
                                   const MappingModel& theta_final, const EpisodeConfig& cfg,
                                   int jobs = 1);

/// Writes confidence.avm, evidence.avm, metrics.csv, and summary.json into
/// `dir`. Output bytes depend only on inputs and seed; wall-clock fields are
/// deliberately left out.
void write_episode_outputs(const std::filesystem::path& dir, const GroundTruthMap& world,
                           const Trajectory& traj, const EpisodeConfig& cfg,
                           const EpisodeResult& result);

struct BenchInstanceSpec {
  int positions = 5;
  int rays_per_position = 1000;
  int grid_n = 32;
  double resolution = 0.25;
  int budget = 50;
  double max_range = 8.0;
  std::uint64_t seed = 0;
};

/// Planner instance with geometric coverage vectors: random sensor directions
/// cast through a cubic grid holding a seeded random confidence map.
PlanProblem build_bench_instance(const BenchInstanceSpec& spec);

double median(std::vector<double> values);

}  // namespace avmap

#endif  // AVMAP_PIPELINE_HPP_

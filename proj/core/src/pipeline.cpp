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

#include "avmap/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "avmap/map_io.hpp"
#include "avmap/rng.hpp"

namespace avmap {

void Trajectory::validate() const {
  if (poses.empty()) throw std::invalid_argument("Trajectory: needs at least one pose");
  if (horizon < 1) throw std::invalid_argument("Trajectory: horizon must be >= 1");
  for (std::size_t i = 1; i < poses.size(); ++i) {
    if ((poses[i].position - poses[i - 1].position).norm() > max_step) {
      throw std::invalid_argument("Trajectory: step " + std::to_string(i) +
                                  " exceeds max_step");
    }
  }
}

Trajectory make_trajectory(const TrajectorySpec& spec) {
  if (spec.count < 1) throw std::invalid_argument("make_trajectory: count must be >= 1");
  Trajectory traj;
  traj.horizon = spec.horizon;
  for (int i = 0; i < spec.count; ++i) {
    SensorPose pose;
    pose.position = spec.start + spec.step * static_cast<double>(i);
    pose.yaw = spec.yaw;
    traj.poses.push_back(pose);
  }
  traj.max_step = std::max(traj.max_step, spec.step.norm() * 1.01);
  traj.validate();
  return traj;
}

const char* planner_name(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::kRandom: return "random";
    case PlannerKind::kGreedy: return "greedy";
    case PlannerKind::kPrioritized: return "prioritized";
  }
  return "unknown";
}

PlannerKind planner_from_name(const std::string& name) {
  if (name == "random") return PlannerKind::kRandom;
  if (name == "greedy") return PlannerKind::kGreedy;
  if (name == "prioritized") return PlannerKind::kPrioritized;
  throw std::invalid_argument("unknown planner: " + name);
}

PlanProblem build_plan_problem(const ConfidenceMap& estimate,
                               const std::vector<SensorPose>& horizon_poses,
                               const std::vector<Vec3>& directions, int budget,
                               double max_range, bool coverage_includes_self) {
  PlanProblem problem;
  problem.num_positions = static_cast<int>(horizon_poses.size());
  problem.budget = budget;
  problem.epsilon = entropy_loss_vector(estimate);
  problem.rays.reserve(horizon_poses.size() * directions.size());
  for (std::size_t h = 0; h < horizon_poses.size(); ++h) {
    const Mat3 rot = horizon_poses[h].rotation();
    for (std::size_t d = 0; d < directions.size(); ++d) {
      PlanRay ray;
      ray.ray_id = static_cast<int>(h * directions.size() + d);
      ray.position = static_cast<int>(h);
      const auto traversal =
          traverse(estimate.grid, horizon_poses[h].position, rot * directions[d], max_range);
      ray.coverage = coverage_probability(estimate, traversal, coverage_includes_self);
      problem.rays.push_back(std::move(ray));
    }
  }
  problem.normalize();
  return problem;
}

namespace {

double vector_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s;
}

// Expected loss of firing `dir_indices` from `pose` against the current map.
double sampled_set_expected_loss(const ConfidenceMap& estimate, const SensorPose& pose,
                                 const std::vector<Vec3>& directions,
                                 const std::vector<int>& dir_indices, double max_range,
                                 bool includes_self, const std::vector<double>& epsilon) {
  const Mat3 rot = pose.rotation();
  std::vector<CoverageVector> rays;
  rays.reserve(dir_indices.size());
  for (const int d : dir_indices) {
    const auto traversal = traverse(estimate.grid, pose.position,
                                    rot * directions[static_cast<std::size_t>(d)], max_range);
    rays.push_back(coverage_probability(estimate, traversal, includes_self));
  }
  return expected_loss(epsilon, rays);
}

}  // namespace

EpisodeResult run_episode(const GroundTruthMap& world, const Trajectory& traj,
                          const MappingModel& model, const EpisodeConfig& cfg,
                          std::vector<TrainExample>* dataset_out) {
  traj.validate();
  if (cfg.budget < 1) throw std::invalid_argument("run_episode: budget must be >= 1");
  if (cfg.budget > cfg.bundle.count()) {
    throw std::invalid_argument("run_episode: budget exceeds bundle direction count");
  }
  if (static_cast<int>(model.theta.size()) != model.spec.feature_length()) {
    throw std::invalid_argument("run_episode: model does not match its feature spec");
  }

  const std::vector<Vec3> directions = cfg.bundle.directions();
  std::mt19937_64 gen(mix_seed(cfg.seed, 0xA3D1F00DULL));

  EpisodeResult result;
  result.confidence = ConfidenceMap(world.grid);
  result.evidence = EvidenceMap(world.grid);

  // The first position always measures uniform random rays; there is no map
  // to plan against yet.
  std::vector<int> next_rays =
      sample_without_replacement(cfg.bundle.count(), cfg.budget, gen);

  for (std::size_t l = 0; l < traj.poses.size(); ++l) {
    const SensorPose& pose = traj.poses[l];
    StepStats stats;
    stats.pose_index = static_cast<int>(l);
    stats.rays_fired = static_cast<int>(next_rays.size());

    for (const int d : next_rays) {
      const Measurement m = synthesize_measurement(
          world, pose, directions[static_cast<std::size_t>(d)], cfg.max_range, d);
      if (m.hit.has_value()) ++stats.valid_hits;
      apply_measurement(result.evidence, m, cfg.freespace_on_miss);
    }

    const EvidenceMap local = extract_local_map(result.evidence, pose, cfg.local);
    if (dataset_out != nullptr) {
      dataset_out->push_back({local, extract_local_labels(world, pose, cfg.local)});
    }
    splat_local_confidence(result.confidence, predict(model, local), pose,
                           cfg.confidence_clamp);

    if (l + 1 < traj.poses.size()) {
      const std::vector<double> epsilon = entropy_loss_vector(result.confidence);
      stats.pre_plan_entropy = vector_sum(epsilon);
      const auto t0 = std::chrono::steady_clock::now();
      if (cfg.planner == PlannerKind::kRandom) {
        next_rays = sample_without_replacement(cfg.bundle.count(), cfg.budget, gen);
        stats.planned_expected_loss = sampled_set_expected_loss(
            result.confidence, traj.poses[l + 1], directions, next_rays, cfg.max_range,
            cfg.coverage_includes_self, epsilon);
      } else {
        const std::size_t horizon_end =
            std::min(traj.poses.size(), l + 1 + static_cast<std::size_t>(traj.horizon));
        const std::vector<SensorPose> horizon_poses(traj.poses.begin() + static_cast<std::ptrdiff_t>(l + 1),
                                                    traj.poses.begin() + static_cast<std::ptrdiff_t>(horizon_end));
        PlanProblem problem = build_plan_problem(result.confidence, horizon_poses, directions,
                                                 cfg.budget, cfg.max_range,
                                                 cfg.coverage_includes_self);
        const PlanResult plan = cfg.planner == PlannerKind::kGreedy
                                    ? greedy_plan(problem)
                                    : prioritized_greedy_plan(problem);
        stats.planned_expected_loss = plan.final_loss;
        stats.plan_evaluations = plan.evaluations;
        next_rays.clear();
        for (const int ray_id : plan.selected[0]) {
          next_rays.push_back(ray_id % static_cast<int>(directions.size()));
        }
      }
      stats.plan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    result.steps.push_back(stats);
  }
  result.measured_fraction = result.evidence.measured_fraction();
  return result;
}

namespace {

double normalized_validation_loss(const GroundTruthMap& world, const ConfidenceMap& estimate) {
  const LossWeights w = class_balanced_weights(world);
  double weight_sum = 0.0;
  for (const double v : w.weights) weight_sum += v;
  return weighted_logistic_loss(world, estimate, w) / weight_sum;
}

double validation_loss(const std::vector<GroundTruthMap>& val_worlds, const Trajectory& traj,
                       const MappingModel& model, const EpisodeConfig& base_cfg) {
  double total = 0.0;
  for (std::size_t i = 0; i < val_worlds.size(); ++i) {
    EpisodeConfig cfg = base_cfg;
    cfg.planner = PlannerKind::kPrioritized;
    cfg.seed = mix_seed(base_cfg.seed, 0x7A11DA7EULL + i);
    const EpisodeResult r = run_episode(val_worlds[i], traj, model, cfg);
    total += normalized_validation_loss(val_worlds[i], r.confidence);
  }
  return total / static_cast<double>(val_worlds.size());
}

}  // namespace

LearnResult learn_active_mapping(const std::vector<GroundTruthMap>& train_worlds,
                                 const std::vector<GroundTruthMap>& val_worlds,
                                 const Trajectory& traj, const LearnConfig& cfg) {
  if (train_worlds.empty() || val_worlds.empty()) {
    throw std::invalid_argument("learn_active_mapping: empty world sets");
  }

  const auto collect = [&](const MappingModel& model, PlannerKind planner,
                           std::uint64_t round) {
    std::vector<TrainExample> dataset;
    for (std::size_t w = 0; w < train_worlds.size(); ++w) {
      EpisodeConfig cfg_run = cfg.episode;
      cfg_run.planner = planner;
      cfg_run.seed = mix_seed(cfg.episode.seed, (round << 20) + w);
      run_episode(train_worlds[w], traj, model, cfg_run, &dataset);
    }
    return dataset;
  };

  const auto fit = [&](const std::vector<TrainExample>& dataset, std::uint64_t round,
                       std::vector<double>& losses_out) {
    MappingModel model = make_zero_model(cfg.feature_spec, mix_seed(cfg.train.seed, round));
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.train.seed, round);
    losses_out = train(model, dataset, tc);
    return model;
  };

  LearnResult result;

  // Round 0: random measurements, no planner in the loop.
  const MappingModel zero = make_zero_model(cfg.feature_spec);
  std::vector<double> losses;
  const std::vector<TrainExample> d0 = collect(zero, PlannerKind::kRandom, 0);
  MappingModel current = fit(d0, 0, losses);
  result.models.push_back(current);
  result.train_losses.push_back(losses);
  result.val_losses.push_back(validation_loss(val_worlds, traj, current, cfg.episode));

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    const std::vector<TrainExample> dt =
        collect(current, PlannerKind::kPrioritized, static_cast<std::uint64_t>(round));
    std::vector<double> round_losses;
    MappingModel next = fit(dt, static_cast<std::uint64_t>(round), round_losses);
    const double val = validation_loss(val_worlds, traj, next, cfg.episode);
    if (val > result.val_losses.back() * (1.0 - cfg.min_rel_improvement)) {
      break;  // validation stopped improving; discard the non-improving model
    }
    current = std::move(next);
    result.models.push_back(current);
    result.train_losses.push_back(round_losses);
    result.val_losses.push_back(val);
  }
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ComparisonSummary compare_policies(const std::vector<GroundTruthMap>& test_worlds,
                                   const Trajectory& traj, const MappingModel& theta0,
                                   const MappingModel& theta_final, const EpisodeConfig& cfg,
                                   int jobs) {
  if (test_worlds.empty()) {
    throw std::invalid_argument("compare_policies: needs at least one test world");
  }
  ComparisonSummary summary;
  summary.rows.resize(test_worlds.size());

  const auto evaluate_world = [&](std::size_t w) {
    const GroundTruthMap& world = test_worlds[w];
    RocExclusion exclusion;
    exclusion.measurable = measurable_mask(world, traj.poses, cfg.bundle, cfg.max_range);

    const auto run_arm = [&](const MappingModel& model, PlannerKind planner) {
      EpisodeConfig arm_cfg = cfg;
      arm_cfg.planner = planner;
      arm_cfg.seed = mix_seed(cfg.seed, w);
      const EpisodeResult r = run_episode(world, traj, model, arm_cfg);
      PolicyRunMetrics m;
      m.auc = roc_curve(world, r.confidence, exclusion).auc;
      m.measured_fraction = r.measured_fraction;
      for (const StepStats& s : r.steps) {
        m.plan_evaluations += s.plan_evaluations;
        m.plan_seconds += s.plan_seconds;
      }
      return m;
    };

    ComparisonRow row;
    row.world_index = w;
    row.random_arm = run_arm(theta0, PlannerKind::kRandom);
    row.coupled_arm = run_arm(theta_final, PlannerKind::kPrioritized);
    summary.rows[w] = row;
  };

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t w = next.fetch_add(1); w < test_worlds.size(); w = next.fetch_add(1)) {
      evaluate_world(w);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs && t < static_cast<int>(test_worlds.size()); ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<double> auc_random, auc_coupled;
  for (const ComparisonRow& row : summary.rows) {
    auc_random.push_back(row.random_arm.auc);
    auc_coupled.push_back(row.coupled_arm.auc);
  }
  summary.median_auc_random = median(auc_random);
  summary.median_auc_coupled = median(auc_coupled);
  return summary;
}

void write_episode_outputs(const std::filesystem::path& dir, const GroundTruthMap& world,
                           const Trajectory& traj, const EpisodeConfig& cfg,
                           const EpisodeResult& result) {
  std::filesystem::create_directories(dir);
  save_map(dir / "confidence.avm", result.confidence);
  save_map(dir / "evidence.avm", result.evidence);

  std::ofstream csv(dir / "metrics.csv");
  if (!csv) throw std::runtime_error("write_episode_outputs: cannot write metrics.csv");
  char buf[64];
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  csv << "pose,rays_fired,valid_hits,pre_plan_entropy,planned_expected_loss,plan_evaluations\n";
  for (const StepStats& s : result.steps) {
    csv << s.pose_index << ',' << s.rays_fired << ',' << s.valid_hits << ','
        << fmt(s.pre_plan_entropy) << ',' << fmt(s.planned_expected_loss) << ','
        << s.plan_evaluations << '\n';
  }

  RocExclusion exclusion;
  exclusion.measurable = measurable_mask(world, traj.poses, cfg.bundle, cfg.max_range);
  const RocCurve roc = roc_curve(world, result.confidence, exclusion);

  nlohmann::ordered_json summary;
  summary["planner"] = planner_name(cfg.planner);
  summary["seed"] = cfg.seed;
  summary["budget"] = cfg.budget;
  summary["confidence_clamp"] = cfg.confidence_clamp;
  summary["positions"] = result.steps.size();
  summary["measured_fraction"] = result.measured_fraction;
  summary["auc"] = roc.auc;
  summary["final_entropy"] =
      result.steps.empty() ? 0.0 : result.steps.back().pre_plan_entropy;
  std::vector<double> planned;
  for (const StepStats& s : result.steps) planned.push_back(s.planned_expected_loss);
  summary["planned_expected_loss"] = planned;

  std::ofstream json_out(dir / "summary.json");
  if (!json_out) throw std::runtime_error("write_episode_outputs: cannot write summary.json");
  json_out << summary.dump(2) << '\n';
}

PlanProblem build_bench_instance(const BenchInstanceSpec& spec) {
  const double extent = spec.grid_n * spec.resolution;
  const VoxelGrid grid(spec.grid_n, spec.grid_n, spec.grid_n, spec.resolution);
  ConfidenceMap estimate(grid);
  std::mt19937_64 gen(mix_seed(spec.seed, 0xBE7C4));
  for (double& c : estimate.confidence) c = uniform_real(gen, -2.0, 2.0);

  PlanProblem problem;
  problem.num_positions = spec.positions;
  problem.budget = spec.budget;
  problem.epsilon = entropy_loss_vector(estimate);
  for (int p = 0; p < spec.positions; ++p) {
    const Vec3 origin{extent * (p + 1.0) / (spec.positions + 1.0), extent / 2.0, extent / 2.0};
    for (int r = 0; r < spec.rays_per_position; ++r) {
      // Uniform direction on the sphere.
      const double z = uniform_real(gen, -1.0, 1.0);
      const double phi = uniform_real(gen, 0.0, 2.0 * M_PI);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      const Vec3 dir{s * std::cos(phi), s * std::sin(phi), z};
      PlanRay ray;
      ray.ray_id = p * spec.rays_per_position + r;
      ray.position = p;
      ray.coverage =
          coverage_probability(estimate, traverse(grid, origin, dir, spec.max_range), true);
      problem.rays.push_back(std::move(ray));
    }
  }
  problem.normalize();
  return problem;
}

}  // namespace avmap

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

// avmap command-line interface. One binary, one subcommand per task:
//   gen-world, run-episode, learn, bench-planner, bounds-report, roc,
//   fig3-curve.
// Values come from built-in defaults, then an optional --config file, then
// explicit flags (flags win). Exit codes: 0 ok, 1 usage, 2 invariant breach,
// 3 I/O. Wall-clock timings go to stdout only, never into output files, so
// reruns with the same seed produce byte-identical outputs.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "avmap/bounds.hpp"
#include "avmap/config.hpp"
#include "avmap/map_io.hpp"
#include "avmap/pipeline.hpp"
#include "avmap/rng.hpp"

namespace fs = std::filesystem;
using namespace avmap;

namespace {

struct InvariantBreach : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(now() - t0).count();
}

// Per-command state shared by the option plumbing below.
struct CommandContext {
  CLI::App* cmd = nullptr;
  std::string config_path;
  std::uint64_t seed = 0;
  Config config;

  void add_common(CLI::App* sub) {
    cmd = sub;
    sub->add_option("--seed", seed, "Random seed (default 0)");
    sub->add_option("--config", config_path, "key = value config file");
  }

  void load_config() {
    if (!config_path.empty()) config = Config::from_file(config_path);
    if (cmd->count("--seed") == 0) seed = config.get_u64("seed", seed);
  }

  // Flag value if given on the command line, else config value, else default.
  double num(const std::string& flag, const std::string& key, double value) const {
    return cmd->count(flag) > 0 ? value : config.get_double(key, value);
  }
  int num_i(const std::string& flag, const std::string& key, int value) const {
    return cmd->count(flag) > 0 ? value : config.get_int(key, value);
  }
  std::string str(const std::string& flag, const std::string& key, std::string value) const {
    return cmd->count(flag) > 0 ? value : config.get_string(key, value);
  }
  bool boolean(const std::string& flag, const std::string& key, bool value) const {
    return cmd->count(flag) > 0 ? value : config.get_bool(key, value);
  }
};

WorldSpec world_spec_from(const CommandContext& ctx) {
  WorldSpec spec;
  spec.nx = ctx.config.get_int("world_nx", spec.nx);
  spec.ny = ctx.config.get_int("world_ny", spec.ny);
  spec.nz = ctx.config.get_int("world_nz", spec.nz);
  spec.resolution = ctx.config.get_double("world_resolution", spec.resolution);
  spec.ground_level = ctx.config.get_int("world_ground_level", spec.ground_level);
  spec.object_density_per_m2 =
      ctx.config.get_double("world_object_density", spec.object_density_per_m2);
  spec.box_fraction = ctx.config.get_double("world_box_fraction", spec.box_fraction);
  return spec;
}

EpisodeConfig episode_config_from(const CommandContext& ctx) {
  EpisodeConfig cfg;
  cfg.budget = ctx.config.get_int("budget", cfg.budget);
  cfg.bundle.fov_h_deg = ctx.config.get_double("fov_h_deg", cfg.bundle.fov_h_deg);
  cfg.bundle.fov_v_deg = ctx.config.get_double("fov_v_deg", cfg.bundle.fov_v_deg);
  cfg.bundle.count_h = ctx.config.get_int("bundle_h", cfg.bundle.count_h);
  cfg.bundle.count_v = ctx.config.get_int("bundle_v", cfg.bundle.count_v);
  cfg.max_range = ctx.config.get_double("max_range", cfg.max_range);
  cfg.planner = planner_from_name(ctx.config.get_string("planner", planner_name(cfg.planner)));
  cfg.confidence_clamp = ctx.config.get_double("confidence_clamp", cfg.confidence_clamp);
  cfg.freespace_on_miss = ctx.config.get_bool("freespace_on_miss", cfg.freespace_on_miss);
  cfg.coverage_includes_self =
      ctx.config.get_bool("coverage_includes_self", cfg.coverage_includes_self);
  cfg.local.nx = ctx.config.get_int("local_nx", cfg.local.nx);
  cfg.local.ny = ctx.config.get_int("local_ny", cfg.local.ny);
  cfg.local.nz = ctx.config.get_int("local_nz", cfg.local.nz);
  cfg.local.resolution = ctx.config.get_double("local_resolution", cfg.local.resolution);
  cfg.local.origin.x = ctx.config.get_double("local_origin_x", cfg.local.origin.x);
  cfg.local.origin.y = ctx.config.get_double("local_origin_y", cfg.local.origin.y);
  cfg.local.origin.z = ctx.config.get_double("local_origin_z", cfg.local.origin.z);
  cfg.seed = ctx.seed;
  return cfg;
}

TrajectorySpec trajectory_spec_from(const CommandContext& ctx) {
  TrajectorySpec spec;
  spec.start.x = ctx.config.get_double("traj_start_x", spec.start.x);
  spec.start.y = ctx.config.get_double("traj_start_y", spec.start.y);
  spec.start.z = ctx.config.get_double("traj_start_z", spec.start.z);
  spec.step.x = ctx.config.get_double("traj_step_x", spec.step.x);
  spec.step.y = ctx.config.get_double("traj_step_y", spec.step.y);
  spec.step.z = ctx.config.get_double("traj_step_z", spec.step.z);
  spec.count = ctx.config.get_int("traj_count", spec.count);
  spec.yaw = ctx.config.get_double("traj_yaw", spec.yaw);
  spec.horizon = ctx.config.get_int("horizon", spec.horizon);
  return spec;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

// ---------------------------------------------------------------------------
// gen-world

int run_gen_world(const CommandContext& ctx, const std::string& out_path,
                  const std::string& scans_path, const std::string& poses_path,
                  double tau_frac) {
  if (scans_path.empty() != poses_path.empty()) {
    throw std::invalid_argument("--from-scans and --poses must be given together");
  }
  GroundTruthMap world;
  if (!scans_path.empty()) {
    const WorldSpec spec = world_spec_from(ctx);
    const VoxelGrid grid(spec.nx, spec.ny, spec.nz, spec.resolution, spec.origin);
    GroundTruthBuildStats stats;
    world = build_ground_truth(load_scans(scans_path, poses_path), grid, tau_frac, &stats);
    std::cout << "ingested scans, skipped " << stats.skipped_points
              << " out-of-bounds points\n";
  } else {
    world = generate_world(world_spec_from(ctx), ctx.seed);
  }
  save_map(out_path, world);
  std::size_t occupied = 0;
  for (const Occupancy l : world.labels) occupied += l == Occupancy::kOccupied;
  std::cout << "wrote " << out_path << " (" << world.grid.nx() << "x" << world.grid.ny() << "x"
            << world.grid.nz() << ", occupied fraction "
            << fmt9(static_cast<double>(occupied) / static_cast<double>(world.labels.size()))
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run-episode

int run_run_episode(const CommandContext& ctx, const std::string& world_path,
                    const std::string& model_path, const std::string& out_dir,
                    const std::string& planner_flag, int budget_flag) {
  const GroundTruthMap world = load_ground_truth(world_path);
  EpisodeConfig cfg = episode_config_from(ctx);
  if (!planner_flag.empty()) cfg.planner = planner_from_name(planner_flag);
  if (budget_flag > 0) cfg.budget = budget_flag;
  const Trajectory traj = make_trajectory(trajectory_spec_from(ctx));
  const MappingModel model = model_path.empty()
                                 ? make_zero_model(FeatureSpec{ctx.config.get_int("feature_radius", 2)})
                                 : load_model(model_path);
  const auto t0 = now();
  const EpisodeResult result = run_episode(world, traj, model, cfg);
  const double elapsed = seconds_since(t0);
  write_episode_outputs(out_dir, world, traj, cfg, result);

  double plan_seconds = 0.0;
  for (const StepStats& s : result.steps) plan_seconds += s.plan_seconds;
  std::cout << "episode done in " << fmt9(elapsed) << " s (planning " << fmt9(plan_seconds)
            << " s), measured fraction " << fmt9(result.measured_fraction) << ", outputs in "
            << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// learn

int run_learn(const CommandContext& ctx, const std::string& out_dir, int train_worlds,
              int val_worlds, int test_worlds, int rounds, int epochs, int jobs) {
  const WorldSpec wspec = world_spec_from(ctx);
  const auto make_worlds = [&](int count, std::uint64_t stream) {
    std::vector<GroundTruthMap> worlds;
    for (int i = 0; i < count; ++i) {
      worlds.push_back(generate_world(wspec, mix_seed(ctx.seed, stream + static_cast<std::uint64_t>(i))));
    }
    return worlds;
  };

  LearnConfig cfg;
  cfg.feature_spec.radius = ctx.config.get_int("feature_radius", cfg.feature_spec.radius);
  cfg.episode = episode_config_from(ctx);
  cfg.max_rounds = rounds;
  cfg.train.epochs = epochs;
  cfg.train.seed = mix_seed(ctx.seed, 0x7EA0ULL);
  cfg.train.momentum = ctx.config.get_double("momentum", cfg.train.momentum);
  cfg.train.learning_rate.base = ctx.config.get_double("learning_rate", cfg.train.learning_rate.base);
  cfg.train.learning_rate.decay = ctx.config.get_double("learning_rate_decay", cfg.train.learning_rate.decay);
  cfg.train.learning_rate.period = ctx.config.get_int("learning_rate_period", cfg.train.learning_rate.period);
  cfg.min_rel_improvement = ctx.config.get_double("min_rel_improvement", cfg.min_rel_improvement);

  const Trajectory traj = make_trajectory(trajectory_spec_from(ctx));

  const auto t0 = now();
  const LearnResult result = learn_active_mapping(make_worlds(train_worlds, 0xA000),
                                                  make_worlds(val_worlds, 0xB000),
                                                  traj, cfg);
  std::cout << "trained " << result.models.size() << " models in " << fmt9(seconds_since(t0))
            << " s\n";

  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < result.models.size(); ++i) {
    save_model(fs::path(out_dir) / ("model_" + std::to_string(i) + ".model"), result.models[i]);
  }
  save_model(fs::path(out_dir) / "model_final.model", result.models.back());

  {
    auto log = open_out(fs::path(out_dir) / "learning_log.csv");
    log << "model,val_loss,final_train_loss\n";
    for (std::size_t i = 0; i < result.models.size(); ++i) {
      log << i << ',' << fmt9(result.val_losses[i]) << ','
          << fmt9(result.train_losses[i].back()) << '\n';
    }
  }

  if (test_worlds > 0) {
    const ComparisonSummary cmp = compare_policies(make_worlds(test_worlds, 0xC000), traj,
                                                   result.models.front(), result.models.back(),
                                                   cfg.episode, jobs);
    auto csv = open_out(fs::path(out_dir) / "comparison.csv");
    csv << "world,auc_random,auc_coupled,measured_fraction_random,measured_fraction_coupled,"
           "plan_evals_random,plan_evals_coupled\n";
    for (const ComparisonRow& row : cmp.rows) {
      csv << row.world_index << ',' << fmt9(row.random_arm.auc) << ','
          << fmt9(row.coupled_arm.auc) << ',' << fmt9(row.random_arm.measured_fraction) << ','
          << fmt9(row.coupled_arm.measured_fraction) << ',' << row.random_arm.plan_evaluations
          << ',' << row.coupled_arm.plan_evaluations << '\n';
    }
    nlohmann::ordered_json summary;
    summary["models"] = result.models.size();
    summary["val_losses"] = result.val_losses;
    summary["median_auc_random"] = cmp.median_auc_random;
    summary["median_auc_coupled"] = cmp.median_auc_coupled;
    auto json_out = open_out(fs::path(out_dir) / "summary.json");
    json_out << summary.dump(2) << '\n';
    std::cout << "median AUC random " << fmt9(cmp.median_auc_random) << ", coupled "
              << fmt9(cmp.median_auc_coupled) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench-planner

int run_bench_planner(const CommandContext& ctx, int positions, int rays, int grid_n, int budget,
                      double max_range, int repeat, const std::string& out_path,
                      const std::string& timing_path) {
  BenchInstanceSpec spec;
  spec.positions = positions;
  spec.rays_per_position = rays;
  spec.grid_n = grid_n;
  spec.budget = budget;
  spec.max_range = max_range;
  spec.seed = ctx.seed;
  const PlanProblem problem = build_bench_instance(spec);

  auto csv = open_out(out_path);
  csv << "repeat,positions,rays_per_position,grid,budget,naive_evals,prioritized_evals,"
         "eval_ratio\n";
  std::ofstream timing;
  if (!timing_path.empty()) {
    timing = open_out(timing_path);
    timing << "repeat,naive_seconds,prioritized_seconds,speedup\n";
  }

  std::uint64_t first_naive = 0, first_lazy = 0;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = now();
    const PlanResult naive = greedy_plan(problem);
    const double naive_s = seconds_since(t0);
    const auto t1 = now();
    const PlanResult lazy = prioritized_greedy_plan(problem);
    const double lazy_s = seconds_since(t1);

    if (naive.selected != lazy.selected || naive.cost_trace != lazy.cost_trace) {
      throw InvariantBreach("bench-planner: naive and prioritized planners diverged");
    }
    if (lazy.evaluations > naive.evaluations + problem.rays.size()) {
      throw InvariantBreach("bench-planner: prioritized evaluations exceed first-pass bound");
    }
    if (r == 0) {
      first_naive = naive.evaluations;
      first_lazy = lazy.evaluations;
    } else if (naive.evaluations != first_naive || lazy.evaluations != first_lazy) {
      throw InvariantBreach("bench-planner: evaluation counts changed across repeats");
    }

    csv << r << ',' << positions << ',' << rays << ',' << grid_n << ',' << budget << ','
        << naive.evaluations << ',' << lazy.evaluations << ','
        << fmt9(static_cast<double>(naive.evaluations) /
                static_cast<double>(std::max<std::uint64_t>(lazy.evaluations, 1)))
        << '\n';
    if (timing.is_open()) {
      timing << r << ',' << fmt9(naive_s) << ',' << fmt9(lazy_s) << ','
             << fmt9(naive_s / std::max(lazy_s, 1e-12)) << '\n';
    }
    std::cout << "repeat " << r << ": naive " << naive.evaluations << " evals in "
              << fmt9(naive_s) << " s; prioritized " << lazy.evaluations << " evals in "
              << fmt9(lazy_s) << " s; speedup " << fmt9(naive_s / std::max(lazy_s, 1e-12))
              << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bounds-report

int run_bounds_report(const CommandContext& ctx, int instances, const std::string& out_path,
                      int jobs) {
  RandomProblemSpec spec;
  spec.max_positions = ctx.config.get_int("max_positions", spec.max_positions);
  spec.max_budget = ctx.config.get_int("max_budget", spec.max_budget);
  spec.max_rays = ctx.config.get_int("max_rays", spec.max_rays);
  spec.max_voxels = ctx.config.get_int("max_voxels", spec.max_voxels);

  std::vector<BoundReport> reports(static_cast<std::size_t>(instances));
  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (int i = next.fetch_add(1); i < instances; i = next.fetch_add(1)) {
      std::mt19937_64 gen(mix_seed(ctx.seed, static_cast<std::uint64_t>(i)));
      reports[static_cast<std::size_t>(i)] = make_bound_report(make_random_problem(spec, gen));
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  auto csv = open_out(out_path);
  csv << "instance,E,lb_opt,opt,f_greedy,ub_fK,ub_fLK,ub_rho,greedy_evals,prioritized_evals\n";
  for (int i = 0; i < instances; ++i) {
    const BoundReport& r = reports[static_cast<std::size_t>(i)];
    csv << i << ',' << fmt9(r.total_loss) << ',' << fmt9(r.lb_opt) << ',';
    if (r.opt) csv << fmt9(*r.opt);
    csv << ',' << fmt9(r.f_greedy) << ',';
    if (r.ub_fk) csv << fmt9(*r.ub_fk);
    csv << ',';
    if (r.ub_flk) csv << fmt9(*r.ub_flk);
    csv << ',';
    csv << (r.ub_rho ? fmt9(*r.ub_rho) : "unbounded");
    csv << ',' << r.greedy_evaluations << ',' << r.prioritized_evaluations << '\n';
  }
  std::cout << "wrote " << instances << " instance reports to " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// roc

int run_roc(const CommandContext& ctx, const std::string& world_path,
            const std::string& confidence_path, const std::string& out_path, bool no_reach) {
  const GroundTruthMap world = load_ground_truth(world_path);
  const ConfidenceMap estimate = load_confidence(confidence_path);
  const EpisodeConfig cfg = episode_config_from(ctx);

  RocExclusion exclusion;
  if (!no_reach) {
    const Trajectory traj = make_trajectory(trajectory_spec_from(ctx));
    exclusion.measurable = measurable_mask(world, traj.poses, cfg.bundle, cfg.max_range);
  }
  const RocCurve curve = roc_curve(world, estimate, exclusion);

  auto csv = open_out(out_path);
  csv << "threshold,tpr,fpr\n";
  for (const RocPoint& p : curve.points) {
    csv << fmt9(p.threshold) << ',' << fmt9(p.tpr) << ',' << fmt9(p.fpr) << '\n';
  }
  std::cout << "auc " << fmt9(curve.auc) << " over " << curve.points.size() << " thresholds\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fig3-curve

std::vector<double> parse_ratio_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0) {
      throw std::invalid_argument("--ratios expects start:stop:step or a comma list");
    }
    const int steps = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    for (int k = 0; k <= steps; ++k) {
      double r = start + k * step;
      if (std::abs(r - 1.0) < 1e-9) r = 1.0;  // the endpoint is special-cased exactly
      out.push_back(std::min(r, 1.0));
    }
  } else {
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument("--ratios produced an empty grid");
  return out;
}

int run_fig3_curve(const CommandContext&, const std::string& horizons_text,
                   const std::string& ratios_text, const std::string& out_path) {
  std::vector<int> horizons;
  {
    std::istringstream ss(horizons_text);
    std::string item;
    while (std::getline(ss, item, ',')) horizons.push_back(std::stoi(item));
  }
  const std::vector<double> ratios = parse_ratio_grid(ratios_text);

  auto csv = open_out(out_path);
  csv << "horizon,opt_over_e,ub_rho\n";
  for (const int horizon : horizons) {
    std::optional<double> prev;
    for (const double ratio : ratios) {
      const auto value = ratio_bound_curve(ratio, horizon);
      csv << horizon << ',' << fmt9(ratio) << ',' << (value ? fmt9(*value) : "unbounded")
          << '\n';
      if (value && prev && *value > *prev + 1e-12) {
        throw InvariantBreach("fig3-curve: bound increased with opt/E");
      }
      if (value) prev = *value;
    }
  }
  std::cout << "wrote ratio-bound curve for " << horizons.size() << " horizons to " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"avmap: active voxel mapping toolkit"};
  app.require_subcommand(1);

  CommandContext ctx_gen, ctx_ep, ctx_learn, ctx_bench, ctx_bounds, ctx_roc, ctx_fig3;
  std::function<int()> runner;

  // gen-world
  {
    CLI::App* sub = app.add_subcommand(
        "gen-world", "Generate a synthetic ground-truth world (or voxelize scans)");
    ctx_gen.add_common(sub);
    auto out = std::make_shared<std::string>();
    auto scans = std::make_shared<std::string>();
    auto poses = std::make_shared<std::string>();
    auto tau = std::make_shared<double>(kDefaultOccupiedVoteFraction);
    sub->add_option("--out", *out, "Output map file")->required();
    sub->add_option("--from-scans", *scans, "Point records `pose_id x y z` to voxelize");
    sub->add_option("--poses", *poses, "Pose table `id x y z yaw pitch roll`");
    sub->add_option("--tau", *tau, "Occupied-vote fraction for dynamic-object removal");
    sub->callback([&ctx_gen, out, scans, poses, tau, &runner]() {
      runner = [&ctx_gen, out, scans, poses, tau]() {
        ctx_gen.load_config();
        return run_gen_world(ctx_gen, *out, *scans, *poses, *tau);
      };
    });
  }

  // run-episode
  {
    CLI::App* sub =
        app.add_subcommand("run-episode", "Run one measure-reconstruct-plan episode");
    ctx_ep.add_common(sub);
    auto world = std::make_shared<std::string>();
    auto model = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>();
    auto planner = std::make_shared<std::string>();
    auto budget = std::make_shared<int>(0);
    sub->add_option("--world", *world, "Ground-truth map file")->required();
    sub->add_option("--model", *model, "Mapping model file (default: zero model)");
    sub->add_option("--out-dir", *out_dir, "Output directory")->required();
    sub->add_option("--planner", *planner, "random | greedy | prioritized");
    sub->add_option("--budget", *budget, "Rays per position (K)");
    sub->callback([&ctx_ep, world, model, out_dir, planner, budget, &runner]() {
      runner = [&ctx_ep, world, model, out_dir, planner, budget]() {
        ctx_ep.load_config();
        return run_run_episode(ctx_ep, *world, *model, *out_dir, *planner, *budget);
      };
    });
  }

  // learn
  {
    CLI::App* sub = app.add_subcommand(
        "learn", "Iterative coupled learning of the reconstruction model");
    ctx_learn.add_common(sub);
    auto out_dir = std::make_shared<std::string>();
    auto train_n = std::make_shared<int>(3);
    auto val_n = std::make_shared<int>(1);
    auto test_n = std::make_shared<int>(5);
    auto rounds = std::make_shared<int>(2);
    auto epochs = std::make_shared<int>(8);
    auto jobs = std::make_shared<int>(1);
    sub->add_option("--out-dir", *out_dir, "Output directory")->required();
    sub->add_option("--train-worlds", *train_n, "Generated training worlds");
    sub->add_option("--val-worlds", *val_n, "Generated validation worlds");
    sub->add_option("--test-worlds", *test_n, "Generated test worlds for the comparison");
    sub->add_option("--rounds", *rounds, "Re-planning rounds after the initial model");
    sub->add_option("--epochs", *epochs, "Training epochs per round");
    sub->add_option("--jobs", *jobs, "Parallel workers for the test-world comparison");
    sub->callback([&ctx_learn, out_dir, train_n, val_n, test_n, rounds, epochs, jobs, &runner]() {
      runner = [&ctx_learn, out_dir, train_n, val_n, test_n, rounds, epochs, jobs]() {
        ctx_learn.load_config();
        return run_learn(ctx_learn, *out_dir, *train_n, *val_n, *test_n, *rounds, *epochs,
                         std::max(1, *jobs));
      };
    });
  }

  // bench-planner
  {
    CLI::App* sub = app.add_subcommand(
        "bench-planner", "Compare naive and prioritized planner evaluation counts");
    ctx_bench.add_common(sub);
    auto positions = std::make_shared<int>(5);
    auto rays = std::make_shared<int>(1000);
    auto grid_n = std::make_shared<int>(32);
    auto budget = std::make_shared<int>(50);
    auto max_range = std::make_shared<double>(8.0);
    auto repeat = std::make_shared<int>(1);
    auto out = std::make_shared<std::string>("bench.csv");
    auto timing = std::make_shared<std::string>();
    sub->add_option("--positions", *positions, "Positions (L)");
    sub->add_option("--rays", *rays, "Rays per position");
    sub->add_option("--grid", *grid_n, "Cubic grid edge, voxels");
    sub->add_option("--budget", *budget, "Budget per position (K)");
    sub->add_option("--max-range", *max_range, "Ray range, meters");
    sub->add_option("--repeat", *repeat, "Repeat count (counts must match exactly)");
    sub->add_option("--out", *out, "Evaluation-count CSV (deterministic)");
    sub->add_option("--timing-out", *timing, "Optional wall-clock CSV (non-deterministic)");
    sub->callback([&ctx_bench, positions, rays, grid_n, budget, max_range, repeat, out, timing,
                   &runner]() {
      runner = [&ctx_bench, positions, rays, grid_n, budget, max_range, repeat, out, timing]() {
        ctx_bench.load_config();
        return run_bench_planner(ctx_bench, *positions, *rays, *grid_n, *budget, *max_range,
                                 *repeat, *out, *timing);
      };
    });
  }

  // bounds-report
  {
    CLI::App* sub = app.add_subcommand(
        "bounds-report", "Bound certificates for random planning instances");
    ctx_bounds.add_common(sub);
    auto instances = std::make_shared<int>(100);
    auto out = std::make_shared<std::string>("bounds.csv");
    auto jobs = std::make_shared<int>(1);
    sub->add_option("--instances", *instances, "Number of random instances");
    sub->add_option("--out", *out, "Report CSV path");
    sub->add_option("--jobs", *jobs, "Parallel workers (output order is by instance id)");
    sub->callback([&ctx_bounds, instances, out, jobs, &runner]() {
      runner = [&ctx_bounds, instances, out, jobs]() {
        ctx_bounds.load_config();
        return run_bounds_report(ctx_bounds, *instances, *out, std::max(1, *jobs));
      };
    });
  }

  // roc
  {
    CLI::App* sub = app.add_subcommand("roc", "ROC curve of a confidence map against a world");
    ctx_roc.add_common(sub);
    auto world = std::make_shared<std::string>();
    auto confidence = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto no_reach = std::make_shared<bool>(false);
    sub->add_option("--world", *world, "Ground-truth map file")->required();
    sub->add_option("--confidence", *confidence, "Confidence map file")->required();
    sub->add_option("--out", *out, "ROC points CSV")->required();
    sub->add_flag("--no-reach-filter", *no_reach,
                  "Skip the measurable-voxel exclusion (evaluate every labeled voxel)");
    sub->callback([&ctx_roc, world, confidence, out, no_reach, &runner]() {
      runner = [&ctx_roc, world, confidence, out, no_reach]() {
        ctx_roc.load_config();
        return run_roc(ctx_roc, *world, *confidence, *out, *no_reach);
      };
    });
  }

  // fig3-curve
  {
    CLI::App* sub = app.add_subcommand(
        "fig3-curve", "Approximation-ratio bound as a function of opt/E");
    ctx_fig3.add_common(sub);
    auto horizons = std::make_shared<std::string>("1,2,4");
    auto ratios = std::make_shared<std::string>("0.1:0.9:0.1");
    auto out = std::make_shared<std::string>("fig3.csv");
    sub->add_option("--horizons", *horizons, "Comma-separated planning horizons (L)");
    sub->add_option("--ratios", *ratios, "opt/E grid: start:stop:step or comma list");
    sub->add_option("--out", *out, "Curve CSV path");
    sub->callback([&ctx_fig3, horizons, ratios, out, &runner]() {
      runner = [&ctx_fig3, horizons, ratios, out]() {
        ctx_fig3.load_config();
        return run_fig3_curve(ctx_fig3, *horizons, *ratios, *out);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return runner ? runner() : 1;
  } catch (const InvariantBreach& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

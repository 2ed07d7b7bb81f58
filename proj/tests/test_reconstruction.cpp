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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "avmap/reconstruction.hpp"
#include "avmap/rng.hpp"
#include "oracles.hpp"

using namespace avmap;

namespace {

int center_occupied_feature(const FeatureSpec& spec) {
  const int w = spec.window();
  const int r = spec.radius;
  const int center_offset = r * w * w + r * w + r;
  return 3 * center_offset + static_cast<int>(Evidence::kMeasuredOccupied);
}

EvidenceMap random_evidence(const VoxelGrid& grid, std::mt19937_64& gen) {
  EvidenceMap x(grid);
  for (auto& e : x.evidence) e = static_cast<Evidence>(uniform_below(gen, 3));
  return x;
}

// Labels fully determined by the center voxel's evidence.
GroundTruthMap labels_from_center_evidence(const EvidenceMap& x) {
  GroundTruthMap y(x.grid);
  for (std::size_t i = 0; i < y.labels.size(); ++i) {
    y.labels[i] = x.evidence[i] == Evidence::kMeasuredOccupied ? Occupancy::kOccupied
                                                               : Occupancy::kEmpty;
  }
  return y;
}

}  // namespace

TEST_CASE("local map extraction") {
  const VoxelGrid global_grid(8, 8, 4, 0.5);
  EvidenceMap global(global_grid);
  std::mt19937_64 gen(42);
  for (auto& e : global.evidence) e = static_cast<Evidence>(uniform_below(gen, 3));

  LocalGridSpec spec;
  spec.nx = 8;
  spec.ny = 8;
  spec.nz = 4;
  spec.resolution = 0.5;
  spec.origin = {0.0, 0.0, 0.0};

  SUBCASE("identity pose copies the map") {
    const SensorPose pose{{0.0, 0.0, 0.0}, 0.0, 0.0, 0.0};
    const EvidenceMap local = extract_local_map(global, pose, spec);
    CHECK(local.evidence == global.evidence);
  }
  SUBCASE("axis-aligned whole-voxel translation shifts the map") {
    const SensorPose pose{{2 * 0.5, 0.0, 0.0}, 0.0, 0.0, 0.0};
    const EvidenceMap local = extract_local_map(global, pose, spec);
    for (int z = 0; z < 4; ++z) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 6; ++x) {
          CHECK(local.evidence[local.grid.index({x, y, z})] ==
                global.evidence[global_grid.index({x + 2, y, z})]);
        }
        // Out of bounds comes back unmeasured.
        CHECK(local.evidence[local.grid.index({7, y, z})] == Evidence::kUnmeasured);
      }
    }
  }
  SUBCASE("quarter-turn yaw maps local +x onto global +y") {
    EvidenceMap single(global_grid);
    const SensorPose pose{{2.25, 2.25, 0.25}, M_PI / 2.0, 0.0, 0.0};
    single.evidence[*global_grid.index_at({2.25, 3.25, 0.25})] = Evidence::kMeasuredOccupied;

    LocalGridSpec around;
    around.nx = 5;
    around.ny = 5;
    around.nz = 1;
    around.resolution = 0.5;
    around.origin = {-1.25, -1.25, -0.25};
    const EvidenceMap local = extract_local_map(single, pose, around);
    // Global +y at distance 1m sits two local voxels ahead on +x.
    CHECK(local.evidence[local.grid.index({4, 2, 0})] == Evidence::kMeasuredOccupied);
  }
  SUBCASE("labels resample the same way with unknown padding") {
    GroundTruthMap truth(global_grid, Occupancy::kEmpty);
    const SensorPose pose{{-0.5, 0.0, 0.0}, 0.0, 0.0, 0.0};
    const GroundTruthMap local = extract_local_labels(truth, pose, spec);
    CHECK(local.labels[local.grid.index({0, 0, 0})] == Occupancy::kUnknown);
    CHECK(local.labels[local.grid.index({1, 0, 0})] == Occupancy::kEmpty);
  }
}

TEST_CASE("predict") {
  const FeatureSpec spec{1};
  const VoxelGrid grid(5, 4, 3, 0.5);
  std::mt19937_64 gen(3);
  const EvidenceMap x = random_evidence(grid, gen);

  SUBCASE("zero weights yield zero log-odds everywhere") {
    const ConfidenceMap h = predict(make_zero_model(spec), x);
    for (const double c : h.confidence) CHECK(c == 0.0);
  }
  SUBCASE("bias-only weights yield a constant map") {
    MappingModel model = make_zero_model(spec);
    model.theta.back() = -1.25;
    const ConfidenceMap h = predict(model, x);
    for (const double c : h.confidence) CHECK(c == -1.25);
  }
  SUBCASE("center-occupied weight toggles exactly with the center evidence") {
    MappingModel model = make_zero_model(spec);
    model.theta[static_cast<std::size_t>(center_occupied_feature(spec))] = 0.75;
    const ConfidenceMap h = predict(model, x);
    for (std::size_t i = 0; i < h.confidence.size(); ++i) {
      const double expected = x.evidence[i] == Evidence::kMeasuredOccupied ? 0.75 : 0.0;
      CHECK(h.confidence[i] == expected);
    }
  }
  SUBCASE("theta length mismatch is rejected") {
    MappingModel model = make_zero_model(spec);
    model.theta.pop_back();
    CHECK_THROWS_AS(predict(model, x), std::invalid_argument);
  }
}

TEST_CASE("prediction is translation equivariant away from borders") {
  const FeatureSpec spec{1};
  const VoxelGrid grid(9, 7, 4, 0.5);
  std::mt19937_64 gen(8);
  MappingModel model = make_zero_model(spec);
  for (double& t : model.theta) t = uniform_real(gen, -0.5, 0.5);

  const EvidenceMap x = random_evidence(grid, gen);
  EvidenceMap shifted(grid);
  for (int z = 0; z < 4; ++z) {
    for (int y = 0; y < 7; ++y) {
      for (int x1 = 1; x1 < 9; ++x1) {
        shifted.evidence[grid.index({x1, y, z})] = x.evidence[grid.index({x1 - 1, y, z})];
      }
    }
  }
  const ConfidenceMap h = predict(model, x);
  const ConfidenceMap hs = predict(model, shifted);
  // Compare where both windows are fully interior.
  for (int z = 1; z < 3; ++z) {
    for (int y = 1; y < 6; ++y) {
      for (int x1 = 2; x1 < 7; ++x1) {
        CHECK(hs.confidence[grid.index({x1, y, z})] ==
              doctest::Approx(h.confidence[grid.index({x1 - 1, y, z})]).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("theta gradient matches finite differences") {
  const FeatureSpec spec{1};
  const VoxelGrid grid(4, 3, 2, 0.5);
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 10; ++trial) {
    TrainExample ex;
    ex.x = random_evidence(grid, gen);
    ex.y = labels_from_center_evidence(ex.x);
    bool has_occ = false, has_emp = false;
    for (const Occupancy l : ex.y.labels) {
      has_occ |= l == Occupancy::kOccupied;
      has_emp |= l == Occupancy::kEmpty;
    }
    if (!has_occ || !has_emp) continue;
    const LossWeights w = class_balanced_weights(ex.y);

    MappingModel model = make_zero_model(spec);
    for (double& t : model.theta) t = uniform_real(gen, -0.3, 0.3);

    const std::vector<double> grad = theta_gradient(model, ex, w);
    const auto loss_of = [&](const std::vector<double>& theta) {
      MappingModel m = model;
      m.theta = theta;
      return weighted_logistic_loss(ex.y, predict(m, ex.x), w);
    };
    const std::vector<double> fd =
        avmap::testing::finite_difference_gradient(loss_of, model.theta);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      CHECK(avmap::testing::close_rel(grad[i], fd[i], 1e-5, 1e-8));
    }
  }
}

namespace {

std::vector<TrainExample> separable_dataset(int count, std::mt19937_64& gen) {
  const VoxelGrid grid(6, 6, 3, 0.5);
  std::vector<TrainExample> out;
  for (int i = 0; i < count; ++i) {
    TrainExample ex;
    ex.x = random_evidence(grid, gen);
    ex.y = labels_from_center_evidence(ex.x);
    out.push_back(std::move(ex));
  }
  return out;
}

TrainConfig separable_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = {0.01, 1.0, 1000};  // constant rate for the synthetic task
  cfg.momentum = 0.9;
  cfg.epochs = 50;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("training solves the separable synthetic task") {
  std::mt19937_64 gen(77);
  const std::vector<TrainExample> dataset = separable_dataset(8, gen);
  MappingModel model = make_zero_model(FeatureSpec{1});
  const std::vector<double> losses = train(model, dataset, separable_config(5));
  CHECK(losses.back() < losses.front());
  CHECK(losses.back() < 0.05);               // nats per weighted voxel
  CHECK(losses.back() < std::numbers::ln2);  // beats any constant predictor
}

TEST_CASE("median training loss decreases over the first ten epochs") {
  std::vector<std::vector<double>> per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 gen(1000 + seed);
    const std::vector<TrainExample> dataset = separable_dataset(6, gen);
    MappingModel model = make_zero_model(FeatureSpec{1});
    TrainConfig cfg = separable_config(seed);
    cfg.epochs = 10;
    per_seed.push_back(train(model, dataset, cfg));
  }
  for (int epoch = 1; epoch < 10; ++epoch) {
    std::vector<double> prev, curr;
    for (const auto& losses : per_seed) {
      prev.push_back(losses[static_cast<std::size_t>(epoch - 1)]);
      curr.push_back(losses[static_cast<std::size_t>(epoch)]);
    }
    std::sort(prev.begin(), prev.end());
    std::sort(curr.begin(), curr.end());
    CHECK(curr[2] < prev[2]);  // medians over 5 seeds
  }
}

TEST_CASE("a vanishing learning rate leaves theta unchanged") {
  std::mt19937_64 gen(9);
  const std::vector<TrainExample> dataset = separable_dataset(3, gen);
  MappingModel model = make_zero_model(FeatureSpec{1});
  for (double& t : model.theta) t = uniform_real(gen, -0.2, 0.2);
  const std::vector<double> before = model.theta;
  TrainConfig cfg = separable_config(1);
  cfg.learning_rate.base = 1e-30;
  cfg.epochs = 3;
  train(model, dataset, cfg);
  for (std::size_t i = 0; i < model.theta.size(); ++i) {
    CHECK(std::abs(model.theta[i] - before[i]) <= 1e-12);
  }
}

TEST_CASE("learning rate schedule steps down geometrically") {
  const LearningRateSchedule lr{1e-3, 0.125, 10};
  CHECK(lr.at(0) == 1e-3);
  CHECK(lr.at(9) == 1e-3);
  CHECK(lr.at(10) == doctest::Approx(1.25e-4).epsilon(1e-15));
  CHECK(lr.at(20) == doctest::Approx(1.5625e-5).epsilon(1e-15));
  CHECK_THROWS_AS(lr.at(-1), std::invalid_argument);
}

TEST_CASE("splat adds local confidence back through the inverse transform") {
  const VoxelGrid grid(6, 6, 2, 0.5);
  ConfidenceMap global(grid);
  LocalGridSpec spec;
  spec.nx = 6;
  spec.ny = 6;
  spec.nz = 2;
  spec.resolution = 0.5;
  spec.origin = {0.0, 0.0, 0.0};
  ConfidenceMap local(spec.grid());
  local.confidence[local.grid.index({1, 2, 0})] = 1.5;

  const SensorPose pose{{0.5, 0.0, 0.0}, 0.0, 0.0, 0.0};  // one-voxel shift in x
  splat_local_confidence(global, local, pose);
  CHECK(global.confidence[grid.index({2, 2, 0})] == 1.5);
  double total = 0.0;
  for (const double c : global.confidence) total += std::abs(c);
  CHECK(total == 1.5);
}

TEST_CASE("minibatches average gradients but still learn") {
  std::mt19937_64 gen(31);
  const std::vector<TrainExample> dataset = separable_dataset(8, gen);

  TrainConfig cfg = separable_config(2);
  cfg.batch_size = 4;
  MappingModel batched = make_zero_model(FeatureSpec{1});
  const std::vector<double> losses = train(batched, dataset, cfg);
  CHECK(losses.back() < 0.1);

  // Full-batch: one update per epoch, order-independent gradients.
  TrainConfig full = separable_config(2);
  full.batch_size = 8;
  full.epochs = 1;
  MappingModel a = make_zero_model(FeatureSpec{1});
  MappingModel b = make_zero_model(FeatureSpec{1});
  train(a, dataset, full);
  full.seed = 77;  // different shuffle, same full-batch gradient
  train(b, dataset, full);
  for (std::size_t f = 0; f < a.theta.size(); ++f) {
    CHECK(a.theta[f] == doctest::Approx(b.theta[f]).epsilon(1e-12));
  }
  TrainConfig bad = separable_config(2);
  bad.batch_size = 0;
  MappingModel m = make_zero_model(FeatureSpec{1});
  CHECK_THROWS_AS(train_epoch(m, dataset, bad, 0), std::invalid_argument);
}

TEST_CASE("dataset manifest round trip") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "avmap_dataset_test";
  std::filesystem::remove_all(dir);
  std::mt19937_64 gen(63);
  const std::vector<TrainExample> dataset = separable_dataset(3, gen);

  const std::filesystem::path manifest = save_dataset(dir, dataset);
  const std::vector<TrainExample> back = load_dataset(manifest);
  REQUIRE(back.size() == dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    CHECK(back[i].x.evidence == dataset[i].x.evidence);
    CHECK(back[i].y.labels == dataset[i].y.labels);
    CHECK(back[i].x.grid == dataset[i].x.grid);
  }
  CHECK_THROWS_AS(load_dataset(dir / "missing.txt"), std::runtime_error);
}

TEST_CASE("model file round trip") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "avmap_model_test";
  std::filesystem::create_directories(dir);
  std::mt19937_64 gen(55);
  MappingModel model = make_zero_model(FeatureSpec{2}, 99);
  for (double& t : model.theta) t = uniform_real(gen, -2.0, 2.0);
  model.epochs_trained = 17;

  save_model(dir / "m.model", model);
  const MappingModel back = load_model(dir / "m.model");
  CHECK(back.spec == model.spec);
  CHECK(back.seed == 99);
  CHECK(back.epochs_trained == 17);
  CHECK(back.theta == model.theta);  // exact: binary f64 payload

  CHECK_THROWS_AS(load_model(dir / "nope.model"), std::runtime_error);
}

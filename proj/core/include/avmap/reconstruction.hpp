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

#ifndef AVMAP_RECONSTRUCTION_HPP_
#define AVMAP_RECONSTRUCTION_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "avmap/grid.hpp"
#include "avmap/raycast.hpp"

// Trainable dense-occupancy reconstruction from sparse evidence: a linear
// log-odds model over a one-hot evidence neighborhood. The architecture slot
// behind predict() is deliberately narrow so a heavier backend can replace it
// without touching the training loop or the pipeline.

namespace avmap {

/// Feature layout per voxel: 3 one-hot evidence channels for every offset in
/// a (2r+1)^3 window, plus one constant bias feature.
struct FeatureSpec {
  int radius = 2;

  int window() const { return 2 * radius + 1; }
  int feature_length() const {
    const int w = window();
    return 3 * w * w * w + 1;
  }
  bool operator==(const FeatureSpec&) const = default;
};

/// Weight vector theta producing per-voxel log-odds, plus training metadata.
/// The momentum velocity is transient training state and is not serialized.
struct MappingModel {
  FeatureSpec spec;
  std::vector<double> theta;
  std::vector<double> velocity;
  std::uint64_t seed = 0;
  int epochs_trained = 0;
};

MappingModel make_zero_model(const FeatureSpec& spec, std::uint64_t seed = 0);

/// alpha(epoch) = base * decay^(epoch / period), integer division, 0-based.
struct LearningRateSchedule {
  double base = 1e-3;
  double decay = 0.125;
  int period = 10;

  double at(int epoch) const;
};

struct TrainConfig {
  LearningRateSchedule learning_rate;
  double momentum = 0.99;
  int epochs = 20;
  int batch_size = 1;
  std::uint64_t seed = 0;
};

/// Sensor-aligned local resampling window. `origin` is the corner of local
/// voxel (0,0,0) expressed in the local frame (sensor at the local origin,
/// rotated by the pose yaw only).
struct LocalGridSpec {
  int nx = 32;
  int ny = 32;
  int nz = 16;
  double resolution = 0.25;
  Vec3 origin{-4.0, -4.0, -2.0};

  VoxelGrid grid() const { return VoxelGrid(nx, ny, nz, resolution, origin); }
};

Vec3 local_to_world(const SensorPose& pose, const Vec3& local);
Vec3 world_to_local(const SensorPose& pose, const Vec3& world);

/// Nearest-neighbor resampling of the global evidence map into the local
/// frame; voxels falling outside the global map come back unmeasured.
EvidenceMap extract_local_map(const EvidenceMap& global, const SensorPose& pose,
                              const LocalGridSpec& spec);

/// Same resampling for ground-truth labels; out-of-bounds voxels are unknown.
GroundTruthMap extract_local_labels(const GroundTruthMap& global, const SensorPose& pose,
                                    const LocalGridSpec& spec);

/// Per-voxel log-odds h_i = theta . phi(x, i); neighbors outside the map
/// contribute all-zero channels.
ConfidenceMap predict(const MappingModel& model, const EvidenceMap& local);

struct TrainExample {
  EvidenceMap x;
  GroundTruthMap y;
};

/// dLoss/dtheta for one example under the given per-voxel weights.
std::vector<double> theta_gradient(const MappingModel& model, const TrainExample& example,
                                   const LossWeights& weights);

/// One SGD pass in seeded shuffled order with momentum; gradients are
/// averaged over each `batch_size` chunk before the update. Examples whose
/// labels are all one class carry no balanced weights and are skipped.
/// Returns the mean training loss in nats per weighted voxel.
double train_epoch(MappingModel& model, const std::vector<TrainExample>& dataset,
                   const TrainConfig& cfg, int epoch);

/// Runs cfg.epochs passes; returns the per-epoch mean losses.
std::vector<double> train(MappingModel& model, const std::vector<TrainExample>& dataset,
                          const TrainConfig& cfg);

/// Adds the local prediction into the global confidence map through the
/// inverse of the extraction transform (nearest-neighbor splatting).
void splat_local_confidence(ConfidenceMap& global, const ConfidenceMap& local,
                            const SensorPose& pose, double clamp = kDefaultConfidenceClamp);

/// Model file: text header (feature spec, seed, epochs, weight count), then
/// the weights as a little-endian f64 array.
void save_model(const std::filesystem::path& path, const MappingModel& model);
MappingModel load_model(const std::filesystem::path& path);

/// Dataset manifest: one `<evidence-map-path> <label-map-path>` pair per
/// line, resolved relative to the manifest's directory; `#` comments and
/// blank lines are skipped.
std::vector<TrainExample> load_dataset(const std::filesystem::path& manifest_path);

/// Writes x_<i>.avm / y_<i>.avm pairs plus `manifest.txt` into `dir` and
/// returns the manifest path.
std::filesystem::path save_dataset(const std::filesystem::path& dir,
                                   const std::vector<TrainExample>& dataset);

}  // namespace avmap

#endif  // AVMAP_RECONSTRUCTION_HPP_

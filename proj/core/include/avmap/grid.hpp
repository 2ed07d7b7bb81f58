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

#ifndef AVMAP_GRID_HPP_
#define AVMAP_GRID_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "avmap/geom.hpp"

namespace avmap {

/// Per-voxel ground-truth label.
enum class Occupancy : std::int8_t {
  kEmpty = -1,
  kUnknown = 0,
  kOccupied = 1,
};

/// Per-voxel measurement evidence.
enum class Evidence : std::uint8_t {
  kUnmeasured = 0,
  kMeasuredFree = 1,
  kMeasuredOccupied = 2,
};

struct VoxelCoord {
  int x = 0;
  int y = 0;
  int z = 0;
  constexpr bool operator==(const VoxelCoord&) const = default;
};

/// Dense axis-aligned voxel lattice. Linear indices run x-fastest, then y,
/// then z, which fixes the payload order of every serialized map.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(int nx, int ny, int nz, double resolution, Vec3 origin = {});

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double resolution() const { return resolution_; }
  const Vec3& origin() const { return origin_; }
  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_) *
           static_cast<std::size_t>(nz_);
  }

  bool contains(const VoxelCoord& c) const {
    return c.x >= 0 && c.x < nx_ && c.y >= 0 && c.y < ny_ && c.z >= 0 && c.z < nz_;
  }
  bool contains_point(const Vec3& world) const;

  std::size_t index(const VoxelCoord& c) const {
    return static_cast<std::size_t>(c.x) +
           static_cast<std::size_t>(nx_) *
               (static_cast<std::size_t>(c.y) + static_cast<std::size_t>(ny_) * static_cast<std::size_t>(c.z));
  }
  VoxelCoord coords(std::size_t index) const {
    const auto nx = static_cast<std::size_t>(nx_);
    const auto ny = static_cast<std::size_t>(ny_);
    return {static_cast<int>(index % nx), static_cast<int>((index / nx) % ny),
            static_cast<int>(index / (nx * ny))};
  }

  /// Voxel containing a world point, or nullopt outside the grid.
  std::optional<std::size_t> index_at(const Vec3& world) const;
  VoxelCoord coord_at_unclamped(const Vec3& world) const;

  Vec3 voxel_min(const VoxelCoord& c) const {
    return {origin_.x + c.x * resolution_, origin_.y + c.y * resolution_,
            origin_.z + c.z * resolution_};
  }
  Vec3 voxel_center(const VoxelCoord& c) const {
    return voxel_min(c) + Vec3{0.5, 0.5, 0.5} * resolution_;
  }

  bool operator==(const VoxelGrid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_ && resolution_ == o.resolution_ &&
           origin_ == o.origin_;
  }

 private:
  int nx_ = 0, ny_ = 0, nz_ = 0;
  double resolution_ = 0.0;
  Vec3 origin_;
};

/// Ground-truth occupancy labels Y.
struct GroundTruthMap {
  VoxelGrid grid;
  std::vector<Occupancy> labels;

  GroundTruthMap() = default;
  explicit GroundTruthMap(const VoxelGrid& g, Occupancy fill = Occupancy::kUnknown)
      : grid(g), labels(g.voxel_count(), fill) {}
};

/// Occupancy confidence in log-odds. sigma(confidence) is P(occupied).
struct ConfidenceMap {
  VoxelGrid grid;
  std::vector<double> confidence;

  ConfidenceMap() = default;
  explicit ConfidenceMap(const VoxelGrid& g, double fill = 0.0)
      : grid(g), confidence(g.voxel_count(), fill) {}
};

/// Sparse depth-measurement evidence X.
struct EvidenceMap {
  VoxelGrid grid;
  std::vector<Evidence> evidence;

  EvidenceMap() = default;
  explicit EvidenceMap(const VoxelGrid& g) : grid(g), evidence(g.voxel_count(), Evidence::kUnmeasured) {}

  double measured_fraction() const;
};

/// Per-voxel loss weights; zero on unknown-label voxels.
struct LossWeights {
  std::vector<double> weights;
};

/// Logistic function 1/(1+e^-c).
double sigma(double log_odds);

/// log(1 + e^x), safe for large |x|.
double softplus(double x);

/// Symmetric log-odds clamp applied by confidence updates; keeps exp() in
/// downstream sigma/entropy evaluations well away from overflow.
inline constexpr double kDefaultConfidenceClamp = 100.0;

/// Element-wise map += delta, clamped to [-clamp, clamp].
void update_confidence(ConfidenceMap& map, const ConfidenceMap& delta,
                       double clamp = kDefaultConfidenceClamp);

/// Sum over labeled voxels of w_i * log(1 + exp(-Y_i * Yhat_i)), natural log.
double weighted_logistic_loss(const GroundTruthMap& truth, const ConfidenceMap& estimate,
                              const LossWeights& weights);

/// dLoss/dYhat_i = -w_i * Y_i * sigma(-Y_i * Yhat_i); zero on unknown voxels.
std::vector<double> weighted_logistic_loss_gradient(const GroundTruthMap& truth,
                                                    const ConfidenceMap& estimate,
                                                    const LossWeights& weights);

/// Per-voxel Bernoulli entropy of sigma(confidence), in nats; in [0, ln 2].
std::vector<double> entropy_loss_vector(const ConfidenceMap& estimate);
double bernoulli_entropy(double log_odds);

/// Weights equalizing the total mass of the occupied and empty classes:
/// N/(2*N_occ) and N/(2*N_emp) with N = N_occ + N_emp; unknown voxels get 0.
/// Throws if either class is empty.
LossWeights class_balanced_weights(const GroundTruthMap& truth);

}  // namespace avmap

#endif  // AVMAP_GRID_HPP_

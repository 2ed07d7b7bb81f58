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

#ifndef AVMAP_RAYCAST_HPP_
#define AVMAP_RAYCAST_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "avmap/geom.hpp"
#include "avmap/grid.hpp"

namespace avmap {

/// Sensor pose: world position plus yaw-pitch-roll, applied in that order
/// (R = Rz(yaw) * Ry(pitch) * Rx(roll)).
struct SensorPose {
  Vec3 position;
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  Mat3 rotation() const {
    return Mat3::rotation_z(yaw) * Mat3::rotation_y(pitch) * Mat3::rotation_x(roll);
  }
};

struct Ray {
  int pose_index = 0;               // lambda(j)
  Vec3 direction;                   // unit, sensor frame
  int ray_id = 0;                   // j, unique within a problem
};

/// Even angular discretization of a rectangular field of view.
/// Sensor frame: +x forward, +y left, +z up.
struct RayBundle {
  double fov_h_deg = 120.0;
  double fov_v_deg = 90.0;
  int count_h = 40;
  int count_v = 30;

  int count() const { return count_h * count_v; }
  std::vector<Vec3> directions() const;
};

struct CoverageEntry {
  std::size_t voxel = 0;
  double p = 1.0;                   // probability the ray does NOT cover this voxel
};

/// Sparse miss-probability vector p_j for one ray. Voxels absent from
/// `entries` implicitly have p = 1. Order is as produced: increasing
/// distance from the sensor.
struct CoverageVector {
  std::vector<CoverageEntry> entries;
};

struct Measurement {
  int ray_id = -1;
  std::optional<std::size_t> hit;    // voxel index; absent when nothing returned
  std::vector<std::size_t> traversed;
};

/// Voxels pierced by a ray, in increasing distance order, consecutive voxels
/// face-adjacent. The list starts at the voxel containing `origin` and stops
/// at the grid boundary or once the next voxel would be entered at or beyond
/// `max_range`. An origin outside the grid yields an empty list.
std::vector<std::size_t> traverse(const VoxelGrid& grid, const Vec3& origin,
                                  const Vec3& direction_world, double max_range);

/// Casts one ray against ground truth: stops at the first occupied voxel
/// (the sensor's own voxel is never a hit; unknown voxels do not block).
/// No occupied voxel within range leaves `hit` unset.
Measurement synthesize_measurement(const GroundTruthMap& truth, const SensorPose& pose,
                                   const Vec3& direction_sensor, double max_range,
                                   int ray_id = -1);

/// Inserts a measurement: voxels before the hit become measured-free, the hit
/// voxel measured-occupied. Measured-occupied is never downgraded by later
/// free evidence. A no-return measurement leaves the map unchanged unless
/// `freespace_on_miss` is set, in which case the full traversal is carved free.
void apply_measurement(EvidenceMap& map, const Measurement& m, bool freespace_on_miss = false);

/// Miss probabilities p_ij for every voxel on a traversal, from the current
/// confidence map. With q_u = sigma(confidence_u), a voxel is visible when
/// everything before it is free and the pulse returns at or after it:
///   visible_i = prod_{u<i}(1-q_u) * (1 - prod_{u>=i}(1-q_u)),   p_ij = 1 - visible_i.
/// `include_self` keeps voxel i in the return product (the default model);
/// when false the pulse must return strictly behind i.
CoverageVector coverage_probability(const ConfidenceMap& estimate,
                                    std::span<const std::size_t> traversal,
                                    bool include_self = true);

/// One registered scan: sensor pose and world-frame end points.
struct Scan {
  SensorPose pose;
  std::vector<Vec3> points;
};

struct GroundTruthBuildStats {
  std::size_t skipped_points = 0;   // end points outside the grid
};

inline constexpr double kDefaultOccupiedVoteFraction = 1.0 / 3.0;

/// Voxelizes scans into labels: end points vote occupied, traversed voxels
/// vote free. A voxel is occupied iff it has an occupied vote and
/// occ/(occ+free) >= tau_frac; else empty iff any free vote; else unknown.
/// The vote fraction suppresses dynamic objects that were later seen through.
GroundTruthMap build_ground_truth(const std::vector<Scan>& scans, const VoxelGrid& grid,
                                  double tau_frac = kDefaultOccupiedVoteFraction,
                                  GroundTruthBuildStats* stats = nullptr);

/// Text scan input: `points_path` has one `pose_id x y z` record per line;
/// `poses_path` is the sidecar table `id x y z yaw pitch roll`.
/// Blank lines and `#` comments are skipped.
std::vector<Scan> load_scans(const std::filesystem::path& points_path,
                             const std::filesystem::path& poses_path);

}  // namespace avmap

#endif  // AVMAP_RAYCAST_HPP_

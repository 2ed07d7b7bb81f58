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

#include "avmap/roc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace avmap {
namespace {

/// One 26-neighborhood dilation of a voxel mask.
std::vector<std::uint8_t> dilate(const VoxelGrid& grid, const std::vector<std::uint8_t>& mask) {
  std::vector<std::uint8_t> out = mask;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const VoxelCoord c = grid.coords(i);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const VoxelCoord n{c.x + dx, c.y + dy, c.z + dz};
          if (grid.contains(n)) out[grid.index(n)] = 1;
        }
      }
    }
  }
  return out;
}

bool adjacent_to_occupied(const GroundTruthMap& truth, std::size_t i) {
  const VoxelCoord c = truth.grid.coords(i);
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const VoxelCoord n{c.x + dx, c.y + dy, c.z + dz};
        if (truth.grid.contains(n) &&
            truth.labels[truth.grid.index(n)] == Occupancy::kOccupied) {
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

std::vector<std::uint8_t> measurable_mask(const GroundTruthMap& truth,
                                          const std::vector<SensorPose>& poses,
                                          const RayBundle& bundle, double max_range) {
  std::vector<std::uint8_t> mask(truth.grid.voxel_count(), 0);
  const std::vector<Vec3> dirs = bundle.directions();
  for (const SensorPose& pose : poses) {
    for (const Vec3& dir : dirs) {
      const Measurement m = synthesize_measurement(truth, pose, dir, max_range);
      for (const std::size_t v : m.traversed) mask[v] = 1;
    }
  }
  return mask;
}

RocCurve roc_curve(const GroundTruthMap& truth, const ConfidenceMap& estimate,
                   const RocExclusion& exclusion) {
  if (!(truth.grid == estimate.grid)) {
    throw std::invalid_argument("roc_curve: grid mismatch");
  }
  int margin = exclusion.margin_voxels;
  if (margin == RocExclusion::kFromResolution) {
    margin = static_cast<int>(std::ceil(1.0 / truth.grid.resolution()));
  }

  std::vector<std::uint8_t> reach;
  if (!exclusion.measurable.empty()) {
    if (exclusion.measurable.size() != truth.grid.voxel_count()) {
      throw std::invalid_argument("roc_curve: measurable mask size mismatch");
    }
    reach = exclusion.measurable;
    for (int step = 0; step < margin; ++step) reach = dilate(truth.grid, reach);
  }

  // (score, is_positive) over eligible voxels.
  std::vector<std::pair<double, bool>> scored;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] == Occupancy::kUnknown) continue;
    if (!reach.empty() && !reach[i]) continue;
    const bool positive = truth.labels[i] == Occupancy::kOccupied;
    if (!positive && exclusion.discount_adjacent_false_positives &&
        adjacent_to_occupied(truth, i)) {
      continue;
    }
    scored.emplace_back(estimate.confidence[i], positive);
  }

  std::size_t total_pos = 0, total_neg = 0;
  for (const auto& [score, positive] : scored) (positive ? total_pos : total_neg) += 1;
  if (total_pos == 0 || total_neg == 0) {
    throw std::invalid_argument("roc_curve: no positives or no negatives after exclusion");
  }

  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve curve;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < scored.size()) {
    const double threshold = scored[i].first;
    while (i < scored.size() && scored[i].first == threshold) {
      (scored[i].second ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({threshold, static_cast<double>(tp) / static_cast<double>(total_pos),
                            static_cast<double>(fp) / static_cast<double>(total_neg)});
  }

  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (const RocPoint& pt : curve.points) {
    auc += (pt.fpr - prev_fpr) * (pt.tpr + prev_tpr) / 2.0;
    prev_fpr = pt.fpr;
    prev_tpr = pt.tpr;
  }
  auc += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
  curve.auc = auc;
  return curve;
}

}  // namespace avmap

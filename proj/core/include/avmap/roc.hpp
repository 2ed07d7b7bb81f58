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

#ifndef AVMAP_ROC_HPP_
#define AVMAP_ROC_HPP_

#include <vector>

#include "avmap/grid.hpp"
#include "avmap/raycast.hpp"

namespace avmap {

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // thresholds descending; TPR/FPR non-decreasing
  double auc = 0.0;              // trapezoid rule, endpoints (0,0) and (1,1)
};

/// Occupancy-evaluation exclusions. Voxels more than about a meter from
/// anything the sensor protocol could determine are skipped, and empty voxels
/// touching an occupied one are not counted as false positives (they are
/// discretization artifacts).
struct RocExclusion {
  /// Voxels reachable by some candidate ray; empty means no reach filter.
  std::vector<std::uint8_t> measurable;
  /// Chebyshev dilation steps applied to `measurable`; kFromResolution
  /// derives ceil(1m / resolution).
  int margin_voxels = kFromResolution;
  bool discount_adjacent_false_positives = true;

  static constexpr int kFromResolution = -1;
};

/// Union of all measurement traversals over every pose and bundle direction;
/// the voxels whose occupancy the protocol could possibly determine.
std::vector<std::uint8_t> measurable_mask(const GroundTruthMap& truth,
                                          const std::vector<SensorPose>& poses,
                                          const RayBundle& bundle, double max_range);

/// Threshold sweep of confidence against labels under the exclusion rules.
/// Throws if no positive or no negative voxels survive the exclusions.
RocCurve roc_curve(const GroundTruthMap& truth, const ConfidenceMap& estimate,
                   const RocExclusion& exclusion);

}  // namespace avmap

#endif  // AVMAP_ROC_HPP_

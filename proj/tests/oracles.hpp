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

// Test-only reference implementations. Each oracle recomputes an expected
// value from first principles, independent of the library code paths it is
// used to check.

#ifndef AVMAP_TESTS_ORACLES_HPP_
#define AVMAP_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "avmap/geom.hpp"
#include "avmap/grid.hpp"

namespace avmap::testing {

/// Miss probabilities by exhaustive enumeration of all 2^n occupancy
/// configurations of a ray corridor with independent Bernoulli(q_u) voxels.
/// A voxel is visible when everything before it is empty and it or anything
/// after it is occupied.
inline std::vector<double> coverage_by_enumeration(const std::vector<double>& q) {
  const std::size_t n = q.size();
  std::vector<double> visible(n, 0.0);
  for (std::size_t config = 0; config < (std::size_t{1} << n); ++config) {
    double prob = 1.0;
    for (std::size_t u = 0; u < n; ++u) {
      prob *= (config >> u) & 1 ? q[u] : 1.0 - q[u];
    }
    for (std::size_t i = 0; i < n; ++i) {
      bool before_empty = true;
      for (std::size_t u = 0; u < i; ++u) before_empty &= ((config >> u) & 1) == 0;
      bool returns = false;
      for (std::size_t u = i; u < n; ++u) returns |= ((config >> u) & 1) == 1;
      if (before_empty && returns) visible[i] += prob;
    }
  }
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = 1.0 - visible[i];
  return p;
}

/// Voxels visited by dense point sampling along a ray (one sample every
/// `step` meters from the origin), consecutive duplicates removed. Only
/// covers voxels whose chord is at least `step`; tiny corner clips can be
/// absent.
inline std::vector<std::size_t> traversal_by_point_sampling(const VoxelGrid& grid,
                                                            const Vec3& origin, const Vec3& dir,
                                                            double max_range, double step) {
  std::vector<std::size_t> out;
  for (double t = 0.0; t < max_range; t += step) {
    const Vec3 point = origin + dir * t;
    const auto idx = grid.index_at(point);
    if (!idx.has_value()) {
      if (!out.empty()) break;  // left the grid
      continue;
    }
    if (out.empty() || out.back() != *idx) out.push_back(*idx);
  }
  return out;
}

/// Length of the ray segment inside one voxel, clipped to [0, max_range],
/// by slab intersection. Independent geometry for certifying that voxels
/// missed by point sampling are only grazed.
inline double voxel_chord_length(const VoxelGrid& grid, std::size_t voxel, const Vec3& origin,
                                 const Vec3& dir, double max_range) {
  const VoxelCoord c = grid.coords(voxel);
  const Vec3 lo = grid.voxel_min(c);
  const Vec3 hi = lo + Vec3{1, 1, 1} * grid.resolution();
  double t_enter = 0.0;
  double t_exit = max_range;
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double lo3[3] = {lo.x, lo.y, lo.z};
  const double hi3[3] = {hi.x, hi.y, hi.z};
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo3[a] || o[a] >= hi3[a]) return 0.0;
      continue;
    }
    double t0 = (lo3[a] - o[a]) / d[a];
    double t1 = (hi3[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  return std::max(0.0, t_exit - t_enter);
}

/// Central finite differences of f at x.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-5) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f(x);
    x[i] = saved - h;
    const double fm = f(x);
    x[i] = saved;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

inline bool close_rel(double a, double b, double rel_tol, double abs_tol = 1e-12) {
  const double diff = std::abs(a - b);
  return diff <= abs_tol || diff <= rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace avmap::testing

#endif  // AVMAP_TESTS_ORACLES_HPP_

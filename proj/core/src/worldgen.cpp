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

#include "avmap/worldgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avmap/rng.hpp"

namespace avmap {

GroundTruthMap generate_world(const WorldSpec& spec, std::uint64_t seed) {
  if (spec.ground_level < 0 || spec.ground_level >= spec.nz) {
    throw std::invalid_argument("generate_world: ground_level outside the grid");
  }
  const VoxelGrid grid(spec.nx, spec.ny, spec.nz, spec.resolution, spec.origin);
  GroundTruthMap map(grid);

  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    const int z = grid.coords(i).z;
    if (z < spec.ground_level) {
      map.labels[i] = Occupancy::kUnknown;
    } else if (z == spec.ground_level) {
      map.labels[i] = Occupancy::kOccupied;
    } else {
      map.labels[i] = Occupancy::kEmpty;
    }
  }

  const double res = spec.resolution;
  const double area = spec.nx * res * spec.ny * res;
  const int objects = static_cast<int>(std::llround(spec.object_density_per_m2 * area));
  std::mt19937_64 gen(seed);

  const auto fill_column = [&](int cx, int cy, int height_vox) {
    if (cx < 0 || cx >= spec.nx || cy < 0 || cy >= spec.ny) return;
    const int top = std::min(spec.nz - 1, spec.ground_level + height_vox);
    for (int z = spec.ground_level + 1; z <= top; ++z) {
      map.labels[grid.index({cx, cy, z})] = Occupancy::kOccupied;
    }
  };

  for (int n = 0; n < objects; ++n) {
    const double cx_m = uniform_real(gen, 0.0, spec.nx * res);
    const double cy_m = uniform_real(gen, 0.0, spec.ny * res);
    const bool is_box = uniform_real(gen) < spec.box_fraction;
    if (is_box) {
      const double sx = uniform_real(gen, spec.box_side_min, spec.box_side_max);
      const double sy = uniform_real(gen, spec.box_side_min, spec.box_side_max);
      const double h = uniform_real(gen, spec.box_height_min, spec.box_height_max);
      const int x0 = static_cast<int>(std::floor((cx_m - sx / 2) / res));
      const int x1 = static_cast<int>(std::floor((cx_m + sx / 2) / res));
      const int y0 = static_cast<int>(std::floor((cy_m - sy / 2) / res));
      const int y1 = static_cast<int>(std::floor((cy_m + sy / 2) / res));
      const int hv = std::max(1, static_cast<int>(std::llround(h / res)));
      for (int x = x0; x <= x1; ++x) {
        for (int y = y0; y <= y1; ++y) fill_column(x, y, hv);
      }
    } else {
      const double r = uniform_real(gen, spec.cyl_radius_min, spec.cyl_radius_max);
      const double h = uniform_real(gen, spec.cyl_height_min, spec.cyl_height_max);
      const int hv = std::max(1, static_cast<int>(std::llround(h / res)));
      const int x0 = static_cast<int>(std::floor((cx_m - r) / res));
      const int x1 = static_cast<int>(std::floor((cx_m + r) / res));
      const int y0 = static_cast<int>(std::floor((cy_m - r) / res));
      const int y1 = static_cast<int>(std::floor((cy_m + r) / res));
      for (int x = x0; x <= x1; ++x) {
        for (int y = y0; y <= y1; ++y) {
          const double dx = (x + 0.5) * res - cx_m;
          const double dy = (y + 0.5) * res - cy_m;
          if (dx * dx + dy * dy <= r * r) fill_column(x, y, hv);
        }
      }
    }
  }
  return map;
}

}  // namespace avmap

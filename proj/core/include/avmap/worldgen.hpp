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

#ifndef AVMAP_WORLDGEN_HPP_
#define AVMAP_WORLDGEN_HPP_

#include <cstdint>

#include "avmap/grid.hpp"

namespace avmap {

/// Procedural outdoor-like scene: a flat occupied ground layer with
/// axis-aligned boxes and vertical cylinders on top, empty air elsewhere,
/// unknown space below ground.
struct WorldSpec {
  int nx = 96;
  int ny = 96;
  int nz = 24;
  double resolution = 0.25;
  Vec3 origin{0.0, 0.0, 0.0};

  int ground_level = 1;               // voxel layer of the ground surface
  double object_density_per_m2 = 0.02;
  double box_fraction = 0.5;          // remaining objects are cylinders

  double box_side_min = 0.6, box_side_max = 2.4;       // meters
  double box_height_min = 0.8, box_height_max = 3.2;
  double cyl_radius_min = 0.2, cyl_radius_max = 0.6;
  double cyl_height_min = 1.0, cyl_height_max = 4.0;
};

GroundTruthMap generate_world(const WorldSpec& spec, std::uint64_t seed);

}  // namespace avmap

#endif  // AVMAP_WORLDGEN_HPP_

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

#include "avmap/raycast.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace avmap {

std::vector<Vec3> RayBundle::directions() const {
  if (count_h <= 0 || count_v <= 0) {
    throw std::invalid_argument("RayBundle: direction counts must be positive");
  }
  const double to_rad = M_PI / 180.0;
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(count()));
  for (int iv = 0; iv < count_v; ++iv) {
    // Evenly spaced across the FoV; a single row/column sits on the axis.
    const double fv = count_v > 1 ? static_cast<double>(iv) / (count_v - 1) - 0.5 : 0.0;
    const double psi = fv * fov_v_deg * to_rad;
    for (int ih = 0; ih < count_h; ++ih) {
      const double fh = count_h > 1 ? static_cast<double>(ih) / (count_h - 1) - 0.5 : 0.0;
      const double phi = fh * fov_h_deg * to_rad;
      dirs.push_back({std::cos(psi) * std::cos(phi), std::cos(psi) * std::sin(phi),
                      std::sin(psi)});
    }
  }
  return dirs;
}

std::vector<std::size_t> traverse(const VoxelGrid& grid, const Vec3& origin,
                                  const Vec3& direction_world, double max_range) {
  if (!(max_range > 0.0)) {
    throw std::invalid_argument("traverse: max_range must be positive");
  }
  VoxelCoord cell = grid.coord_at_unclamped(origin);
  if (!grid.contains(cell)) return {};

  // Amanatides-Woo stepping on voxel boundaries. t is world distance along
  // the ray; t_next[a] is the distance at which the next boundary orthogonal
  // to axis a is crossed. Ties at corners step x before y before z.
  const double res = grid.resolution();
  const double d[3] = {direction_world.x, direction_world.y, direction_world.z};
  const double o[3] = {origin.x, origin.y, origin.z};
  const double g0[3] = {grid.origin().x, grid.origin().y, grid.origin().z};
  int c[3] = {cell.x, cell.y, cell.z};
  const int dims[3] = {grid.nx(), grid.ny(), grid.nz()};

  int step[3];
  double t_next[3], t_delta[3];
  for (int a = 0; a < 3; ++a) {
    if (d[a] > 0.0) {
      step[a] = 1;
      t_next[a] = (g0[a] + (c[a] + 1) * res - o[a]) / d[a];
      t_delta[a] = res / d[a];
    } else if (d[a] < 0.0) {
      step[a] = -1;
      t_next[a] = (g0[a] + c[a] * res - o[a]) / d[a];
      t_delta[a] = -res / d[a];
    } else {
      step[a] = 0;
      t_next[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }

  std::vector<std::size_t> out;
  out.push_back(grid.index({c[0], c[1], c[2]}));
  while (true) {
    int axis;
    if (t_next[0] <= t_next[1] && t_next[0] <= t_next[2]) {
      axis = 0;
    } else if (t_next[1] <= t_next[2]) {
      axis = 1;
    } else {
      axis = 2;
    }
    if (!(t_next[axis] < max_range)) break;
    c[axis] += step[axis];
    if (c[axis] < 0 || c[axis] >= dims[axis]) break;
    out.push_back(grid.index({c[0], c[1], c[2]}));
    t_next[axis] += t_delta[axis];
  }
  return out;
}

Measurement synthesize_measurement(const GroundTruthMap& truth, const SensorPose& pose,
                                   const Vec3& direction_sensor, double max_range, int ray_id) {
  const Vec3 dir_world = pose.rotation() * direction_sensor;
  Measurement m;
  m.ray_id = ray_id;
  m.traversed = traverse(truth.grid, pose.position, dir_world, max_range);
  // The sensor's own voxel (index 0 in the traversal) cannot return the pulse.
  for (std::size_t k = 1; k < m.traversed.size(); ++k) {
    if (truth.labels[m.traversed[k]] == Occupancy::kOccupied) {
      m.hit = m.traversed[k];
      m.traversed.resize(k + 1);
      break;
    }
  }
  return m;
}

void apply_measurement(EvidenceMap& map, const Measurement& m, bool freespace_on_miss) {
  const auto mark_free = [&map](std::size_t v) {
    if (map.evidence[v] != Evidence::kMeasuredOccupied) {
      map.evidence[v] = Evidence::kMeasuredFree;
    }
  };
  if (m.hit.has_value()) {
    for (const std::size_t v : m.traversed) {
      if (v == *m.hit) break;
      mark_free(v);
    }
    map.evidence[*m.hit] = Evidence::kMeasuredOccupied;
  } else if (freespace_on_miss) {
    for (const std::size_t v : m.traversed) mark_free(v);
  }
}

CoverageVector coverage_probability(const ConfidenceMap& estimate,
                                    std::span<const std::size_t> traversal,
                                    bool include_self) {
  const std::size_t n = traversal.size();
  CoverageVector cov;
  cov.entries.resize(n);

  std::vector<double> miss(n);  // 1 - q_u
  for (std::size_t k = 0; k < n; ++k) {
    miss[k] = 1.0 - sigma(estimate.confidence[traversal[k]]);
  }

  // suffix[k] = prod_{u >= k} (1 - q_u); one backward pass, then one forward
  // pass carrying the prefix product, O(ray length) total.
  std::vector<double> suffix(n + 1, 1.0);
  for (std::size_t k = n; k > 0; --k) {
    suffix[k - 1] = suffix[k] * miss[k - 1];
  }
  double prefix = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double returns = 1.0 - (include_self ? suffix[k] : suffix[k + 1]);
    cov.entries[k] = {traversal[k], 1.0 - prefix * returns};
    prefix *= miss[k];
  }
  return cov;
}

GroundTruthMap build_ground_truth(const std::vector<Scan>& scans, const VoxelGrid& grid,
                                  double tau_frac, GroundTruthBuildStats* stats) {
  if (scans.empty()) {
    throw std::invalid_argument("build_ground_truth: empty scan list");
  }
  std::vector<std::uint32_t> occ_votes(grid.voxel_count(), 0);
  std::vector<std::uint32_t> free_votes(grid.voxel_count(), 0);
  std::size_t skipped = 0;

  for (const Scan& scan : scans) {
    for (const Vec3& point : scan.points) {
      const auto end_voxel = grid.index_at(point);
      if (!end_voxel.has_value()) {
        ++skipped;
        continue;
      }
      ++occ_votes[*end_voxel];
      const Vec3 delta = point - scan.pose.position;
      const double dist = delta.norm();
      if (dist <= 0.0) continue;
      for (const std::size_t v : traverse(grid, scan.pose.position, delta / dist, dist)) {
        if (v == *end_voxel) break;
        ++free_votes[v];
      }
    }
  }

  GroundTruthMap map(grid);
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    const double occ = static_cast<double>(occ_votes[i]);
    const double total = occ + static_cast<double>(free_votes[i]);
    if (occ_votes[i] >= 1 && occ >= tau_frac * total) {
      map.labels[i] = Occupancy::kOccupied;
    } else if (free_votes[i] >= 1) {
      map.labels[i] = Occupancy::kEmpty;
    }
  }
  if (stats != nullptr) stats->skipped_points = skipped;
  return map;
}

std::vector<Scan> load_scans(const std::filesystem::path& points_path,
                             const std::filesystem::path& poses_path) {
  std::ifstream poses_in(poses_path);
  if (!poses_in) throw std::runtime_error("load_scans: cannot open " + poses_path.string());
  std::map<int, std::size_t> order;  // pose id -> scan slot, insertion-ordered by id
  std::map<int, SensorPose> poses;
  std::string line;
  while (std::getline(poses_in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    int id;
    SensorPose pose;
    if (!(ss >> id >> pose.position.x >> pose.position.y >> pose.position.z >> pose.yaw >>
          pose.pitch >> pose.roll)) {
      throw std::runtime_error("load_scans: bad pose record: " + line);
    }
    poses[id] = pose;
  }

  std::vector<Scan> scans;
  for (const auto& [id, pose] : poses) {
    order[id] = scans.size();
    scans.push_back({pose, {}});
  }

  std::ifstream points_in(points_path);
  if (!points_in) throw std::runtime_error("load_scans: cannot open " + points_path.string());
  while (std::getline(points_in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    int id;
    Vec3 p;
    if (!(ss >> id >> p.x >> p.y >> p.z)) {
      throw std::runtime_error("load_scans: bad point record: " + line);
    }
    const auto it = order.find(id);
    if (it == order.end()) {
      throw std::runtime_error("load_scans: point references unknown pose id " + std::to_string(id));
    }
    scans[it->second].points.push_back(p);
  }
  return scans;
}

}  // namespace avmap

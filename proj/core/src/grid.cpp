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

#include "avmap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace avmap {

VoxelGrid::VoxelGrid(int nx, int ny, int nz, double resolution, Vec3 origin)
    : nx_(nx), ny_(ny), nz_(nz), resolution_(resolution), origin_(origin) {
  if (nx <= 0 || ny <= 0 || nz <= 0) {
    throw std::invalid_argument("VoxelGrid: dims must be positive");
  }
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("VoxelGrid: resolution must be positive");
  }
}

bool VoxelGrid::contains_point(const Vec3& world) const {
  return contains(coord_at_unclamped(world));
}

VoxelCoord VoxelGrid::coord_at_unclamped(const Vec3& world) const {
  return {static_cast<int>(std::floor((world.x - origin_.x) / resolution_)),
          static_cast<int>(std::floor((world.y - origin_.y) / resolution_)),
          static_cast<int>(std::floor((world.z - origin_.z) / resolution_))};
}

std::optional<std::size_t> VoxelGrid::index_at(const Vec3& world) const {
  const VoxelCoord c = coord_at_unclamped(world);
  if (!contains(c)) return std::nullopt;
  return index(c);
}

double EvidenceMap::measured_fraction() const {
  if (evidence.empty()) return 0.0;
  std::size_t n = 0;
  for (const Evidence e : evidence) {
    if (e != Evidence::kUnmeasured) ++n;
  }
  return static_cast<double>(n) / static_cast<double>(evidence.size());
}

double sigma(double log_odds) { return 1.0 / (1.0 + std::exp(-log_odds)); }

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

namespace {

void require_same_grid(const VoxelGrid& a, const VoxelGrid& b, const char* op) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(op) + ": grid mismatch");
  }
}

}  // namespace

void update_confidence(ConfidenceMap& map, const ConfidenceMap& delta, double clamp) {
  require_same_grid(map.grid, delta.grid, "update_confidence");
  for (std::size_t i = 0; i < map.confidence.size(); ++i) {
    map.confidence[i] =
        std::clamp(map.confidence[i] + delta.confidence[i], -clamp, clamp);
  }
}

double weighted_logistic_loss(const GroundTruthMap& truth, const ConfidenceMap& estimate,
                              const LossWeights& weights) {
  require_same_grid(truth.grid, estimate.grid, "weighted_logistic_loss");
  if (weights.weights.size() != truth.labels.size()) {
    throw std::invalid_argument("weighted_logistic_loss: weight vector size mismatch");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] == Occupancy::kUnknown) continue;
    const double y = static_cast<double>(static_cast<std::int8_t>(truth.labels[i]));
    loss += weights.weights[i] * softplus(-y * estimate.confidence[i]);
  }
  return loss;
}

std::vector<double> weighted_logistic_loss_gradient(const GroundTruthMap& truth,
                                                    const ConfidenceMap& estimate,
                                                    const LossWeights& weights) {
  require_same_grid(truth.grid, estimate.grid, "weighted_logistic_loss_gradient");
  std::vector<double> grad(truth.labels.size(), 0.0);
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] == Occupancy::kUnknown) continue;
    const double y = static_cast<double>(static_cast<std::int8_t>(truth.labels[i]));
    grad[i] = -weights.weights[i] * y * sigma(-y * estimate.confidence[i]);
  }
  return grad;
}

double bernoulli_entropy(double log_odds) {
  // H(B(sigma(c))) = sigma(c)*softplus(-c) + sigma(-c)*softplus(c);
  // uses -log sigma(c) = softplus(-c) so both terms stay finite at large |c|.
  const double p = sigma(log_odds);
  return p * softplus(-log_odds) + (1.0 - p) * softplus(log_odds);
}

std::vector<double> entropy_loss_vector(const ConfidenceMap& estimate) {
  std::vector<double> eps(estimate.confidence.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    eps[i] = bernoulli_entropy(estimate.confidence[i]);
  }
  return eps;
}

LossWeights class_balanced_weights(const GroundTruthMap& truth) {
  std::size_t n_occ = 0, n_emp = 0;
  for (const Occupancy l : truth.labels) {
    if (l == Occupancy::kOccupied) ++n_occ;
    if (l == Occupancy::kEmpty) ++n_emp;
  }
  if (n_occ == 0 || n_emp == 0) {
    throw std::invalid_argument("class_balanced_weights: degenerate labels (a class is empty)");
  }
  const double n = static_cast<double>(n_occ + n_emp);
  const double w_occ = n / (2.0 * static_cast<double>(n_occ));
  const double w_emp = n / (2.0 * static_cast<double>(n_emp));
  LossWeights w;
  w.weights.resize(truth.labels.size(), 0.0);
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] == Occupancy::kOccupied) w.weights[i] = w_occ;
    if (truth.labels[i] == Occupancy::kEmpty) w.weights[i] = w_emp;
  }
  return w;
}

}  // namespace avmap

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

#include "avmap/reconstruction.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "avmap/map_io.hpp"
#include "avmap/rng.hpp"

namespace avmap {

MappingModel make_zero_model(const FeatureSpec& spec, std::uint64_t seed) {
  MappingModel model;
  model.spec = spec;
  model.theta.assign(static_cast<std::size_t>(spec.feature_length()), 0.0);
  model.velocity.assign(model.theta.size(), 0.0);
  model.seed = seed;
  return model;
}

double LearningRateSchedule::at(int epoch) const {
  if (epoch < 0) throw std::invalid_argument("LearningRateSchedule: negative epoch");
  return base * std::pow(decay, epoch / period);
}

Vec3 local_to_world(const SensorPose& pose, const Vec3& local) {
  return pose.position + Mat3::rotation_z(pose.yaw) * local;
}

Vec3 world_to_local(const SensorPose& pose, const Vec3& world) {
  return Mat3::rotation_z(-pose.yaw) * (world - pose.position);
}

EvidenceMap extract_local_map(const EvidenceMap& global, const SensorPose& pose,
                              const LocalGridSpec& spec) {
  EvidenceMap local(spec.grid());
  for (std::size_t i = 0; i < local.evidence.size(); ++i) {
    const Vec3 world = local_to_world(pose, local.grid.voxel_center(local.grid.coords(i)));
    if (const auto g = global.grid.index_at(world)) {
      local.evidence[i] = global.evidence[*g];
    }
  }
  return local;
}

GroundTruthMap extract_local_labels(const GroundTruthMap& global, const SensorPose& pose,
                                    const LocalGridSpec& spec) {
  GroundTruthMap local(spec.grid());
  for (std::size_t i = 0; i < local.labels.size(); ++i) {
    const Vec3 world = local_to_world(pose, local.grid.voxel_center(local.grid.coords(i)));
    if (const auto g = global.grid.index_at(world)) {
      local.labels[i] = global.labels[*g];
    }
  }
  return local;
}

namespace {

// Walks the active feature indices of one voxel: for every in-bounds window
// offset, the one-hot channel matching the evidence there, plus the bias.
template <typename Fn>
void for_each_active_feature(const FeatureSpec& spec, const EvidenceMap& map,
                             const VoxelCoord& at, Fn&& fn) {
  const int r = spec.radius;
  const int w = spec.window();
  int offset = 0;
  for (int dz = -r; dz <= r; ++dz) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx, ++offset) {
        const VoxelCoord c{at.x + dx, at.y + dy, at.z + dz};
        if (!map.grid.contains(c)) continue;
        const auto channel = static_cast<int>(map.evidence[map.grid.index(c)]);
        fn(3 * offset + channel);
      }
    }
  }
  fn(3 * w * w * w);  // bias
}

}  // namespace

ConfidenceMap predict(const MappingModel& model, const EvidenceMap& local) {
  if (static_cast<int>(model.theta.size()) != model.spec.feature_length()) {
    throw std::invalid_argument("predict: theta length does not match feature spec");
  }
  ConfidenceMap out(local.grid);
  for (std::size_t i = 0; i < out.confidence.size(); ++i) {
    double h = 0.0;
    for_each_active_feature(model.spec, local, local.grid.coords(i),
                            [&](int f) { h += model.theta[static_cast<std::size_t>(f)]; });
    out.confidence[i] = h;
  }
  return out;
}

std::vector<double> theta_gradient(const MappingModel& model, const TrainExample& example,
                                   const LossWeights& weights) {
  const ConfidenceMap h = predict(model, example.x);
  const std::vector<double> dloss_dh =
      weighted_logistic_loss_gradient(example.y, h, weights);
  std::vector<double> grad(model.theta.size(), 0.0);
  for (std::size_t i = 0; i < dloss_dh.size(); ++i) {
    if (dloss_dh[i] == 0.0) continue;
    const double coef = dloss_dh[i];
    for_each_active_feature(model.spec, example.x, example.x.grid.coords(i),
                            [&](int f) { grad[static_cast<std::size_t>(f)] += coef; });
  }
  return grad;
}

namespace {

bool has_both_classes(const GroundTruthMap& y) {
  bool occ = false, emp = false;
  for (const Occupancy l : y.labels) {
    occ |= l == Occupancy::kOccupied;
    emp |= l == Occupancy::kEmpty;
  }
  return occ && emp;
}

}  // namespace

double train_epoch(MappingModel& model, const std::vector<TrainExample>& dataset,
                   const TrainConfig& cfg, int epoch) {
  if (dataset.empty()) throw std::invalid_argument("train_epoch: empty dataset");
  if (cfg.batch_size < 1) throw std::invalid_argument("train_epoch: batch_size must be >= 1");
  if (model.velocity.size() != model.theta.size()) {
    model.velocity.assign(model.theta.size(), 0.0);
  }
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 gen(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
  shuffle_deterministic(order, gen);

  const double alpha = cfg.learning_rate.at(epoch);
  std::vector<double> batch_grad(model.theta.size(), 0.0);
  int in_batch = 0;
  const auto apply_batch = [&]() {
    if (in_batch == 0) return;
    for (std::size_t f = 0; f < model.theta.size(); ++f) {
      model.velocity[f] =
          cfg.momentum * model.velocity[f] - alpha * batch_grad[f] / in_batch;
      model.theta[f] += model.velocity[f];
      batch_grad[f] = 0.0;
    }
    in_batch = 0;
  };

  double loss_sum = 0.0;
  std::size_t used = 0;
  for (const std::size_t idx : order) {
    const TrainExample& example = dataset[idx];
    if (!has_both_classes(example.y)) continue;  // no balanced weights exist
    const LossWeights w = class_balanced_weights(example.y);
    double weight_sum = 0.0;
    for (const double v : w.weights) weight_sum += v;

    const std::vector<double> grad = theta_gradient(model, example, w);
    for (std::size_t f = 0; f < model.theta.size(); ++f) batch_grad[f] += grad[f];
    if (++in_batch == cfg.batch_size) apply_batch();

    loss_sum += weighted_logistic_loss(example.y, predict(model, example.x), w) / weight_sum;
    ++used;
  }
  apply_batch();  // trailing partial batch
  ++model.epochs_trained;
  return used > 0 ? loss_sum / static_cast<double>(used) : 0.0;
}

std::vector<double> train(MappingModel& model, const std::vector<TrainExample>& dataset,
                          const TrainConfig& cfg) {
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    losses.push_back(train_epoch(model, dataset, cfg, epoch));
  }
  return losses;
}

void splat_local_confidence(ConfidenceMap& global, const ConfidenceMap& local,
                            const SensorPose& pose, double clamp) {
  ConfidenceMap delta(global.grid);
  for (std::size_t i = 0; i < local.confidence.size(); ++i) {
    const Vec3 world = local_to_world(pose, local.grid.voxel_center(local.grid.coords(i)));
    if (const auto g = global.grid.index_at(world)) {
      delta.confidence[*g] += local.confidence[i];
    }
  }
  update_confidence(global, delta, clamp);
}

void save_model(const std::filesystem::path& path, const MappingModel& model) {
  static_assert(std::endian::native == std::endian::little,
                "model weights are little-endian; byte-swapping writer not implemented");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  out << "AVMAPMODEL 1\n";
  out << "radius " << model.spec.radius << '\n';
  out << "seed " << model.seed << '\n';
  out << "epochs " << model.epochs_trained << '\n';
  out << "weights " << model.theta.size() << '\n';
  for (const double v : model.theta) {
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof(double));
    out.write(buf, sizeof(double));
  }
  if (!out) throw std::runtime_error("save_model: write failed: " + path.string());
}

std::vector<TrainExample> load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + manifest_path.string());
  const std::filesystem::path base = manifest_path.parent_path();
  std::vector<TrainExample> dataset;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::string x_path, y_path;
    if (!(ss >> x_path >> y_path)) {
      throw std::runtime_error("load_dataset: bad manifest line: " + line);
    }
    TrainExample example;
    example.x = load_evidence(base / x_path);
    example.y = load_ground_truth(base / y_path);
    if (!(example.x.grid == example.y.grid)) {
      throw std::runtime_error("load_dataset: grid mismatch in pair: " + line);
    }
    dataset.push_back(std::move(example));
  }
  return dataset;
}

std::filesystem::path save_dataset(const std::filesystem::path& dir,
                                   const std::vector<TrainExample>& dataset) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path manifest_path = dir / "manifest.txt";
  std::ofstream manifest(manifest_path);
  if (!manifest) {
    throw std::runtime_error("save_dataset: cannot open " + manifest_path.string());
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::string x_name = "x_" + std::to_string(i) + ".avm";
    const std::string y_name = "y_" + std::to_string(i) + ".avm";
    save_map(dir / x_name, dataset[i].x);
    save_map(dir / y_name, dataset[i].y);
    manifest << x_name << ' ' << y_name << '\n';
  }
  if (!manifest) throw std::runtime_error("save_dataset: write failed");
  return manifest_path;
}

MappingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "AVMAPMODEL 1") {
    throw std::runtime_error("load_model: bad header in " + path.string());
  }
  MappingModel model;
  std::size_t weight_count = 0;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("load_model: truncated header");
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "radius") {
      ss >> model.spec.radius;
    } else if (key == "seed") {
      ss >> model.seed;
    } else if (key == "epochs") {
      ss >> model.epochs_trained;
    } else if (key == "weights") {
      ss >> weight_count;
    } else {
      throw std::runtime_error("load_model: unknown header key: " + key);
    }
    if (!ss) throw std::runtime_error("load_model: bad header line: " + line);
  }
  if (weight_count != static_cast<std::size_t>(model.spec.feature_length())) {
    throw std::runtime_error("load_model: weight count does not match feature spec");
  }
  model.theta.resize(weight_count);
  for (double& v : model.theta) {
    char buf[sizeof(double)];
    in.read(buf, sizeof(double));
    std::memcpy(&v, buf, sizeof(double));
  }
  if (!in) throw std::runtime_error("load_model: truncated weights in " + path.string());
  model.velocity.assign(model.theta.size(), 0.0);
  return model;
}

}  // namespace avmap

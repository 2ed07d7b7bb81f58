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

#include "avmap/planner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "avmap/rng.hpp"

namespace avmap {

void PlanProblem::normalize() {
  if (num_positions < 1) throw std::invalid_argument("PlanProblem: num_positions < 1");
  if (budget < 1) throw std::invalid_argument("PlanProblem: budget < 1");
  for (const double e : epsilon) {
    if (!(e >= 0.0)) throw std::invalid_argument("PlanProblem: epsilon must be nonnegative");
  }
  std::set<int> ids;
  for (PlanRay& ray : rays) {
    if (ray.position < 0 || ray.position >= num_positions) {
      throw std::invalid_argument("PlanProblem: ray position out of range");
    }
    if (!ids.insert(ray.ray_id).second) {
      throw std::invalid_argument("PlanProblem: duplicate ray id");
    }
    std::sort(ray.coverage.entries.begin(), ray.coverage.entries.end(),
              [](const CoverageEntry& a, const CoverageEntry& b) { return a.voxel < b.voxel; });
    for (const CoverageEntry& e : ray.coverage.entries) {
      if (e.voxel >= epsilon.size()) {
        throw std::invalid_argument("PlanProblem: coverage voxel out of range");
      }
      if (!(e.p >= 0.0 && e.p <= 1.0)) {
        throw std::invalid_argument("PlanProblem: p outside [0,1]");
      }
    }
  }
}

double delta(const std::vector<double>& residual, const CoverageVector& coverage) {
  double d = 0.0;
  for (const CoverageEntry& e : coverage.entries) {
    d += residual[e.voxel] * (1.0 - e.p);
  }
  return d;
}

double expected_loss(const std::vector<double>& epsilon,
                     const std::vector<CoverageVector>& rays) {
  std::vector<double> residual = epsilon;
  for (const CoverageVector& ray : rays) {
    for (const CoverageEntry& e : ray.entries) residual[e.voxel] *= e.p;
  }
  double total = 0.0;
  for (const double b : residual) total += b;
  return total;
}

double expected_loss(const std::vector<double>& epsilon, const PlanProblem& problem,
                     const std::vector<std::vector<int>>& selected) {
  std::vector<CoverageVector> rays;
  for (const auto& group : selected) {
    for (const int id : group) {
      const auto it = std::find_if(problem.rays.begin(), problem.rays.end(),
                                   [id](const PlanRay& r) { return r.ray_id == id; });
      if (it == problem.rays.end()) {
        throw std::invalid_argument("expected_loss: unknown ray id in selection");
      }
      rays.push_back(it->coverage);
    }
  }
  return expected_loss(epsilon, rays);
}

namespace {

double residual_sum(const std::vector<double>& residual) {
  double s = 0.0;
  for (const double b : residual) s += b;
  return s;
}

struct SelectionState {
  std::vector<double> residual;
  std::vector<int> per_position_count;
  double cost;
  PlanResult result;

  explicit SelectionState(const PlanProblem& problem)
      : residual(problem.epsilon),
        per_position_count(static_cast<std::size_t>(problem.num_positions), 0),
        cost(residual_sum(residual)) {
    result.selected.resize(static_cast<std::size_t>(problem.num_positions));
    result.cost_trace.push_back(cost);
  }

  // Applies the chosen ray and records the trace. The cost is updated by the
  // realized decrease over the ray's support, whose terms are nonnegative
  // even in floating point, so the trace cannot tick upward. Returns true
  // when the position just reached its budget.
  bool commit(const PlanProblem& problem, std::size_t ray_slot, double fresh_delta) {
    const PlanRay& ray = problem.rays[ray_slot];
    result.selected[static_cast<std::size_t>(ray.position)].push_back(ray.ray_id);
    result.selection_order.push_back(ray.ray_id);
    result.selected_deltas.push_back(fresh_delta);
    double decrease = 0.0;
    for (const CoverageEntry& e : ray.coverage.entries) {
      const double updated = residual[e.voxel] * e.p;
      decrease += residual[e.voxel] - updated;
      residual[e.voxel] = updated;
    }
    cost -= decrease;
    result.cost_trace.push_back(cost);
    return ++per_position_count[static_cast<std::size_t>(ray.position)] >= problem.budget;
  }

  PlanResult finish() {
    result.final_loss = result.cost_trace.back();
    return std::move(result);
  }
};

}  // namespace

PlanResult greedy_plan(const PlanProblem& problem, const EvalObserver& observer) {
  SelectionState state(problem);
  std::vector<std::size_t> available(problem.rays.size());
  for (std::size_t i = 0; i < available.size(); ++i) available[i] = i;

  while (!available.empty()) {
    std::size_t best_pos = 0;
    double best_delta = -1.0;
    int best_id = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < available.size(); ++k) {
      const PlanRay& ray = problem.rays[available[k]];
      const double d = delta(state.residual, ray.coverage);
      ++state.result.evaluations;
      if (observer) observer(ray.ray_id, d);
      if (d > best_delta || (d == best_delta && ray.ray_id < best_id)) {
        best_delta = d;
        best_id = ray.ray_id;
        best_pos = k;
      }
    }
    const std::size_t chosen = available[best_pos];
    const int chosen_position = problem.rays[chosen].position;
    const bool closed = state.commit(problem, chosen, best_delta);
    if (closed) {
      std::erase_if(available, [&](std::size_t slot) {
        return problem.rays[slot].position == chosen_position;
      });
    } else {
      available.erase(available.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
  }
  return state.finish();
}

PlanResult prioritized_greedy_plan(const PlanProblem& problem, const EvalObserver& observer) {
  SelectionState state(problem);

  struct Entry {
    std::size_t slot;
    int ray_id;
    double priority;  // stale upper bound on the loss decrease
  };
  // Ordering used everywhere: larger priority first, smaller ray id on ties.
  const auto before = [](const Entry& a, const Entry& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.ray_id < b.ray_id;
  };

  // Infinite initial priorities force a first evaluation of every ray.
  std::vector<Entry> queue;
  queue.reserve(problem.rays.size());
  for (std::size_t i = 0; i < problem.rays.size(); ++i) {
    queue.push_back({i, problem.rays[i].ray_id, std::numeric_limits<double>::infinity()});
  }
  std::sort(queue.begin(), queue.end(), before);

  while (!queue.empty()) {
    // Refresh priorities in stale order until the best fresh value strictly
    // exceeds the next stale priority. Stale values never underestimate, so
    // no unrefreshed ray can then win; the comparison must be strict so that
    // every ray whose stale priority ties the current best is also refreshed
    // before the ray-id tie-break is applied.
    std::size_t refreshed = 0;
    double best_fresh = -std::numeric_limits<double>::infinity();
    while (refreshed < queue.size()) {
      Entry& entry = queue[refreshed];
      entry.priority = delta(state.residual, problem.rays[entry.slot].coverage);
      ++state.result.evaluations;
      if (observer) observer(entry.ray_id, entry.priority);
      best_fresh = std::max(best_fresh, entry.priority);
      ++refreshed;
      if (refreshed < queue.size() && best_fresh > queue[refreshed].priority) break;
    }
    std::sort(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(refreshed), before);
    std::inplace_merge(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(refreshed),
                       queue.end(), before);

    const Entry chosen = queue.front();
    const int chosen_position = problem.rays[chosen.slot].position;
    const bool closed = state.commit(problem, chosen.slot, chosen.priority);
    if (closed) {
      std::erase_if(queue, [&](const Entry& e) {
        return problem.rays[e.slot].position == chosen_position;
      });
    } else {
      queue.erase(queue.begin());
    }
  }
  return state.finish();
}

void save_problem(const std::filesystem::path& path, const PlanProblem& problem) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_problem: cannot open " + path.string());
  char buf[64];
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << problem.num_positions << ' ' << problem.budget << ' ' << problem.rays.size() << ' '
      << problem.epsilon.size() << '\n';
  for (std::size_t i = 0; i < problem.epsilon.size(); ++i) {
    out << (i ? " " : "") << fmt(problem.epsilon[i]);
  }
  out << '\n';
  for (const PlanRay& ray : problem.rays) {
    out << ray.ray_id << ' ' << ray.position;
    for (const CoverageEntry& e : ray.coverage.entries) {
      out << ' ' << e.voxel << ':' << fmt(e.p);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_problem: write failed: " + path.string());
}

PlanProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_problem: cannot open " + path.string());
  PlanProblem problem;
  std::size_t ray_count = 0, voxel_count = 0;
  if (!(in >> problem.num_positions >> problem.budget >> ray_count >> voxel_count)) {
    throw std::runtime_error("load_problem: bad header in " + path.string());
  }
  problem.epsilon.resize(voxel_count);
  for (double& e : problem.epsilon) {
    if (!(in >> e)) throw std::runtime_error("load_problem: bad epsilon line");
  }
  problem.rays.resize(ray_count);
  std::string line;
  std::getline(in, line);  // finish the epsilon line
  for (PlanRay& ray : problem.rays) {
    if (!std::getline(in, line)) throw std::runtime_error("load_problem: missing ray record");
    std::istringstream ss(line);
    if (!(ss >> ray.ray_id >> ray.position)) {
      throw std::runtime_error("load_problem: bad ray record: " + line);
    }
    std::string pair;
    while (ss >> pair) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("load_problem: bad coverage pair: " + pair);
      }
      CoverageEntry e;
      e.voxel = std::stoull(pair.substr(0, colon));
      e.p = std::stod(pair.substr(colon + 1));
      ray.coverage.entries.push_back(e);
    }
  }
  problem.normalize();
  return problem;
}

PlanProblem make_random_problem(const RandomProblemSpec& spec, std::mt19937_64& gen) {
  PlanProblem problem;
  problem.num_positions = 1 + static_cast<int>(uniform_below(gen, static_cast<std::uint64_t>(spec.max_positions)));
  problem.budget = 1 + static_cast<int>(uniform_below(gen, static_cast<std::uint64_t>(spec.max_budget)));
  const int voxels = 1 + static_cast<int>(uniform_below(gen, static_cast<std::uint64_t>(spec.max_voxels)));
  const int rays = 1 + static_cast<int>(uniform_below(gen, static_cast<std::uint64_t>(spec.max_rays)));

  problem.epsilon.resize(static_cast<std::size_t>(voxels));
  for (double& e : problem.epsilon) e = uniform_real(gen, 0.0, std::numbers::ln2);

  problem.rays.resize(static_cast<std::size_t>(rays));
  for (int j = 0; j < rays; ++j) {
    PlanRay& ray = problem.rays[static_cast<std::size_t>(j)];
    ray.ray_id = j;
    ray.position = static_cast<int>(uniform_below(gen, static_cast<std::uint64_t>(problem.num_positions)));
    const int support =
        1 + static_cast<int>(uniform_below(gen, static_cast<std::uint64_t>(std::min(spec.max_support, voxels))));
    for (const int v : sample_without_replacement(voxels, support, gen)) {
      CoverageEntry e;
      e.voxel = static_cast<std::size_t>(v);
      const double roll = uniform_real(gen);
      if (roll < 0.1) {
        e.p = 0.0;  // deterministic full coverage
      } else if (roll < 0.2) {
        e.p = 1.0;  // listed but useless
      } else {
        e.p = uniform_real(gen);
      }
      ray.coverage.entries.push_back(e);
    }
  }
  problem.normalize();
  return problem;
}

}  // namespace avmap

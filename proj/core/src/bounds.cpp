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

#include "avmap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace avmap {
namespace {

std::vector<std::vector<std::size_t>> slots_by_position(const PlanProblem& problem) {
  std::vector<std::vector<std::size_t>> by_pos(static_cast<std::size_t>(problem.num_positions));
  for (std::size_t i = 0; i < problem.rays.size(); ++i) {
    by_pos[static_cast<std::size_t>(problem.rays[i].position)].push_back(i);
  }
  // Slot lists ordered by ray id so enumeration order is deterministic.
  for (auto& slots : by_pos) {
    std::sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
      return problem.rays[a].ray_id < problem.rays[b].ray_id;
    });
  }
  return by_pos;
}

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t factor = n - k + i;
    if (result > ~std::uint64_t{0} / factor) return ~std::uint64_t{0};
    result = result * factor / i;
  }
  return result;
}

}  // namespace

std::uint64_t brute_force_combinations(const PlanProblem& problem) {
  const auto by_pos = slots_by_position(problem);
  std::uint64_t total = 1;
  for (const auto& slots : by_pos) {
    const std::uint64_t n = slots.size();
    const std::uint64_t k = std::min<std::uint64_t>(static_cast<std::uint64_t>(problem.budget), n);
    const std::uint64_t c = binomial_saturating(n, k);
    if (c != 0 && total > ~std::uint64_t{0} / c) return ~std::uint64_t{0};
    total *= std::max<std::uint64_t>(c, 1);
  }
  return total;
}

namespace {

struct BruteForceSearch {
  const PlanProblem& problem;
  const std::vector<std::vector<std::size_t>>& by_pos;
  std::vector<std::size_t> chosen = {};  // ray slots of the current partial selection
  double best_cost = 0.0;
  bool has_best = false;
  std::vector<int> best_ids = {};        // canonical: globally sorted ray ids

  void leaf() {
    std::vector<double> residual = problem.epsilon;
    for (const std::size_t slot : chosen) {
      for (const CoverageEntry& e : problem.rays[slot].coverage.entries) {
        residual[e.voxel] *= e.p;
      }
    }
    double cost = 0.0;
    for (const double b : residual) cost += b;

    std::vector<int> ids;
    ids.reserve(chosen.size());
    for (const std::size_t slot : chosen) ids.push_back(problem.rays[slot].ray_id);
    std::sort(ids.begin(), ids.end());

    if (!has_best || cost < best_cost ||
        (cost == best_cost && std::lexicographical_compare(ids.begin(), ids.end(),
                                                           best_ids.begin(), best_ids.end()))) {
      has_best = true;
      best_cost = cost;
      best_ids = std::move(ids);
    }
  }

  // Enumerates size-k index combinations of by_pos[pos] in increasing order.
  void combos(std::size_t pos, std::size_t next, std::size_t remaining) {
    if (remaining == 0) {
      descend(pos + 1);
      return;
    }
    const auto& slots = by_pos[pos];
    for (std::size_t i = next; i + remaining <= slots.size(); ++i) {
      chosen.push_back(slots[i]);
      combos(pos, i + 1, remaining - 1);
      chosen.pop_back();
    }
  }

  void descend(std::size_t pos) {
    if (pos == by_pos.size()) {
      leaf();
      return;
    }
    const std::size_t k =
        std::min<std::size_t>(static_cast<std::size_t>(problem.budget), by_pos[pos].size());
    combos(pos, 0, k);
  }
};

}  // namespace

BruteForceResult brute_force_plan(const PlanProblem& problem, std::uint64_t max_combinations) {
  const std::uint64_t combos = brute_force_combinations(problem);
  if (combos > max_combinations) {
    throw std::invalid_argument("brute_force_plan: instance too large (" +
                                std::to_string(combos) + " combinations)");
  }
  const auto by_pos = slots_by_position(problem);
  BruteForceSearch search{problem, by_pos};
  search.descend(0);

  BruteForceResult result;
  result.opt = search.best_cost;
  result.selected.resize(static_cast<std::size_t>(problem.num_positions));
  for (const int id : search.best_ids) {
    const auto it = std::find_if(problem.rays.begin(), problem.rays.end(),
                                 [id](const PlanRay& r) { return r.ray_id == id; });
    result.selected[static_cast<std::size_t>(it->position)].push_back(id);
  }
  return result;
}

double lower_bound_opt(const PlanProblem& problem) {
  std::vector<std::vector<double>> per_voxel(problem.epsilon.size());
  for (const PlanRay& ray : problem.rays) {
    for (const CoverageEntry& e : ray.coverage.entries) {
      per_voxel[e.voxel].push_back(e.p);
    }
  }
  const std::size_t max_rays =
      static_cast<std::size_t>(problem.budget) * static_cast<std::size_t>(problem.num_positions);
  double lb = 0.0;
  for (std::size_t i = 0; i < problem.epsilon.size(); ++i) {
    auto& ps = per_voxel[i];
    const std::size_t take = std::min(max_rays, ps.size());
    std::partial_sort(ps.begin(), ps.begin() + static_cast<std::ptrdiff_t>(take), ps.end());
    double prod = 1.0;
    for (std::size_t k = 0; k < take; ++k) prod *= ps[k];
    lb += problem.epsilon[i] * prod;
  }
  return lb;
}

CostBound ub_f_K(double total_loss, double opt, int budget) {
  if (budget < 1) throw std::invalid_argument("ub_f_K: budget must be >= 1");
  if (!(opt >= 0.0)) throw std::invalid_argument("ub_f_K: opt must be nonnegative");
  if (opt > total_loss) throw std::invalid_argument("ub_f_K: opt exceeds total loss");
  const double alpha_finite = std::pow(1.0 - 1.0 / budget, budget);
  const double alpha_limit = std::exp(-1.0);
  return {total_loss * alpha_finite + opt * (1.0 - alpha_finite),
          total_loss * alpha_limit + opt * (1.0 - alpha_limit)};
}

std::vector<double> gamma_weights(int horizon) {
  if (horizon < 1) throw std::invalid_argument("gamma_weights: horizon must be >= 1");
  const double q = std::exp(-1.0 / horizon);
  std::vector<double> gamma(static_cast<std::size_t>(horizon));
  // gamma_u = (1-q) q^(L-1-u); filled from u = L-1 downward so each power is
  // one multiplication away from the previous one.
  double power = 1.0;
  for (int u = horizon - 1; u >= 0; --u) {
    gamma[static_cast<std::size_t>(u)] = (1.0 - q) * power;
    power *= q;
  }
  return gamma;
}

double ub_f_LK(double total_loss, const std::vector<double>& opt_bars, int horizon) {
  if (static_cast<int>(opt_bars.size()) != horizon) {
    throw std::invalid_argument("ub_f_LK: opt_bars length must equal horizon");
  }
  for (std::size_t u = 1; u < opt_bars.size(); ++u) {
    if (opt_bars[u] < opt_bars[u - 1] - 1e-12) {
      throw std::invalid_argument("ub_f_LK: opt_bars must be non-decreasing");
    }
  }
  const std::vector<double> gamma = gamma_weights(horizon);
  double bound = total_loss * std::exp(-1.0);
  for (std::size_t u = 0; u < gamma.size(); ++u) {
    bound += gamma[u] * opt_bars[u];
  }
  return bound;
}

std::optional<double> ub_rho(double total_loss, double lb_opt,
                             const std::vector<double>& position_penalties, int horizon) {
  if (lb_opt < 0.0) throw std::invalid_argument("ub_rho: lb_opt must be nonnegative");
  if (static_cast<int>(position_penalties.size()) != horizon - 1) {
    throw std::invalid_argument("ub_rho: expected horizon-1 position penalties");
  }
  for (const double r : position_penalties) {
    if (!(r >= 0.0)) throw std::invalid_argument("ub_rho: penalties must be nonnegative");
  }
  if (lb_opt == 0.0) return std::nullopt;

  const double inv_e = std::exp(-1.0);
  const std::vector<double> gamma = gamma_weights(horizon);
  // sum_u gamma_u == 1 - 1/e by the geometric-sum identity; using the closed
  // form keeps the bound exactly 1 when lb_opt == E and all penalties vanish.
  double penalty = 0.0;
  double prefix = 0.0;
  for (int u = 1; u < horizon; ++u) {
    prefix += position_penalties[static_cast<std::size_t>(u - 1)];
    penalty += gamma[static_cast<std::size_t>(u)] * (prefix / lb_opt);
  }
  return (total_loss / lb_opt) * inv_e + (1.0 - inv_e) + penalty;
}

std::optional<double> ratio_bound_curve(double opt_over_e, int horizon) {
  if (opt_over_e < 0.0 || opt_over_e > 1.0) {
    throw std::invalid_argument("ratio_bound_curve: ratio must be in [0, 1]");
  }
  if (opt_over_e == 0.0) return std::nullopt;
  // opt == E means no selection can beat the empty plan, and greedy never
  // does worse than it, so the ratio is identically 1.
  if (opt_over_e == 1.0) return 1.0;

  // R_v = V/L with unit-normalized per-voxel losses (E == V), so the
  // accumulated penalty after u closures is u/(L * ratio) in units of lb.
  const double inv_e = std::exp(-1.0);
  const std::vector<double> gamma = gamma_weights(horizon);
  double penalty = 0.0;
  for (int u = 1; u < horizon; ++u) {
    penalty += gamma[static_cast<std::size_t>(u)] *
               (static_cast<double>(u) / (static_cast<double>(horizon) * opt_over_e));
  }
  return inv_e / opt_over_e + (1.0 - inv_e) + penalty;
}

std::vector<double> opt_bars_by_enumeration(const PlanProblem& problem,
                                            std::uint64_t max_combinations) {
  const int horizon = problem.num_positions;
  std::vector<double> bars(static_cast<std::size_t>(horizon));

  // Worst case over which u positions close: the max optimum over all
  // u-subsets of removed positions.
  std::vector<int> removed;
  for (int u = 0; u < horizon; ++u) {
    double worst = 0.0;
    bool first = true;
    removed.assign(static_cast<std::size_t>(u), 0);
    // Enumerate u-subsets of [0, horizon).
    const auto enumerate = [&](auto&& self, int start, int depth) -> void {
      if (depth == u) {
        PlanProblem sub = problem;
        sub.rays.clear();
        for (const PlanRay& ray : problem.rays) {
          if (std::find(removed.begin(), removed.end(), ray.position) == removed.end()) {
            sub.rays.push_back(ray);
          }
        }
        const double opt = brute_force_plan(sub, max_combinations).opt;
        if (first || opt > worst) worst = opt;
        first = false;
        return;
      }
      for (int p = start; p < horizon; ++p) {
        removed[static_cast<std::size_t>(depth)] = p;
        self(self, p + 1, depth + 1);
      }
    };
    enumerate(enumerate, 0, 0);
    bars[static_cast<std::size_t>(u)] = worst;
  }
  return bars;
}

std::size_t decrease_witness(const std::vector<double>& b,
                           const std::vector<CoverageVector>& optimal_rays) {
  if (optimal_rays.empty()) throw std::invalid_argument("decrease_witness: no rays");
  for (const double v : b) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("decrease_witness: b must lie in [0,1]");
    }
  }
  const double k = static_cast<double>(optimal_rays.size());

  std::vector<double> joint(b.size(), 1.0);
  for (const CoverageVector& ray : optimal_rays) {
    for (const CoverageEntry& e : ray.entries) joint[e.voxel] *= e.p;
  }
  double opt = 0.0;
  for (const double p : joint) opt += p;

  double sum_b = 0.0;
  for (const double v : b) sum_b += v;
  const double rhs = sum_b * (1.0 - 1.0 / k) + opt / k;

  for (std::size_t j = 0; j < optimal_rays.size(); ++j) {
    const double lhs = sum_b - delta(b, optimal_rays[j]);  // sum_i p_ij b_i
    if (lhs <= rhs + 1e-12) return j;
  }
  throw std::logic_error("decrease_witness: no ray satisfies the decrease inequality");
}

BoundReport make_bound_report(const PlanProblem& problem, std::uint64_t max_combinations) {
  BoundReport report;
  for (const double e : problem.epsilon) report.total_loss += e;
  report.lb_opt = lower_bound_opt(problem);

  const PlanResult greedy = greedy_plan(problem);
  const PlanResult prioritized = prioritized_greedy_plan(problem);
  report.f_greedy = greedy.final_loss;
  report.greedy_evaluations = greedy.evaluations;
  report.prioritized_evaluations = prioritized.evaluations;

  if (brute_force_combinations(problem) <= max_combinations) {
    const BruteForceResult oracle = brute_force_plan(problem, max_combinations);
    report.opt = oracle.opt;
    const CostBound fk = ub_f_K(report.total_loss, oracle.opt, problem.budget);
    report.ub_fk = fk.limit;
    report.ub_fk_finite = fk.finite_k;
    const std::vector<double> bars = opt_bars_by_enumeration(problem, max_combinations);
    report.ub_flk = ub_f_LK(report.total_loss, bars, problem.num_positions);
    for (std::size_t u = 1; u < bars.size(); ++u) {
      report.position_penalties.push_back(std::max(0.0, bars[u] - bars[u - 1]));
    }
    report.ub_rho =
        ub_rho(report.total_loss, report.lb_opt, report.position_penalties, problem.num_positions);
  } else if (report.lb_opt > 0.0) {
    // Penalties are unknown without the oracle; only the horizon-free part of
    // the ratio bound is available, which is exact for a single position.
    if (problem.num_positions == 1) {
      report.ub_rho = ub_rho(report.total_loss, report.lb_opt, {}, 1);
    }
  }
  return report;
}

}  // namespace avmap

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

#ifndef AVMAP_BOUNDS_HPP_
#define AVMAP_BOUNDS_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "avmap/planner.hpp"

// Certificates for the greedy planner: an exhaustive optimal-plan oracle for
// small instances, a budget-blind lower bound on the optimum, and the cost /
// approximation-ratio upper bounds that hold for greedy selection.

namespace avmap {

inline constexpr std::uint64_t kDefaultBruteForceLimit = 1'000'000;

struct BruteForceResult {
  double opt = 0.0;
  std::vector<std::vector<int>> selected;  // per position, sorted ray ids
};

/// Enumerates every feasible selection (min(budget, |V_l|) rays per position)
/// and returns the exact minimum with its lexicographically smallest
/// minimizer. Throws when the combination count exceeds `max_combinations`.
BruteForceResult brute_force_plan(const PlanProblem& problem,
                                  std::uint64_t max_combinations = kDefaultBruteForceLimit);

/// Number of feasible selections; the brute-force guard quantity.
std::uint64_t brute_force_combinations(const PlanProblem& problem);

/// Budget-blind relaxation: per voxel, the product of its budget*positions
/// smallest miss probabilities over all rays. Never exceeds the optimum.
double lower_bound_opt(const PlanProblem& problem);

struct CostBound {
  double finite_k = 0.0;  // E*(1-1/K)^K + opt*(1-(1-1/K)^K)
  double limit = 0.0;     // E/e + opt*(1-1/e); the finite form never exceeds it
};

/// Cost upper bounds for greedy after `budget` iterations with one position.
/// Requires 0 <= opt <= total_loss.
CostBound ub_f_K(double total_loss, double opt, int budget);

/// gamma_u = (1 - e^(-1/L)) * e^(-(L-1-u)/L) for u = 0..L-1; sums to 1 - 1/e.
std::vector<double> gamma_weights(int horizon);

/// Cost upper bound for greedy after L*K iterations:
/// E/e + sum_u gamma_u * opt_bar_u, with opt_bar_u the optimum achievable
/// after u positions have closed. `opt_bars` must be non-decreasing, length L.
double ub_f_LK(double total_loss, const std::vector<double>& opt_bars, int horizon);

/// Approximation-ratio upper bound from the cost bound and a lower bound on
/// the optimum: E/(lb*e) + sum_u gamma_u * (1 + sum_{v<=u} R_v / lb), where
/// R_v caps the optimum increase when the v-th position closes.
/// `position_penalties` holds R_1..R_{L-1}. lb_opt == 0 yields nullopt (the
/// ratio is unbounded); lb_opt < 0 throws.
std::optional<double> ub_rho(double total_loss, double lb_opt,
                             const std::vector<double>& position_penalties, int horizon);

/// Ratio-bound curve value at a given opt/E ratio with the per-position cap
/// R_v = V/L under unit-normalized per-voxel losses (E == V). A ratio of 1
/// pins the bound to exactly 1: nothing can cost more than the empty plan,
/// so greedy is optimal whenever opt == E. Ratio 0 is unbounded (nullopt).
std::optional<double> ratio_bound_curve(double opt_over_e, int horizon);

/// Exact optimum after the u worst-case positions are removed, for
/// u = 0..L-1, by enumerating position subsets against the oracle.
std::vector<double> opt_bars_by_enumeration(const PlanProblem& problem,
                                            std::uint64_t max_combinations = kDefaultBruteForceLimit);

/// Index (into `optimal_rays`) of a ray satisfying
///   sum_i p_ij b_i <= sum_i b_i (1 - 1/K) + opt/K
/// where opt = sum_i prod_j p_ij over the given rays and b in [0,1]^V.
/// At least one of any optimum-attaining K rays satisfies it; throws if the
/// check fails, which would indicate a broken invariant.
std::size_t decrease_witness(const std::vector<double>& b,
                           const std::vector<CoverageVector>& optimal_rays);

struct BoundReport {
  double total_loss = 0.0;               // E
  double lb_opt = 0.0;
  std::optional<double> opt;             // absent when the oracle guard trips
  double f_greedy = 0.0;
  std::optional<double> ub_fk;           // single-position limit bound (needs opt)
  std::optional<double> ub_fk_finite;
  std::optional<double> ub_flk;          // needs opt_bars, i.e. the oracle
  std::optional<double> ub_rho;          // absent means unbounded
  std::vector<double> position_penalties;  // R_v used for ub_rho, length L-1
  std::uint64_t greedy_evaluations = 0;
  std::uint64_t prioritized_evaluations = 0;
};

/// Runs both planners and assembles every computable bound for one instance.
BoundReport make_bound_report(const PlanProblem& problem,
                              std::uint64_t max_combinations = kDefaultBruteForceLimit);

}  // namespace avmap

#endif  // AVMAP_BOUNDS_HPP_

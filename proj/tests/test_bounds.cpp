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

#include <doctest.h>

#include <cmath>
#include <random>

#include "avmap/bounds.hpp"
#include "avmap/rng.hpp"

using namespace avmap;

namespace {

CoverageVector cov(std::vector<std::pair<std::size_t, double>> pairs) {
  CoverageVector c;
  for (const auto& [voxel, p] : pairs) c.entries.push_back({voxel, p});
  return c;
}

PlanProblem three_ray_instance() {
  PlanProblem p;
  p.num_positions = 1;
  p.budget = 2;
  p.epsilon = {1.0, 1.0, 1.0};
  p.rays = {{1, 0, cov({{0, 0.0}})},
            {2, 0, cov({{1, 0.0}, {2, 0.0}})},
            {3, 0, cov({{1, 0.0}})}};
  p.normalize();
  return p;
}

}  // namespace

TEST_CASE("brute force oracle") {
  SUBCASE("three-ray instance") {
    const BruteForceResult r = brute_force_plan(three_ray_instance());
    CHECK(r.opt == 0.0);
    CHECK(r.selected[0] == std::vector<int>{1, 2});
  }
  SUBCASE("single ray") {
    PlanProblem p;
    p.num_positions = 1;
    p.budget = 1;
    p.epsilon = {2.0, 1.0};
    p.rays = {{0, 0, cov({{0, 0.25}})}};
    p.normalize();
    const BruteForceResult r = brute_force_plan(p);
    CHECK(r.opt == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(r.selected[0] == std::vector<int>{0});
  }
  SUBCASE("budget covering every ray selects everything") {
    std::mt19937_64 gen(5);
    RandomProblemSpec spec;
    spec.max_positions = 2;
    spec.max_rays = 6;
    spec.max_voxels = 10;
    for (int trial = 0; trial < 25; ++trial) {
      PlanProblem p = make_random_problem(spec, gen);
      p.budget = static_cast<int>(p.rays.size()) + 1;
      std::vector<CoverageVector> all;
      for (const PlanRay& ray : p.rays) all.push_back(ray.coverage);
      const BruteForceResult r = brute_force_plan(p);
      CHECK(r.opt == doctest::Approx(expected_loss(p.epsilon, all)).epsilon(1e-12));
    }
  }
  SUBCASE("cost ties resolve to the lexicographically smallest selection") {
    PlanProblem p;
    p.num_positions = 1;
    p.budget = 1;
    p.epsilon = {1.0};
    // Identical coverage, so every single-ray selection costs the same.
    p.rays = {{7, 0, cov({{0, 0.5}})}, {3, 0, cov({{0, 0.5}})}, {5, 0, cov({{0, 0.5}})}};
    p.normalize();
    const BruteForceResult r = brute_force_plan(p);
    CHECK(r.selected[0] == std::vector<int>{3});
  }
  SUBCASE("combination guard") {
    std::mt19937_64 gen(6);
    RandomProblemSpec spec;
    spec.max_positions = 1;
    spec.max_rays = 20;
    PlanProblem p = make_random_problem(spec, gen);
    while (p.rays.size() < 12) p = make_random_problem(spec, gen);
    p.budget = 6;
    CHECK_THROWS_AS(brute_force_plan(p, 10), std::invalid_argument);
  }
}

TEST_CASE("lower bound on the optimum") {
  SUBCASE("one ray zeroing every voxel") {
    PlanProblem p;
    p.num_positions = 1;
    p.budget = 1;
    p.epsilon = {1.0, 2.0};
    p.rays = {{0, 0, cov({{0, 0.0}, {1, 0.0}})}};
    p.normalize();
    CHECK(lower_bound_opt(p) == 0.0);
  }
  SUBCASE("single voxel picks the smallest miss probability") {
    PlanProblem p;
    p.num_positions = 1;
    p.budget = 1;
    p.epsilon = {1.0};
    p.rays = {{0, 0, cov({{0, 0.5}})}, {1, 0, cov({{0, 0.4}})}};
    p.normalize();
    CHECK(lower_bound_opt(p) == doctest::Approx(0.4).epsilon(1e-15));
  }
  SUBCASE("never exceeds the exact optimum") {
    std::mt19937_64 gen(7);
    const RandomProblemSpec spec;
    for (int trial = 0; trial < 200; ++trial) {
      const PlanProblem p = make_random_problem(spec, gen);
      CHECK(lower_bound_opt(p) <= brute_force_plan(p).opt + 1e-12);
    }
  }
}

TEST_CASE("cost bound after one position of iterations") {
  const CostBound zero_opt = ub_f_K(1.0, 0.0, 1000);
  CHECK(zero_opt.limit == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(zero_opt.finite_k <= zero_opt.limit);

  CHECK(ub_f_K(1.0, 0.0, 1).finite_k == 0.0);  // (1 - 1/1)^1 = 0
  CHECK(ub_f_K(2.0, 2.0, 5).finite_k == 2.0);
  CHECK(ub_f_K(2.0, 2.0, 5).limit == 2.0);
  CHECK_THROWS_AS(ub_f_K(1.0, 1.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(ub_f_K(1.0, -0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(ub_f_K(1.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("gamma weights sum to 1 - 1/e") {
  const double expected = 1.0 - std::exp(-1.0);
  for (int horizon = 1; horizon <= 64; ++horizon) {
    const std::vector<double> gamma = gamma_weights(horizon);
    REQUIRE(gamma.size() == static_cast<std::size_t>(horizon));
    double sum = 0.0;
    for (const double g : gamma) {
      CHECK(g > 0.0);
      sum += g;
    }
    CHECK(std::abs(sum - expected) <= 1e-12);
  }
}

TEST_CASE("cost bound over the full horizon") {
  SUBCASE("constant opt bars reduce to the single-position bound") {
    for (int horizon : {1, 2, 5, 16}) {
      const std::vector<double> bars(static_cast<std::size_t>(horizon), 0.37);
      const double flk = ub_f_LK(2.0, bars, horizon);
      const double fk = ub_f_K(2.0, 0.37, 11).limit;
      CHECK(std::abs(flk - fk) <= 1e-12);
    }
  }
  SUBCASE("single position matches exactly") {
    CHECK(ub_f_LK(2.0, {0.37}, 1) == ub_f_K(2.0, 0.37, 11).limit);
  }
  SUBCASE("frozen two-position value") {
    // 1/e + (1 - e^(-1/2)) * (e^(-1/2)*0.1 + 0.3)
    CHECK(ub_f_LK(1.0, {0.1, 0.3}, 2) == doctest::Approx(0.5097853651117714).epsilon(1e-13));
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(ub_f_LK(1.0, {0.1, 0.2, 0.3}, 2), std::invalid_argument);
    CHECK_THROWS_AS(ub_f_LK(1.0, {0.3, 0.1}, 2), std::invalid_argument);
  }
}

TEST_CASE("approximation ratio bound") {
  SUBCASE("opt equal to the total loss pins the ratio to exactly one") {
    const auto v = ub_rho(5.0, 5.0, {0.0, 0.0}, 3);
    REQUIRE(v.has_value());
    CHECK(*v == 1.0);
  }
  SUBCASE("vanishing lower bound blows up") {
    const auto v = ub_rho(1.0, 1e-9, {}, 1);
    REQUIRE(v.has_value());
    CHECK(*v > 1e6);
    CHECK_FALSE(ub_rho(1.0, 0.0, {}, 1).has_value());
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(ub_rho(1.0, -0.1, {}, 1), std::invalid_argument);
    CHECK_THROWS_AS(ub_rho(1.0, 0.5, {0.1}, 1), std::invalid_argument);
    CHECK_THROWS_AS(ub_rho(1.0, 0.5, {-0.1, 0.0}, 3), std::invalid_argument);
  }
  SUBCASE("monotone in the lower bound and in each penalty") {
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 50; ++trial) {
      const int horizon = 2 + static_cast<int>(uniform_below(gen, 4));
      std::vector<double> penalties;
      for (int v = 1; v < horizon; ++v) penalties.push_back(uniform_real(gen, 0.0, 2.0));
      const double lb = uniform_real(gen, 0.05, 1.0);
      const double base = *ub_rho(1.0, lb, penalties, horizon);
      CHECK(*ub_rho(1.0, lb + 0.05, penalties, horizon) <= base + 1e-15);
      for (std::size_t v = 0; v < penalties.size(); ++v) {
        std::vector<double> bumped = penalties;
        bumped[v] += 0.25;
        CHECK(*ub_rho(1.0, lb, bumped, horizon) >= base - 1e-15);
      }
    }
  }
}

TEST_CASE("ratio bound curve") {
  CHECK_FALSE(ratio_bound_curve(0.0, 4).has_value());
  for (int horizon : {1, 2, 4}) {
    CHECK(*ratio_bound_curve(1.0, horizon) == 1.0);
    double prev = *ratio_bound_curve(0.05, horizon);
    for (double r = 0.1; r <= 1.0001; r += 0.05) {
      const double v = *ratio_bound_curve(std::min(r, 1.0), horizon);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  // With one position there are no closing penalties; the curve is the plain
  // ratio bound.
  for (double r = 0.1; r < 1.0; r += 0.2) {
    CHECK(*ratio_bound_curve(r, 1) == doctest::Approx(*ub_rho(1.0, r, {}, 1)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(ratio_bound_curve(-0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(ratio_bound_curve(1.1, 2), std::invalid_argument);
}

TEST_CASE("decrease witness") {
  std::mt19937_64 gen(11);

  SUBCASE("single ray instances are their own witness") {
    const std::vector<CoverageVector> rays = {cov({{0, 0.3}, {2, 0.9}})};
    CHECK(decrease_witness({0.5, 0.5, 0.5}, rays) == 0);
  }
  SUBCASE("zero b admits any ray") {
    const std::vector<CoverageVector> rays = {cov({{0, 0.3}}), cov({{1, 0.7}})};
    CHECK(decrease_witness({0.0, 0.0}, rays) < 2);
  }
  SUBCASE("a witness exists on random instances") {
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t voxels = 1 + uniform_below(gen, 20);
      const std::size_t k = 1 + uniform_below(gen, 4);
      std::vector<CoverageVector> rays(k);
      for (CoverageVector& ray : rays) {
        for (std::size_t v = 0; v < voxels; ++v) {
          if (uniform_real(gen) < 0.6) ray.entries.push_back({v, uniform_real(gen)});
        }
      }
      std::vector<double> b(voxels);
      for (double& x : b) x = uniform_real(gen);

      const std::size_t j = decrease_witness(b, rays);

      // Re-check the inequality the witness is supposed to satisfy.
      std::vector<double> joint(voxels, 1.0);
      for (const CoverageVector& ray : rays) {
        for (const CoverageEntry& e : ray.entries) joint[e.voxel] *= e.p;
      }
      double opt = 0.0, sum_b = 0.0, lhs = 0.0;
      for (std::size_t v = 0; v < voxels; ++v) {
        opt += joint[v];
        sum_b += b[v];
      }
      std::vector<double> p(voxels, 1.0);
      for (const CoverageEntry& e : rays[j].entries) p[e.voxel] = e.p;
      for (std::size_t v = 0; v < voxels; ++v) lhs += p[v] * b[v];
      CHECK(lhs <= sum_b * (1.0 - 1.0 / static_cast<double>(k)) +
                       opt / static_cast<double>(k) + 1e-12);
    }
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(decrease_witness({0.5}, {}), std::invalid_argument);
    CHECK_THROWS_AS(decrease_witness({1.5}, {cov({{0, 0.5}})}), std::invalid_argument);
  }
}

TEST_CASE("bound report sandwich on random instances") {
  std::mt19937_64 gen(222);
  const RandomProblemSpec spec;
  for (int trial = 0; trial < 200; ++trial) {
    const PlanProblem problem = make_random_problem(spec, gen);
    const BoundReport report = make_bound_report(problem);
    REQUIRE(report.opt.has_value());
    CHECK(report.lb_opt <= *report.opt + 1e-12);
    CHECK(*report.opt <= report.f_greedy + 1e-9);
    REQUIRE(report.ub_flk.has_value());
    CHECK(report.f_greedy <= *report.ub_flk + 1e-9);
    if (problem.num_positions == 1) {
      CHECK(report.f_greedy <= *report.ub_fk + 1e-9);
      CHECK(*report.ub_fk_finite <= *report.ub_fk + 1e-12);
    }
    if (*report.opt > 0.0 && report.ub_rho.has_value()) {
      CHECK(report.f_greedy / *report.opt <= *report.ub_rho + 1e-9);
    }
    // First pass forces one evaluation per ray; beyond that, lazy saves work.
    CHECK(report.prioritized_evaluations <= report.greedy_evaluations + problem.rays.size());
  }
}

TEST_CASE("opt bars are non-decreasing and anchored at the optimum") {
  std::mt19937_64 gen(333);
  RandomProblemSpec spec;
  spec.max_positions = 3;
  for (int trial = 0; trial < 50; ++trial) {
    const PlanProblem problem = make_random_problem(spec, gen);
    const std::vector<double> bars = opt_bars_by_enumeration(problem);
    CHECK(bars[0] == doctest::Approx(brute_force_plan(problem).opt).epsilon(1e-12));
    for (std::size_t u = 1; u < bars.size(); ++u) {
      CHECK(bars[u] >= bars[u - 1] - 1e-12);
    }
  }
}

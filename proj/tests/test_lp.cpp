// Copyright 2026 The maro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "maro/lp.hpp"

#include "doctest.h"
#include "support/test_util.hpp"

using namespace maro;

namespace {

LinearProgram empty_lp(int n) {
  LinearProgram lp;
  lp.c = Vec::Zero(n);
  lp.lo = Vec::Constant(n, -kInf);
  lp.hi = Vec::Constant(n, kInf);
  lp.a_eq = Mat(0, n);
  lp.b_eq = Vec(0);
  lp.a_ge = Mat(0, n);
  lp.b_ge = Vec(0);
  return lp;
}

}  // namespace

TEST_CASE("two-variable covering LP") {
  LinearProgram lp = empty_lp(2);
  lp.c << 1, 1;
  lp.lo << 0, 0;
  lp.a_ge = Mat(1, 2);
  lp.a_ge << 1, 1;
  lp.b_ge = Vec(1);
  lp.b_ge << 1;
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.dual_ge[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.x.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bound-clamped maximization") {
  // min -x s.t. x <= 3, x >= 0, written with the box only.
  LinearProgram lp = empty_lp(1);
  lp.c << -1;
  lp.lo << 0;
  lp.hi << 3;
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(-3.0));
  CHECK(sol.x[0] == doctest::Approx(3.0));
}

TEST_CASE("equality system with free variables") {
  // min x + 2y s.t. x + y = 4, x - y = 0  ->  x = y = 2.
  LinearProgram lp = empty_lp(2);
  lp.c << 1, 2;
  lp.a_eq = Mat(2, 2);
  lp.a_eq << 1, 1, 1, -1;
  lp.b_eq = Vec(2);
  lp.b_eq << 4, 0;
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(2.0));
  CHECK(sol.x[1] == doctest::Approx(2.0));
  CHECK(sol.objective == doctest::Approx(6.0));
  // Stationarity: c = A'phi exactly for a square nonsingular system.
  Vec r = lp.c - lp.a_eq.transpose() * sol.dual_eq;
  CHECK(r.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("infeasibility is detected") {
  LinearProgram lp = empty_lp(1);
  lp.c << 0;
  lp.lo << 0;
  lp.hi << 1;
  lp.a_ge = Mat(1, 1);
  lp.a_ge << 1;
  lp.b_ge = Vec(1);
  lp.b_ge << 2;  // x >= 2 against x <= 1
  LpSolution sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::kInfeasible);
  CHECK(sol.farkas.size() > 0);
}

TEST_CASE("unboundedness is detected with a ray") {
  LinearProgram lp = empty_lp(2);
  lp.c << -1, 0;
  lp.lo << 0, 0;
  lp.a_ge = Mat(1, 2);
  lp.a_ge << 1, -1;  // x - y >= 0 leaves x free to grow
  lp.b_ge = Vec(1);
  lp.b_ge << 0;
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kUnbounded);
  REQUIRE(sol.ray.size() == 2);
  // The ray must be feasible for the homogeneous system and improving.
  CHECK(lp.a_ge.row(0).dot(sol.ray) >= -1e-9);
  CHECK(lp.c.dot(sol.ray) < -1e-9);
}

TEST_CASE("random LPs match the vertex-scan oracle") {
  Rng rng(20240817);
  int solved = 0;
  for (int trial = 0; trial < 12; ++trial) {
    LinearProgram lp = testing::random_feasible_lp(5, 8, rng);
    auto oracle = testing::lp_value_by_vertex_scan(lp);
    REQUIRE(oracle.has_value());
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(*oracle).epsilon(1e-8));
    ++solved;
  }
  CHECK(solved == 12);
}

TEST_CASE("strong duality and complementary slackness on random LPs") {
  Rng rng(987654321);
  for (int trial = 0; trial < 40; ++trial) {
    LinearProgram lp = testing::random_feasible_lp(rng.uniform_int(1, 6), rng.uniform_int(2, 9), rng);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    double dual = testing::lp_dual_value(lp, sol.dual_eq, sol.dual_ge);
    CHECK(std::abs(dual - sol.objective) < 1e-7 * (1.0 + std::abs(sol.objective)));
    CHECK(sol.dual_ge.minCoeff() >= -1e-9);
    Vec slack = lp.a_ge * sol.x - lp.b_ge;
    for (int i = 0; i < lp.num_ge(); ++i)
      CHECK(std::abs(slack[i] * sol.dual_ge[i]) < 1e-7 * (1.0 + std::abs(sol.objective)));
  }
}

TEST_CASE("degenerate LP still terminates") {
  // Many redundant rows through the same vertex.
  LinearProgram lp = empty_lp(3);
  lp.c << 1, 1, 1;
  lp.lo << 0, 0, 0;
  lp.a_ge = Mat(6, 3);
  lp.b_ge = Vec(6);
  lp.a_ge << 1, 1, 0, 0, 1, 1, 1, 0, 1, 1, 1, 1, 2, 2, 0, 0, 2, 2;
  lp.b_ge << 1, 1, 1, 1.5, 2, 2;
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(1.5).epsilon(1e-8));
}

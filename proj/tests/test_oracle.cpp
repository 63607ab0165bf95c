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

#include "maro/oracle.hpp"

#include <Eigen/LU>

#include "doctest.h"
#include "support/instances.hpp"

using namespace maro;

namespace {

Polytope box_polytope(int dim) {
  Polytope p;
  p.lo = Vec::Zero(dim);
  p.hi = Vec::Ones(dim);
  p.d = Mat::Zero(0, dim);
  p.e = Vec(0);
  return p;
}

}  // namespace

TEST_CASE("boxes have 2^d vertices") {
  for (int d = 1; d <= 6; ++d) {
    VertexList verts = enumerate_vertices(box_polytope(d));
    CHECK(verts.exhaustive);
    CHECK(static_cast<int>(verts.vertices.size()) == (1 << d));
  }
}

TEST_CASE("budget row clips the square to a triangle") {
  Polytope p = box_polytope(2);
  p.d = Mat::Ones(1, 2);
  p.e = Vec::Constant(1, 1.0);  // u1 + u2 <= 1
  VertexList verts = enumerate_vertices(p);
  REQUIRE(verts.exhaustive);
  CHECK(verts.vertices.size() == 3);
  for (const Vec& v : verts.vertices) CHECK(p.contains(v, 1e-9));
}

TEST_CASE("every vertex is supported by a full-rank active set") {
  Polytope p = box_polytope(3);
  p.d = Mat::Zero(2, 3);
  p.d << 1, 1, 0, 0, 1, 1;
  p.e = Vec::Constant(2, 1.2);
  VertexList verts = enumerate_vertices(p);
  REQUIRE(verts.exhaustive);
  Mat a;
  Vec b;
  p.stacked(&a, &b);
  for (const Vec& v : verts.vertices) {
    std::vector<int> active;
    for (int r = 0; r < a.rows(); ++r)
      if (std::abs(a.row(r).dot(v) - b[r]) <= 1e-8) active.push_back(r);
    REQUIRE(static_cast<int>(active.size()) >= 3);
    Mat sub(static_cast<int>(active.size()), 3);
    for (size_t i = 0; i < active.size(); ++i) sub.row(static_cast<int>(i)) = a.row(active[i]);
    CHECK(Eigen::FullPivLU<Mat>(sub).rank() == 3);
  }
}

TEST_CASE("caps mark the enumeration as partial") {
  VertexEnumOptions opts;
  opts.base_cap = 3;
  VertexList verts = enumerate_vertices(box_polytope(4), opts);
  CHECK_FALSE(verts.exhaustive);
  CHECK_THROWS_AS(enumerate_vertices(box_polytope(13)), ValidationError);
}

TEST_CASE("brute-force two-stage agrees with the plain LP when deterministic") {
  Instance inst = testing::simple_t1();
  inst.u_set.lo[0] = 0.75;
  inst.u_set.hi[0] = 0.75;
  TwoStageProblem ts = build_two_stage(inst);
  VertexList verts = enumerate_vertices(inst.u_set);
  REQUIRE(verts.exhaustive);
  REQUIRE(verts.vertices.size() == 1);
  OracleTwoStage exact = brute_force_two_stage(ts, verts);
  REQUIRE(exact.status == LpStatus::kOptimal);
  CHECK(exact.value == doctest::Approx(-0.75).epsilon(1e-7));  // hand value
}

TEST_CASE("finite-difference harness on a known smooth function") {
  // f(x) = max(2 x1 - 1, -x1) + x2 evaluated away from the kink.
  auto f = [](const Vec& x) { return std::max(2.0 * x[0] - 1.0, -x[0]) + x[1]; };
  Rng rng(5);
  Vec x(2);
  x << 2.0, 0.5;  // smooth branch: gradient (2, 1)
  Vec g(2);
  g << 2, 1;
  FiniteDiffReport rep = finite_diff_check(x, g, 8, 1e-5, f, rng);
  CHECK(rep.checked == 8);
  CHECK(rep.passed == 8);

  // At the kink the fallback inequality must hold for a valid subgradient.
  Vec xk(2);
  xk << 1.0 / 3.0, 0.0;
  Vec sub(2);
  sub << 0.5, 1.0;  // inside the subdifferential [-1, 2] x {1}
  FiniteDiffReport kink = finite_diff_check(xk, sub, 8, 1e-5, f, rng, /*kink=*/true);
  CHECK(kink.kink_detected);
  CHECK(kink.subgradient_inequality_ok);
}

TEST_CASE("bound chain holds on random instances") {
  Rng rng(6060);
  BundleConfig cfg;
  cfg.delta_tol = 1e-6;
  cfg.max_iter = 150;
  for (int trial = 0; trial < 3; ++trial) {
    testing::RandomInstanceOptions o;
    o.horizon = 2;
    o.budget_row = trial == 1;
    o.hard_state_rows = trial == 2;
    Instance inst = testing::random_instance(rng, o);
    BoundChainReport rep = check_bound_chain(inst, cfg);
    INFO(rep.detail);
    CHECK(rep.chain_ok);
  }
}

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

#include "maro/qp.hpp"

#include <optional>

#include "doctest.h"
#include "support/test_util.hpp"

using namespace maro;

namespace {

QuadraticProgram master_shell(int n, double t, const Vec& center) {
  QuadraticProgram qp;
  qp.dim_x = n;
  qp.has_eta = true;
  qp.prox_t = t;
  qp.center = center;
  qp.linear = Vec::Zero(n);
  qp.lo = Vec::Constant(n + 1, -kInf);
  qp.hi = Vec::Constant(n + 1, kInf);
  return qp;
}

// Cut row: eta >= value + g'(x - xq), i.e. (-g, 1)'(x, eta) >= value - g'xq.
void add_cut(QuadraticProgram* qp, const Vec& g, double value, const Vec& xq) {
  QuadraticProgram::Row row;
  row.coeffs = Vec(qp->dim_x + 1);
  row.coeffs.head(qp->dim_x) = -g;
  row.coeffs[qp->dim_x] = 1.0;
  row.rhs = value - g.dot(xq);
  row.sense = '>';
  qp->rows.push_back(row);
}

// Dense KKT enumeration over active cut subsets: the independent oracle for
// the proximal master. Returns the optimal x, or nullopt if no subset is
// KKT-consistent (cannot happen for a well-posed pool).
std::optional<Vec> master_by_active_set_scan(const QuadraticProgram& qp) {
  const int n = qp.dim_x;
  const int m = static_cast<int>(qp.rows.size());
  std::optional<Vec> best;
  double best_val = kInf;
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> s;
    for (int l = 0; l < m; ++l)
      if (mask & (1u << l)) s.push_back(l);
    const int k = static_cast<int>(s.size());
    // Unknowns (lambda_S, eta): sum(lambda) = 1 and, per active row l,
    // eta + t * sum_l' (g_l . g_l') lambda_l' = rhs_l + g_l'center.
    Mat a = Mat::Zero(k + 1, k + 1);
    Vec b = Vec::Zero(k + 1);
    for (int i = 0; i < k; ++i) {
      Vec gi = -qp.rows[s[i]].coeffs.head(n);
      for (int j = 0; j < k; ++j) {
        Vec gj = -qp.rows[s[j]].coeffs.head(n);
        a(i, j) = qp.prox_t * gi.dot(gj);
      }
      a(i, k) = 1.0;
      b[i] = qp.rows[s[i]].rhs + gi.dot(qp.center);
    }
    for (int j = 0; j < k; ++j) a(k, j) = 1.0;
    b[k] = 1.0;
    Eigen::FullPivLU<Mat> lu(a);
    if (lu.rank() < k + 1) continue;
    Vec sol = lu.solve(b);
    Vec lambda = sol.head(k);
    double eta = sol[k];
    if (lambda.minCoeff() < -1e-9) continue;
    Vec x = qp.center;
    for (int i = 0; i < k; ++i)
      x -= qp.prox_t * lambda[i] * (-qp.rows[s[i]].coeffs.head(n));
    bool feas = true;
    for (int l = 0; l < m; ++l) {
      double lhs = qp.rows[l].coeffs.head(n).dot(x) + eta;
      if (lhs < qp.rows[l].rhs - 1e-8) feas = false;
    }
    if (!feas) continue;
    double val = eta + (x - qp.center).squaredNorm() / (2.0 * qp.prox_t);
    if (val < best_val) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("symmetric pair of cuts pins the minimizer at the center") {
  QuadraticProgram qp = master_shell(1, 1.0, Vec::Zero(1));
  Vec g(1), xq(1);
  g << 1;
  xq << 0;
  add_cut(&qp, g, 0.0, xq);
  add_cut(&qp, -g, 0.0, xq);
  QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sol.eta == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sol.kkt.max() < 1e-6);
}

TEST_CASE("clamped proximal step against a bound") {
  // min eta + 1/2 (x-2)^2, eta >= 0, x >= 3.
  QuadraticProgram qp = master_shell(1, 1.0, Vec::Constant(1, 2.0));
  QuadraticProgram::Row row;
  row.coeffs = Vec(2);
  row.coeffs << 0, 1;
  row.rhs = 0.0;
  row.sense = '>';
  qp.rows.push_back(row);
  qp.lo[0] = 3.0;
  QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(3.0));
  CHECK(sol.eta == doctest::Approx(0.0));
  CHECK(sol.objective == doctest::Approx(0.5));
}

TEST_CASE("single cut gives the closed-form proximal step") {
  Vec z = Vec::Constant(3, 1.0);
  QuadraticProgram qp = master_shell(3, 0.7, z);
  Vec g(3), xq(3);
  g << 1, -2, 0.5;
  xq = z;
  add_cut(&qp, g, 4.0, xq);
  QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  Vec expect = z - 0.7 * g;
  CHECK((sol.x - expect).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(sol.row_duals[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("random cut pools match the active-set scan oracle") {
  Rng rng(555);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 3;
    int cuts = rng.uniform_int(1, 6);
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.uniform(-2, 2);
    QuadraticProgram qp = master_shell(n, rng.uniform(0.2, 2.0), z);
    for (int l = 0; l < cuts; ++l) {
      Vec g(n), xq(n);
      for (int i = 0; i < n; ++i) {
        g[i] = rng.uniform(-2, 2);
        xq[i] = rng.uniform(-2, 2);
      }
      add_cut(&qp, g, rng.uniform(-3, 3), xq);
    }
    auto oracle = master_by_active_set_scan(qp);
    REQUIRE(oracle.has_value());
    QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::kOptimal);
    CHECK((sol.x - *oracle).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(sol.kkt.max() < 1e-6);
  }
}

TEST_CASE("warm starts do not change the minimizer") {
  Rng rng(77);
  Vec z = Vec::Zero(2);
  QuadraticProgram qp = master_shell(2, 1.0, z);
  for (int l = 0; l < 4; ++l) {
    Vec g(2), xq(2);
    for (int i = 0; i < 2; ++i) {
      g[i] = rng.uniform(-1, 1);
      xq[i] = rng.uniform(-1, 1);
    }
    add_cut(&qp, g, rng.uniform(-1, 1), xq);
  }
  QpSolution a = solve_qp(qp);
  Vec warm(3);
  warm << 5.0, -4.0, 100.0;  // feasible: eta is far above every cut
  QpSolution b = solve_qp(qp, &warm);
  REQUIRE(a.status == QpStatus::kOptimal);
  REQUIRE(b.status == QpStatus::kOptimal);
  CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("infeasible constraint set is reported, not solved") {
  QuadraticProgram qp = master_shell(1, 1.0, Vec::Zero(1));
  Vec g(1), xq(1);
  g << 1;
  xq << 0;
  add_cut(&qp, g, 0.0, xq);
  // Contradictory feasibility-style rows on x alone.
  QuadraticProgram::Row r1;
  r1.coeffs = Vec(2);
  r1.coeffs << 1, 0;
  r1.rhs = 2.0;
  r1.sense = '>';
  QuadraticProgram::Row r2 = r1;
  r2.rhs = 1.0;
  r2.sense = '<';
  qp.rows.push_back(r1);
  qp.rows.push_back(r2);
  QpSolution sol = solve_qp(qp);
  CHECK(sol.status == QpStatus::kInfeasible);
}

TEST_CASE("bootstrap mode: pure projection onto feasibility cuts") {
  // No eta: min 1/2||x - z||^2 s.t. a'x <= b rows.
  QuadraticProgram qp;
  qp.dim_x = 2;
  qp.has_eta = false;
  qp.prox_t = 1.0;
  qp.center = Vec::Constant(2, 2.0);
  qp.linear = Vec::Zero(2);
  qp.lo = Vec::Constant(2, -kInf);
  qp.hi = Vec::Constant(2, kInf);
  QuadraticProgram::Row row;
  row.coeffs = Vec(2);
  row.coeffs << 1, 1;
  row.rhs = 2.0;
  row.sense = '<';
  qp.rows.push_back(row);
  QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  // Projection of (2,2) onto x1+x2 <= 2 is (1,1).
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.x[1] == doctest::Approx(1.0));
  CHECK(sol.row_duals[0] <= 1e-9);  // '<' rows carry nonpositive multipliers
}

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
//
// Brute-force oracles and generators for tests. Everything here is
// deliberately independent of the solver code paths it checks: LP values come
// from exhaustive vertex enumeration, never from a second simplex run.

#ifndef MARO_TESTS_SUPPORT_TEST_UTIL_HPP_
#define MARO_TESTS_SUPPORT_TEST_UTIL_HPP_

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "maro/lp.hpp"
#include "maro/types.hpp"

namespace maro::testing {

// Lagrangian dual value at (dual_eq, dual_ge): b'y plus the bound terms from
// the reduced costs. Equals the primal optimum when the duals are optimal.
inline double lp_dual_value(const LinearProgram& lp, const Vec& dual_eq, const Vec& dual_ge) {
  Vec r = lp.c;
  if (lp.num_eq() > 0) r -= lp.a_eq.transpose() * dual_eq;
  if (lp.num_ge() > 0) r -= lp.a_ge.transpose() * dual_ge;
  double val = 0.0;
  if (lp.num_eq() > 0) val += lp.b_eq.dot(dual_eq);
  if (lp.num_ge() > 0) val += lp.b_ge.dot(dual_ge);
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (std::abs(r[j]) <= 1e-9) continue;
    val += r[j] > 0 ? r[j] * lp.lo[j] : r[j] * lp.hi[j];
  }
  return val;
}

// Exhaustive vertex scan of an LP whose feasible set is a bounded polyhedron.
// Enumerates every choice of n active constraints among {equalities (always
// active), >= rows, bounds}, solves the square system, keeps feasible points.
// Returns nullopt when no feasible vertex exists.
inline std::optional<double> lp_value_by_vertex_scan(const LinearProgram& lp) {
  const int n = lp.num_vars();
  std::vector<Vec> rows;
  std::vector<double> rhs;
  for (int i = 0; i < lp.num_eq(); ++i) {
    rows.push_back(lp.a_eq.row(i));
    rhs.push_back(lp.b_eq[i]);
  }
  const int n_forced = static_cast<int>(rows.size());
  for (int i = 0; i < lp.num_ge(); ++i) {
    rows.push_back(lp.a_ge.row(i));
    rhs.push_back(lp.b_ge[i]);
  }
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lp.lo[j])) {
      Vec e = Vec::Zero(n);
      e[j] = 1.0;
      rows.push_back(e);
      rhs.push_back(lp.lo[j]);
    }
    if (std::isfinite(lp.hi[j])) {
      Vec e = Vec::Zero(n);
      e[j] = 1.0;
      rows.push_back(e);
      rhs.push_back(lp.hi[j]);
    }
  }
  const int total = static_cast<int>(rows.size());
  const int pick = n - n_forced;
  if (pick < 0) return std::nullopt;

  double best = kInf;
  bool found = false;
  std::vector<int> idx(pick);
  auto feasible = [&](const Vec& x) {
    for (int j = 0; j < n; ++j)
      if (x[j] < lp.lo[j] - 1e-7 || x[j] > lp.hi[j] + 1e-7) return false;
    for (int i = 0; i < lp.num_eq(); ++i)
      if (std::abs(lp.a_eq.row(i).dot(x) - lp.b_eq[i]) > 1e-7) return false;
    for (int i = 0; i < lp.num_ge(); ++i)
      if (lp.a_ge.row(i).dot(x) < lp.b_ge[i] - 1e-7) return false;
    return true;
  };
  auto try_subset = [&]() {
    Mat a(n, n);
    Vec b(n);
    for (int i = 0; i < n_forced; ++i) {
      a.row(i) = rows[i];
      b[i] = rhs[i];
    }
    for (int i = 0; i < pick; ++i) {
      a.row(n_forced + i) = rows[idx[i]];
      b[n_forced + i] = rhs[idx[i]];
    }
    Eigen::FullPivLU<Mat> lu(a);
    if (lu.rank() < n) return;
    Vec x = lu.solve(b);
    if (!x.allFinite() || !feasible(x)) return;
    double v = lp.c.dot(x);
    if (v < best) best = v;
    found = true;
  };
  // Lexicographic subset enumeration over the non-forced rows.
  if (pick == 0) {
    try_subset();
  } else {
    for (int i = 0; i < pick; ++i) idx[i] = n_forced + i;
    if (idx.back() < total) {
      while (true) {
        try_subset();
        int p = pick - 1;
        while (p >= 0 && idx[p] == total - (pick - p)) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < pick; ++q) idx[q] = idx[q - 1] + 1;
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

// Random LP with a guaranteed feasible point: bounds [0, span], rows sampled
// through an interior point so the instance is feasible by construction.
inline LinearProgram random_feasible_lp(int m_ge, int n, Rng& rng) {
  LinearProgram lp;
  lp.c = Vec(n);
  lp.lo = Vec::Zero(n);
  lp.hi = Vec(n);
  for (int j = 0; j < n; ++j) {
    lp.c[j] = rng.uniform(-2.0, 2.0);
    lp.hi[j] = rng.uniform(1.0, 5.0);
  }
  Vec x0(n);
  for (int j = 0; j < n; ++j) x0[j] = rng.uniform(0.1, 0.9) * lp.hi[j];
  lp.a_ge = Mat(m_ge, n);
  lp.b_ge = Vec(m_ge);
  for (int i = 0; i < m_ge; ++i) {
    for (int j = 0; j < n; ++j) lp.a_ge(i, j) = rng.uniform(-2.0, 2.0);
    lp.b_ge[i] = lp.a_ge.row(i).dot(x0) - rng.uniform(0.0, 1.0);
  }
  lp.a_eq = Mat(0, n);
  lp.b_eq = Vec(0);
  return lp;
}

}  // namespace maro::testing

#include "maro/milp.hpp"

namespace maro::testing {

// Exhaustive oracle: every binary pattern, one LP each. Values come back in
// the problem's own sense; nullopt when no pattern is feasible.
inline std::optional<double> milp_value_by_enumeration(const MixedIntegerProgram& mip) {
  const int k = static_cast<int>(mip.binaries.size());
  LinearProgram lp = mip.lp;
  std::optional<double> best;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    for (int b = 0; b < k; ++b) {
      double v = (mask >> b) & 1u ? 1.0 : 0.0;
      lp.lo[mip.binaries[b]] = v;
      lp.hi[mip.binaries[b]] = v;
    }
    LinearProgram solve_me = lp;
    if (mip.maximize) solve_me.c = -lp.c;
    LpSolution sol = solve_lp(solve_me);
    if (sol.status != LpStatus::kOptimal) continue;
    double val = mip.maximize ? -sol.objective : sol.objective;
    bool better = !best.has_value() ||
                  (mip.maximize ? val > *best : val < *best);
    if (better) best = val;
  }
  return best;
}

}  // namespace maro::testing

#endif  // MARO_TESTS_SUPPORT_TEST_UTIL_HPP_

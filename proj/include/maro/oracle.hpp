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
// Brute-force ground truth for small instances. Everything here goes through
// exhaustive vertex enumeration and plain LP solves, deliberately avoiding
// the KKT/big-M machinery it is used to check: the worst case of a function
// convex in u over a polytope sits at a vertex.

#ifndef MARO_ORACLE_HPP_
#define MARO_ORACLE_HPP_

#include <functional>
#include <string>
#include <vector>

#include "maro/bundle.hpp"
#include "maro/transform.hpp"

namespace maro {

struct VertexList {
  std::vector<Vec> vertices;
  bool exhaustive = false;
};

struct VertexEnumOptions {
  int dim_cap = 12;          // refuse larger spaces unless overridden
  long base_cap = 4000000;   // active-set combinations to try
  int vertex_cap = 4096;
  double dedup_tol = 1e-9;
  double feas_tol = 1e-9;
};

/// All vertices by enumeration of n-subsets of active rows (polytope rows
/// plus box facets). The exhaustive flag drops when a cap trips; oracle
/// consumers must then skip rather than trust a partial list.
VertexList enumerate_vertices(const Polytope& u, const VertexEnumOptions& opts = {});

struct OracleQ {
  bool feasible = false;  // recourse feasible at every vertex
  double q = 0.0;         // exact worst-case recourse value when feasible
  Vec argmax_u;
  double omega = 0.0;  // exact worst-case slack mass when infeasible
  Vec witness_u;
};

/// Exact Q(xhat) (or the infeasibility witness) by scanning vertices with
/// plain inner LPs.
OracleQ brute_force_q(const TwoStageProblem& ts, const Vec& xhat, const VertexList& verts);

struct OracleTwoStage {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0.0;
  Vec xhat;
};

/// Exact optimum of the transformed two-stage problem: one epigraph LP with
/// an independent recourse copy per vertex. Requires an exhaustive list.
OracleTwoStage brute_force_two_stage(const TwoStageProblem& ts, const VertexList& verts);

struct FiniteDiffReport {
  int checked = 0;
  int passed = 0;
  bool kink_detected = false;
  // Fallback at kinks: F(x + h d) >= F(x) + h <g, d> - tol on every
  // direction, the plain subgradient inequality.
  bool subgradient_inequality_ok = true;
  std::vector<double> errors;
};

/// Central-difference check of a subgradient against any F evaluator
/// (pass an oracle-backed one for full independence).
FiniteDiffReport finite_diff_check(const Vec& xhat, const Vec& grad, int n_dirs,
                                   double h,
                                   const std::function<double(const Vec&)>& f_eval,
                                   Rng& rng, bool kink_detected = false);

struct BoundChainReport {
  double v_scenario = 0.0;  // scenario-tree lower bound
  double v_bundle = 0.0;    // bundle upper bound on the two-stage optimum
  double v_exact = 0.0;     // brute-force two-stage optimum
  double v_affine = 0.0;    // fully affine counterpart
  bool affine_feasible = false;
  bool chain_ok = false;
  std::string detail;
};

/// Runs every bound on one instance and checks the ordering
/// v_scenario <= v_bundle <= v_affine (and v_exact between scenario and
/// bundle when the vertex list is exhaustive).
BoundChainReport check_bound_chain(const Instance& inst, const BundleConfig& cfg);

}  // namespace maro

#endif  // MARO_ORACLE_HPP_

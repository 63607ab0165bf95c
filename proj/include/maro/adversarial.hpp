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

#ifndef MARO_ADVERSARIAL_HPP_
#define MARO_ADVERSARIAL_HPP_

#include <string>
#include <vector>

#include "maro/milp.hpp"
#include "maro/transform.hpp"

namespace maro {

struct BigMOptions {
  double dual_cap = 1e4;    // caps on |phi| and pi in the KKT system
  double fallback = 1e6;    // used when an interval bound comes out infinite
  double validation_factor = 1e-3;  // "too close to M" threshold, relative
  double margin = 1e-3;     // absolute slack added on top of interval bounds
};

/// Per-row big-M data for one subproblem build. Rows whose interval bound is
/// infinite fall back to BigMOptions::fallback and are flagged for post-solve
/// validation.
struct BigMValues {
  std::vector<Vec> slack_m;           // per stage, per inequality row
  std::vector<std::vector<char>> from_fallback;
  double dual_cap = 1e4;
  double slack_budget = 0.0;  // bound on the total slack mass of (FP)
};

/// Interval-arithmetic row bounds over u in its box and xhat in
/// [xhat_lo, xhat_hi] (pass the same vector twice for a fixed query point).
/// Control bounds are derived from single-variable inequality rows.
BigMValues choose_big_m(const TwoStageProblem& ts, const Vec& xhat_lo,
                        const Vec& xhat_hi, const BigMOptions& opts = {});

struct AdversarialOptions {
  BigMOptions bigm;
  MipOptions mip;
  bool use_heuristic = true;
  // Feasibility values below feas_tol * (1 + data scale) count as zero.
  double feas_tol = 1e-7;
  // Certify omega == 0 one stage at a time before touching the full system.
  bool stagewise_screen = true;
};

/// Variable layout of a KKT subproblem, for solution read-back and dumps.
struct KktLayout {
  int num_vars = 0;
  std::vector<int> y_off, phi_off, pi_off, w_off;
  // Feasibility subproblems add slack blocks and their indicator binaries.
  std::vector<int> ap_off, am_off, beta_off, w_ap_off, w_am_off, w_beta_off;
};

/// Worst-case recourse subproblem: maximize the adversary's value over
/// (u, y, duals) subject to the KKT conditions of the inner stage LPs, with
/// complementarity linearized through per-row binaries.
MixedIntegerProgram build_sup(const TwoStageProblem& ts, const Vec& xhat,
                              const BigMValues& bigm, KktLayout* layout = nullptr);

/// Feasibility subproblem: maximize the total slack needed by the recourse,
/// KKT-reformulated the same way (the inner LP has complete recourse by
/// construction, so its KKT system is always consistent).
MixedIntegerProgram build_fp(const TwoStageProblem& ts, const Vec& xhat,
                             const BigMValues& bigm, KktLayout* layout = nullptr);

struct AdversarialResult {
  double q_value = 0.0;  // worst-case recourse value, objective term included
  Vec u_star;
  std::vector<Vec> y;    // per-stage recourse at u_star
  std::vector<Vec> phi;  // per-stage equality duals
  std::vector<Vec> pi;   // per-stage inequality duals (>= 0)
  Vec w;                 // binary pattern of the incumbent
  bool inexact = false;  // node-limited solve; q_value is a valid lower value
  double residual_gap = 0.0;
  std::vector<std::string> warnings;
};

/// Requires omega(xhat) == 0 (run feasibility_value first). Throws
/// SolverError when the stationarity system is infeasible, which certifies a
/// recourse unbounded below.
AdversarialResult solve_worst_case(const TwoStageProblem& ts, const Vec& xhat,
                                   const AdversarialOptions& opts = {});

struct FeasibilityResult {
  double omega = 0.0;
  Vec u_star;            // witness realization when omega > 0
  std::vector<Vec> phi;  // inner slack-LP duals at u_star
  std::vector<Vec> pi;
  std::vector<std::string> warnings;
};

FeasibilityResult feasibility_value(const TwoStageProblem& ts, const Vec& xhat,
                                    const AdversarialOptions& opts = {});

enum class CutKind { kOptimality, kFeasibility };

/// Affine minorant of F (optimality) or of omega (feasibility) at a query
/// point, assembled from inner-LP duals at the worst-case realization.
struct Cut {
  CutKind kind = CutKind::kOptimality;
  Vec query;
  double value = 0.0;
  Vec grad;
  Vec u_star;
  bool inexact = false;

  double eval(const Vec& xhat) const { return value + grad.dot(xhat - query); }
};

Cut optimality_cut(const TwoStageProblem& ts, const Vec& xhat,
                   const AdversarialResult& res);
Cut feasibility_cut(const TwoStageProblem& ts, const Vec& xhat,
                    const FeasibilityResult& res);

}  // namespace maro

#endif  // MARO_ADVERSARIAL_HPP_

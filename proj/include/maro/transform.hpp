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

#ifndef MARO_TRANSFORM_HPP_
#define MARO_TRANSFORM_HPP_

#include <string>
#include <vector>

#include "maro/lp.hpp"
#include "maro/model.hpp"

namespace maro {

/// Causal affine rule for state decisions: s_t(u) = P_t u^t + q_t where u^t
/// stacks the uncertainty of stages 1..t. P_t has exactly that many columns.
struct AffineStatePolicy {
  std::vector<Mat> p;  // p[t-1]: n_s_t x (n_u_1 + ... + n_u_t)
  std::vector<Vec> q;  // q[t-1]: n_s_t
};

/// State trajectory {s_t} induced by a policy at one realization.
std::vector<Vec> evaluate_state_policy(const AffineStatePolicy& pol, const Vec& u);

/// Flat coordinates of the aggregated first stage (x, {q_t}, {P_t}):
/// x first, then per stage q_t followed by P_t in row-major order.
struct FlatIndexMap {
  int n_x = 0;
  int dim = 0;
  std::vector<int> q_offsets;  // per stage
  std::vector<int> p_offsets;  // per stage
  std::vector<int> cum_nu;     // columns of P_t = cum_nu[t-1]
  std::vector<int> n_s;

  int x_index(int i) const { return i; }
  int q_index(int t, int i) const { return q_offsets[t - 1] + i; }
  int p_index(int t, int i, int j) const {
    return p_offsets[t - 1] + i * cum_nu[t - 1] + j;
  }
};

/// The transformed two-stage problem: state rules are baked into the first
/// stage, control decisions stay fully adaptive. Owns a copy of the instance.
struct TwoStageProblem {
  Instance inst;
  FlatIndexMap map;
  Vec first_stage_cost;  // F0 coefficients over the flat vector

  int horizon() const { return inst.horizon; }
  int total_nu() const { return inst.total_nu(); }

  Vec x_part(const Vec& xhat) const { return xhat.head(map.n_x); }
  AffineStatePolicy unpack_policy(const Vec& xhat) const;
  Vec pack(const Vec& x, const AffineStatePolicy& pol) const;

  /// Stage-t recourse rows at a symbolic u:
  ///   W_t y_t + eq_u_coeff u  = eq_const
  ///   G_t y_t + ge_u_coeff u >= ge_const
  /// with the first-stage decisions folded into the constants.
  struct StageRecourse {
    Mat eq_u_coeff;
    Vec eq_const;
    Mat ge_u_coeff;
    Vec ge_const;
  };
  StageRecourse stage_recourse(int t, const Vec& xhat) const;

  /// Linear-in-u part of the worst-case objective: sum_t d_t' P_t u^t as one
  /// coefficient vector over the full u.
  Vec objective_u_coeff(const Vec& xhat) const;

  /// Joint inner LP over y = (y_1, ..., y_T) at fixed (xhat, u).
  LinearProgram inner_lp(const Vec& xhat, const Vec& u) const;
  /// Stage-separated inner LP (same optimal total cost as the joint one).
  LinearProgram stage_inner_lp(int t, const Vec& xhat, const Vec& u) const;
  /// Elastic inner LP: +/- slacks on equalities, nonnegative slacks on
  /// inequalities, objective = total slack mass. Always feasible; its value
  /// is zero exactly when the plain recourse is feasible at (xhat, u).
  /// Variables: all y blocks, then a+ (equalities), a- (equalities), beta.
  LinearProgram slack_inner_lp(const Vec& xhat, const Vec& u) const;
};

/// Builds the two-stage form. The instance must pass structural validation.
TwoStageProblem build_two_stage(const Instance& inst);

/// F0(xhat) = c'x + sum_t d_t' q_t.
double first_stage_value(const TwoStageProblem& ts, const Vec& xhat);

/// Affine-policy counterpart: both states and controls follow causal affine
/// rules, every robust row is dualized against the polytope description, and
/// uncertain equalities are met by coefficient matching.
struct AdrLayout {
  FlatIndexMap state_map;        // (x, q_t, P_t) block, first in the LP
  std::vector<int> y0_offsets;   // per stage
  std::vector<int> yp_offsets;   // per stage, row-major Y_t
  int tau_index = 0;             // worst-case objective epigraph
  int num_vars = 0;
};
LinearProgram build_adr_counterpart(const Instance& inst, AdrLayout* layout);

struct AdrSolution {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0.0;  // worst-case cost of the best fully affine policy
  Vec xhat;            // restriction to (x, {P_t}, {q_t}), flat
};
AdrSolution solve_adr(const Instance& inst);

/// P_t as triplets, q_t as arrays.
std::string policy_to_json(const AffineStatePolicy& pol);

}  // namespace maro

#endif  // MARO_TRANSFORM_HPP_

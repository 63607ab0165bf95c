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

#ifndef MARO_BUNDLE_HPP_
#define MARO_BUNDLE_HPP_

#include <string>
#include <utility>
#include <vector>

#include "maro/adversarial.hpp"
#include "maro/qp.hpp"
#include "maro/transform.hpp"

namespace maro {

struct BundleConfig {
  double delta_tol = 1e-5;  // relative: stop at delta <= delta_tol*(1+|F(z0)|)
  double descent_m = 0.1;   // serious-step fraction, in (0, 1)
  double t0 = 1.0;          // initial proximal parameter
  double t_min = 1e-3;
  double t_shrink = 0.5;    // applied on null steps
  int max_iter = 300;
  double trust_lo = -1e3;   // box on every flat coordinate
  double trust_hi = 1e3;
  int trust_expansions = 2;  // x10 enlarge-and-rerun rounds if the box binds
  bool check_identities = true;
  int bootstrap_budget = 60;
  AdversarialOptions adversarial;

  void check() const;
};

enum class StepKind { kSerious, kNull, kFeasibility };

struct IterationRecord {
  int k = 0;
  StepKind step = StepKind::kNull;
  double f_or_omega = 0.0;  // F at the query, or omega on feasibility steps
  double delta = 0.0;       // expected decrease (not defined on feasibility steps)
  double g_norm = 0.0;      // aggregate gradient norm
  double e_hat = 0.0;       // aggregate linearization error
  double t_k = 0.0;
  double time_ms = 0.0;
  bool identities_apply = false;  // only optimality cuts active at the master optimum
  double model_identity_err = 0.0;
  double decrease_identity_err = 0.0;
};

struct BundleState {
  int k = 0;
  Vec center;        // always inside dom F
  double f_center = 0.0;
  std::vector<Cut> pool;
  double t_k = 1.0;
  std::vector<IterationRecord> log;
  std::vector<Vec> harvested;  // adversarial realizations, in query order

  std::vector<int> optimality_indices() const;
  std::vector<int> feasibility_indices() const;
};

/// Regularized master over the cut pool: eta bounded below by optimality
/// cuts, feasibility cuts as hard rows, first-stage set and trust box as
/// bounds. With an empty optimality pool, falls back to pure projection onto
/// the feasibility cuts around the center.
QuadraticProgram build_master(const TwoStageProblem& ts, const BundleState& state,
                              const BundleConfig& cfg);

struct MasterResult {
  Vec xhat;
  double model_value = 0.0;  // cut-model value at xhat
  double prox_sq = 0.0;      // ||xhat - center||^2
  Vec alpha;                 // simplex-normalized optimality-cut multipliers
  bool only_cuts_active = true;  // no box/first-stage/feasibility row active
};

MasterResult solve_master(const TwoStageProblem& ts, const BundleState& state,
                          const BundleConfig& cfg);

/// delta_k = F(z) - model(xhat_next) - (1/2t)||xhat_next - z||^2.
double expected_decrease(const BundleState& state, const MasterResult& master);

/// e_l = F(z) - [value_l + <g_l, z - query_l>] per optimality cut; throws
/// SolverError when a cut overshoots the center value beyond tolerance.
std::vector<double> linearization_errors(const BundleState& state);

/// (g_hat, e_hat) = (sum alpha_l g_l, sum alpha_l e_l).
std::pair<Vec, double> aggregate_certificate(const BundleState& state, const Vec& alpha);

StepKind step_decision(double f_center, double f_next, double delta, double descent_m);

double update_t(double t_k, StepKind step, const BundleConfig& cfg);

struct EvalOutcome {
  bool feasible = false;
  double f_value = 0.0;  // valid when feasible
  double omega = 0.0;
  Cut cut;
  std::vector<std::string> warnings;
};

/// Feasibility first; on omega = 0 the worst-case solve provides F and an
/// optimality cut, otherwise a feasibility cut comes back.
EvalOutcome evaluate_f(const TwoStageProblem& ts, const Vec& xhat,
                       const AdversarialOptions& opts);

enum class BundleTermination { kConverged, kIterationLimit };

struct BundleSolution {
  BundleTermination reason = BundleTermination::kConverged;
  Vec xhat;                  // final stability center
  double upper_bound = 0.0;  // F at the center
  double f_z0 = 0.0;
  double delta_final = 0.0;
  double effective_delta_tol = 0.0;
  int serious_steps = 0;
  std::vector<IterationRecord> log;
  std::vector<Cut> pool;
  std::vector<Vec> harvested;
  std::vector<std::string> warnings;
};

/// Full outer loop. The initial center comes from the affine counterpart's
/// restriction; when that is unavailable a feasibility-restoration loop
/// projects onto accumulated feasibility cuts. Throws SolverError when no
/// feasible center can be found within the bootstrap budget.
BundleSolution run_bundle(const TwoStageProblem& ts, const BundleConfig& cfg = {});

/// Iteration log as CSV (columns: k, step, F_or_omega, delta, g_norm, e_hat,
/// t_k, time_ms). Pass zero_times to blank the timing column for
/// reproducible output.
std::string iteration_log_csv(const std::vector<IterationRecord>& log, bool zero_times);

}  // namespace maro

#endif  // MARO_BUNDLE_HPP_

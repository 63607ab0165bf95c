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

#include "maro/bundle.hpp"

#include <chrono>
#include <sstream>

namespace maro {

void BundleConfig::check() const {
  if (!(descent_m > 0.0 && descent_m < 1.0))
    throw ValidationError("bundle: descent fraction must lie in (0, 1)");
  if (!(t_min > 0.0 && t0 >= t_min))
    throw ValidationError("bundle: need 0 < t_min <= t0");
  if (!(t_shrink > 0.0 && t_shrink <= 1.0))
    throw ValidationError("bundle: t_shrink must lie in (0, 1]");
  if (delta_tol < 0.0) throw ValidationError("bundle: delta_tol must be >= 0");
  if (trust_lo >= trust_hi) throw ValidationError("bundle: empty trust box");
  if (max_iter < 1) throw ValidationError("bundle: max_iter must be >= 1");
}

std::vector<int> BundleState::optimality_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < pool.size(); ++i)
    if (pool[i].kind == CutKind::kOptimality) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> BundleState::feasibility_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < pool.size(); ++i)
    if (pool[i].kind == CutKind::kFeasibility) out.push_back(static_cast<int>(i));
  return out;
}

namespace {

void apply_first_stage_rows(const Instance& inst, int total_dim, bool has_eta,
                            QuadraticProgram* qp) {
  for (const auto& row : inst.x_bounds.rows) {
    QuadraticProgram::Row r;
    r.coeffs = Vec::Zero(total_dim + (has_eta ? 1 : 0));
    r.coeffs.head(inst.n_x) = row.coeffs;
    r.rhs = row.rhs;
    r.sense = row.sense;
    qp->rows.push_back(std::move(r));
  }
}

void apply_box(const TwoStageProblem& ts, const BundleConfig& cfg, QuadraticProgram* qp) {
  const Instance& inst = ts.inst;
  for (int i = 0; i < qp->dim_x; ++i) {
    qp->lo[i] = cfg.trust_lo;
    qp->hi[i] = cfg.trust_hi;
  }
  for (int i = 0; i < inst.n_x; ++i) {
    qp->lo[i] = std::max(qp->lo[i], inst.x_bounds.lo[i]);
    qp->hi[i] = std::min(qp->hi[i], inst.x_bounds.hi[i]);
  }
}

}  // namespace

QuadraticProgram build_master(const TwoStageProblem& ts, const BundleState& state,
                              const BundleConfig& cfg) {
  const int dim = ts.map.dim;
  const std::vector<int> opt = state.optimality_indices();
  QuadraticProgram qp;
  qp.dim_x = dim;
  qp.has_eta = !opt.empty();
  qp.prox_t = qp.has_eta ? state.t_k : 1.0;
  qp.center = state.center;
  qp.linear = Vec::Zero(dim);
  const int n = qp.num_vars();
  qp.lo = Vec::Constant(n, -kInf);
  qp.hi = Vec::Constant(n, kInf);
  apply_box(ts, cfg, &qp);

  for (const Cut& cut : state.pool) {
    QuadraticProgram::Row row;
    row.coeffs = Vec::Zero(n);
    row.coeffs.head(dim) = -cut.grad;
    row.rhs = cut.value - cut.grad.dot(cut.query);
    row.sense = '>';
    if (cut.kind == CutKind::kOptimality) {
      row.coeffs[dim] = 1.0;  // eta >= cut
    } else {
      row.coeffs = -row.coeffs;  // 0 >= cut, i.e. g'x <= g'query - value
      row.rhs = -row.rhs;
      row.sense = '<';
    }
    qp.rows.push_back(std::move(row));
  }
  apply_first_stage_rows(ts.inst, dim, qp.has_eta, &qp);
  return qp;
}

MasterResult solve_master(const TwoStageProblem& ts, const BundleState& state,
                          const BundleConfig& cfg) {
  const std::vector<int> opt = state.optimality_indices();
  if (opt.empty()) throw SolverError("master needs at least one optimality cut");
  QuadraticProgram qp = build_master(ts, state, cfg);

  Vec warm(qp.num_vars());
  warm.head(qp.dim_x) = state.center;
  double eta0 = -kInf;
  for (int l : opt) eta0 = std::max(eta0, state.pool[l].eval(state.center));
  warm[qp.dim_x] = eta0 + 1.0;
  QpSolution sol = solve_qp(qp, &warm);
  if (sol.status != QpStatus::kOptimal)
    throw SolverError("master subproblem infeasible: corrupted cut pool");

  MasterResult out;
  out.xhat = sol.x;
  out.model_value = sol.eta;
  out.prox_sq = (sol.x - state.center).squaredNorm();

  out.alpha = Vec::Zero(static_cast<int>(opt.size()));
  for (size_t i = 0; i < opt.size(); ++i)
    out.alpha[static_cast<int>(i)] = std::max(0.0, sol.row_duals[opt[i]]);
  double mass = out.alpha.sum();
  if (mass > 1e-12) out.alpha /= mass;

  // Identity bookkeeping needs to know whether anything beyond the
  // optimality cuts is active at the new point.
  const double tol = 1e-7 * (1.0 + sol.x.cwiseAbs().maxCoeff());
  bool clean = true;
  for (size_t i = 0; i < state.pool.size(); ++i) {
    if (state.pool[i].kind != CutKind::kFeasibility) continue;
    if (std::abs(state.pool[i].eval(sol.x)) <= tol) clean = false;
  }
  for (int i = 0; i < qp.dim_x && clean; ++i) {
    if (std::isfinite(qp.lo[i]) && sol.x[i] - qp.lo[i] <= tol) clean = false;
    if (std::isfinite(qp.hi[i]) && qp.hi[i] - sol.x[i] <= tol) clean = false;
  }
  for (size_t r = state.pool.size(); r < qp.rows.size() && clean; ++r) {
    const auto& row = qp.rows[r];  // first-stage rows
    double act = row.coeffs.head(qp.dim_x).dot(sol.x) - row.rhs;
    if (row.sense == '=' || std::abs(act) <= tol) clean = false;
  }
  out.only_cuts_active = clean;
  return out;
}

double expected_decrease(const BundleState& state, const MasterResult& master) {
  return state.f_center - master.model_value - master.prox_sq / (2.0 * state.t_k);
}

std::vector<double> linearization_errors(const BundleState& state) {
  std::vector<double> out;
  for (const Cut& cut : state.pool) {
    if (cut.kind != CutKind::kOptimality) continue;
    double e = state.f_center - cut.eval(state.center);
    if (e < -1e-6 * (1.0 + std::abs(state.f_center)))
      throw SolverError("corrupted cut: negative linearization error " + std::to_string(e));
    out.push_back(e);
  }
  return out;
}

std::pair<Vec, double> aggregate_certificate(const BundleState& state, const Vec& alpha) {
  const std::vector<int> opt = state.optimality_indices();
  std::vector<double> errors = linearization_errors(state);
  Vec g = Vec::Zero(state.center.size());
  double e_hat = 0.0;
  for (size_t i = 0; i < opt.size(); ++i) {
    g += alpha[static_cast<int>(i)] * state.pool[opt[i]].grad;
    e_hat += alpha[static_cast<int>(i)] * errors[i];
  }
  return {g, e_hat};
}

StepKind step_decision(double f_center, double f_next, double delta, double descent_m) {
  return f_center - f_next >= descent_m * delta ? StepKind::kSerious : StepKind::kNull;
}

double update_t(double t_k, StepKind step, const BundleConfig& cfg) {
  if (step == StepKind::kNull) return std::max(cfg.t_min, cfg.t_shrink * t_k);
  return t_k;  // serious and feasibility steps keep the proximal weight
}

EvalOutcome evaluate_f(const TwoStageProblem& ts, const Vec& xhat,
                       const AdversarialOptions& opts) {
  EvalOutcome out;
  FeasibilityResult fr = feasibility_value(ts, xhat, opts);
  out.warnings = fr.warnings;
  if (fr.omega > 0.0) {
    out.feasible = false;
    out.omega = fr.omega;
    out.cut = feasibility_cut(ts, xhat, fr);
    return out;
  }
  AdversarialResult ar = solve_worst_case(ts, xhat, opts);
  out.warnings.insert(out.warnings.end(), ar.warnings.begin(), ar.warnings.end());
  out.feasible = true;
  out.f_value = first_stage_value(ts, xhat) + ar.q_value;
  out.cut = optimality_cut(ts, xhat, ar);
  return out;
}

namespace {

struct RunOutcome {
  BundleSolution sol;
  bool box_active = false;
};

RunOutcome run_once(const TwoStageProblem& ts, BundleConfig cfg) {
  using clock = std::chrono::steady_clock;
  BundleState state;
  state.t_k = cfg.t0;
  BundleSolution sol;

  // Initial center: restriction of the affine counterpart when it solves,
  // otherwise projection onto accumulating feasibility cuts.
  AdrSolution adr = solve_adr(ts.inst);
  Vec guess;
  bool have_center = false;
  if (adr.status == LpStatus::kOptimal) {
    guess = adr.xhat;
    EvalOutcome eval = evaluate_f(ts, guess, cfg.adversarial);
    for (auto& w : eval.warnings) sol.warnings.push_back(w);
    if (eval.feasible) {
      state.center = guess;
      state.f_center = eval.f_value;
      state.pool.push_back(eval.cut);
      state.harvested.push_back(eval.cut.u_star);
      have_center = true;
    } else {
      state.pool.push_back(eval.cut);  // seed the restoration below
      state.harvested.push_back(eval.cut.u_star);
      sol.warnings.push_back("affine restriction failed the feasibility check");
    }
  } else {
    guess = Vec::Zero(ts.map.dim);
    sol.warnings.push_back("affine counterpart infeasible; bootstrapping a center");
  }

  if (!have_center) {
    // Feasibility restoration: project the initial guess onto the cut outer
    // approximation of dom F until the oracle confirms membership.
    Vec anchor = guess;
    for (int round = 0; round < cfg.bootstrap_budget; ++round) {
      QuadraticProgram qp;
      qp.dim_x = ts.map.dim;
      qp.has_eta = false;
      qp.prox_t = 1.0;
      qp.center = anchor;
      qp.linear = Vec::Zero(qp.dim_x);
      qp.lo = Vec::Constant(qp.dim_x, -kInf);
      qp.hi = Vec::Constant(qp.dim_x, kInf);
      apply_box(ts, cfg, &qp);
      for (const Cut& cut : state.pool) {
        if (cut.kind != CutKind::kFeasibility) continue;
        QuadraticProgram::Row row;
        row.coeffs = cut.grad;
        row.rhs = cut.grad.dot(cut.query) - cut.value;
        row.sense = '<';
        qp.rows.push_back(std::move(row));
      }
      apply_first_stage_rows(ts.inst, qp.dim_x, false, &qp);
      QpSolution proj = solve_qp(qp);
      if (proj.status != QpStatus::kOptimal)
        throw SolverError(
            "no feasible aggregated first stage: the policy class admits no robust solution");
      EvalOutcome eval = evaluate_f(ts, proj.x, cfg.adversarial);
      state.harvested.push_back(eval.cut.u_star);
      state.pool.push_back(eval.cut);
      if (eval.feasible) {
        state.center = proj.x;
        state.f_center = eval.f_value;
        have_center = true;
        break;
      }
    }
    if (!have_center)
      throw SolverError(
          "no feasible aggregated first stage within the bootstrap budget; "
          "the policy class may admit no robust solution");
  }

  // The box must contain the initial center or the master would move off it
  // for no model-driven reason.
  if (state.center.size() > 0) {
    double cmin = state.center.minCoeff(), cmax = state.center.maxCoeff();
    if (cmin < cfg.trust_lo || cmax > cfg.trust_hi) {
      cfg.trust_lo = std::min(cfg.trust_lo, cmin - 1.0);
      cfg.trust_hi = std::max(cfg.trust_hi, cmax + 1.0);
      sol.warnings.push_back("trust box widened to contain the initial center");
    }
  }

  sol.f_z0 = state.f_center;
  sol.effective_delta_tol = cfg.delta_tol * (1.0 + std::abs(state.f_center));
  double delta = kInf;

  while (state.k < cfg.max_iter) {
    auto tick = clock::now();
    MasterResult master = solve_master(ts, state, cfg);
    delta = expected_decrease(state, master);

    IterationRecord rec;
    rec.k = ++state.k;
    rec.t_k = state.t_k;
    auto [g_hat, e_hat] = aggregate_certificate(state, master.alpha);
    rec.g_norm = g_hat.norm();
    rec.e_hat = e_hat;
    rec.delta = delta;
    rec.identities_apply = master.only_cuts_active;
    if (master.only_cuts_active) {
      double model_pred = state.f_center - state.t_k * g_hat.squaredNorm() - e_hat;
      rec.model_identity_err = std::abs(master.model_value - model_pred);
      double dec_pred = 0.5 * state.t_k * g_hat.squaredNorm() + e_hat;
      rec.decrease_identity_err = std::abs(delta - dec_pred);
    }

    if (delta <= sol.effective_delta_tol) {
      state.log.push_back(rec);
      break;
    }

    EvalOutcome eval = evaluate_f(ts, master.xhat, cfg.adversarial);
    for (auto& w : eval.warnings) sol.warnings.push_back(w);
    state.harvested.push_back(eval.cut.u_star);
    state.pool.push_back(eval.cut);
    if (!eval.feasible) {
      rec.step = StepKind::kFeasibility;
      rec.f_or_omega = eval.omega;
    } else {
      StepKind step = step_decision(state.f_center, eval.f_value, delta, cfg.descent_m);
      rec.step = step;
      rec.f_or_omega = eval.f_value;
      if (step == StepKind::kSerious) {
        state.center = master.xhat;
        state.f_center = eval.f_value;
        ++sol.serious_steps;
      }
      state.t_k = update_t(state.t_k, step, cfg);
    }
    rec.time_ms =
        std::chrono::duration<double, std::milli>(clock::now() - tick).count();
    state.log.push_back(rec);
  }

  sol.reason = delta <= sol.effective_delta_tol ? BundleTermination::kConverged
                                                : BundleTermination::kIterationLimit;
  sol.xhat = state.center;
  sol.upper_bound = state.f_center;
  sol.delta_final = delta;
  sol.log = state.log;
  sol.pool = state.pool;
  sol.harvested = state.harvested;

  RunOutcome out;
  const double btol = 1e-6 * std::max(1.0, std::max(std::abs(cfg.trust_lo), std::abs(cfg.trust_hi)));
  for (int i = 0; i < state.center.size(); ++i) {
    bool x_coord = i < ts.inst.n_x;
    double lo = cfg.trust_lo, hi = cfg.trust_hi;
    if (x_coord) {
      lo = std::max(lo, ts.inst.x_bounds.lo[i]);
      hi = std::min(hi, ts.inst.x_bounds.hi[i]);
    }
    bool at_lo = state.center[i] - lo <= btol && lo == cfg.trust_lo;
    bool at_hi = hi - state.center[i] <= btol && hi == cfg.trust_hi;
    if (at_lo || at_hi) out.box_active = true;
  }
  out.sol = std::move(sol);
  return out;
}

}  // namespace

BundleSolution run_bundle(const TwoStageProblem& ts, const BundleConfig& cfg) {
  cfg.check();
  BundleConfig effective = cfg;
  for (int round = 0;; ++round) {
    RunOutcome out = run_once(ts, effective);
    if (!out.box_active || round >= cfg.trust_expansions) {
      if (out.box_active)
        out.sol.warnings.push_back(
            "trust box active at the returned center; model identities may not apply");
      return out.sol;
    }
    effective.trust_lo *= 10.0;
    effective.trust_hi *= 10.0;
    out.sol.warnings.push_back("trust box active; enlarged tenfold and re-running");
  }
}

std::string iteration_log_csv(const std::vector<IterationRecord>& log, bool zero_times) {
  std::ostringstream os;
  os << "k,step,F_or_omega,delta,g_norm,e_hat,t_k,time_ms\n";
  for (const auto& r : log) {
    const char* step = r.step == StepKind::kSerious
                           ? "serious"
                           : (r.step == StepKind::kNull ? "null" : "feasibility");
    os << r.k << "," << step << "," << format_double(r.f_or_omega) << ","
       << format_double(r.delta) << "," << format_double(r.g_norm) << ","
       << format_double(r.e_hat) << "," << format_double(r.t_k) << ","
       << format_double(zero_times ? 0.0 : r.time_ms) << "\n";
  }
  return os.str();
}

}  // namespace maro

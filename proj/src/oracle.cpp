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
#include <sstream>

#include "maro/lowerbound.hpp"

namespace maro {

VertexList enumerate_vertices(const Polytope& u, const VertexEnumOptions& opts) {
  const int n = u.dim();
  if (n > opts.dim_cap)
    throw ValidationError("vertex enumeration dimension cap exceeded; override dim_cap");
  VertexList out;
  out.exhaustive = true;
  if (n == 0) return out;

  Mat a;
  Vec b;
  u.stacked(&a, &b);
  const int m = static_cast<int>(a.rows());

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  long bases = 0;
  auto push_vertex = [&](const Vec& v) {
    for (const Vec& seen : out.vertices)
      if ((seen - v).lpNorm<Eigen::Infinity>() <= opts.dedup_tol) return;
    out.vertices.push_back(v);
  };
  while (true) {
    if (++bases > opts.base_cap ||
        static_cast<int>(out.vertices.size()) > opts.vertex_cap) {
      out.exhaustive = false;
      break;
    }
    Mat sys(n, n);
    Vec rhs(n);
    for (int i = 0; i < n; ++i) {
      sys.row(i) = a.row(idx[i]);
      rhs[i] = b[idx[i]];
    }
    Eigen::FullPivLU<Mat> lu(sys);
    if (lu.rank() == n) {
      Vec v = lu.solve(rhs);
      if (v.allFinite() && u.contains(v, opts.feas_tol)) push_vertex(v);
    }
    // Next lexicographic n-subset of the m rows.
    int p = n - 1;
    while (p >= 0 && idx[p] == m - (n - p)) --p;
    if (p < 0) break;
    ++idx[p];
    for (int q = p + 1; q < n; ++q) idx[q] = idx[q - 1] + 1;
  }
  return out;
}

OracleQ brute_force_q(const TwoStageProblem& ts, const Vec& xhat, const VertexList& verts) {
  OracleQ out;
  out.feasible = true;
  Vec obj_u = ts.objective_u_coeff(xhat);
  double best = -kInf;
  for (const Vec& v : verts.vertices) {
    LpSolution sol = solve_lp(ts.inner_lp(xhat, v));
    if (sol.status == LpStatus::kUnbounded)
      throw SolverError("inner recourse unbounded below at a vertex");
    if (sol.status == LpStatus::kInfeasible) {
      out.feasible = false;
      break;
    }
    double val = obj_u.dot(v) + sol.objective;
    if (val > best) {
      best = val;
      out.argmax_u = v;
    }
  }
  if (out.feasible) {
    out.q = best;
    out.omega = 0.0;
    return out;
  }
  // Infeasible somewhere: the elastic value's worst vertex is the witness.
  out.omega = 0.0;
  for (const Vec& v : verts.vertices) {
    LpSolution sol = solve_lp(ts.slack_inner_lp(xhat, v));
    if (sol.status != LpStatus::kOptimal)
      throw SolverError("elastic recourse failed at a vertex");
    if (sol.objective > out.omega) {
      out.omega = sol.objective;
      out.witness_u = v;
    }
  }
  return out;
}

OracleTwoStage brute_force_two_stage(const TwoStageProblem& ts, const VertexList& verts) {
  if (!verts.exhaustive)
    throw ValidationError("two-stage brute force requires an exhaustive vertex list");
  const Instance& inst = ts.inst;
  const int dim = ts.map.dim;
  const int nv = static_cast<int>(verts.vertices.size());
  int ny = 0, me = 0, mi = 0;
  for (const auto& st : inst.stages) {
    ny += st.n_y;
    me += st.num_eq();
    mi += st.num_ge();
  }
  const int theta = dim;
  const int n = dim + 1 + nv * ny;  // xhat, theta, recourse copy per vertex

  LinearProgram lp;
  lp.c = Vec::Zero(n);
  lp.c.head(dim) = ts.first_stage_cost;
  lp.c[theta] = 1.0;
  lp.lo = Vec::Constant(n, -kInf);
  lp.hi = Vec::Constant(n, kInf);
  for (int i = 0; i < inst.n_x; ++i) {
    lp.lo[i] = inst.x_bounds.lo[i];
    lp.hi[i] = inst.x_bounds.hi[i];
  }

  int eq_rows = nv * me, ge_rows = nv * mi + nv;
  for (const auto& row : inst.x_bounds.rows) (row.sense == '=' ? eq_rows : ge_rows) += 1;
  lp.a_eq = Mat::Zero(eq_rows, n);
  lp.b_eq = Vec::Zero(eq_rows);
  lp.a_ge = Mat::Zero(ge_rows, n);
  lp.b_ge = Vec::Zero(ge_rows);

  int er = 0, gr = 0;
  for (const auto& row : inst.x_bounds.rows) {
    if (row.sense == '=') {
      lp.a_eq.row(er).head(inst.n_x) = row.coeffs;
      lp.b_eq[er++] = row.rhs;
    } else {
      double sgn = row.sense == '>' ? 1.0 : -1.0;
      lp.a_ge.row(gr).head(inst.n_x) = sgn * row.coeffs;
      lp.b_ge[gr++] = sgn * row.rhs;
    }
  }

  for (int vtx = 0; vtx < nv; ++vtx) {
    const Vec& v = verts.vertices[vtx];
    const int ybase = dim + 1 + vtx * ny;
    // theta >= sum_t [ d_t' P_t v^t + f_t' y_t ]  (q_t sits in F0 already).
    int theta_row = gr++;
    lp.a_ge(theta_row, theta) = 1.0;
    int yo = 0;
    for (int t = 1; t <= inst.horizon; ++t) {
      const StageData& st = inst.stages[t - 1];
      for (int i = 0; i < st.n_s; ++i)
        for (int j = 0; j < ts.map.cum_nu[t - 1]; ++j)
          lp.a_ge(theta_row, ts.map.p_index(t, i, j)) -= st.d[i] * v[j];
      for (int k = 0; k < st.n_y; ++k) lp.a_ge(theta_row, ybase + yo + k) -= st.f[k];

      const int prev_ns = t >= 2 ? inst.stages[t - 2].n_s : static_cast<int>(inst.s0.size());
      for (int r = 0; r < st.num_eq(); ++r) {
        // T x + A s_t(v) + B s_{t-1}(v) + W y = h0 + H v_t.
        for (int k = 0; k < inst.n_x; ++k) lp.a_eq(er, k) = st.t_mat(r, k);
        for (int i = 0; i < st.n_s; ++i) {
          lp.a_eq(er, ts.map.q_index(t, i)) += st.a_mat(r, i);
          for (int j = 0; j < ts.map.cum_nu[t - 1]; ++j)
            lp.a_eq(er, ts.map.p_index(t, i, j)) += st.a_mat(r, i) * v[j];
        }
        double rhs = st.h0[r] + st.h_mat.row(r).dot(v.segment(inst.u_offset(t), st.n_u));
        if (t >= 2) {
          for (int i = 0; i < prev_ns; ++i) {
            lp.a_eq(er, ts.map.q_index(t - 1, i)) += st.b_mat(r, i);
            for (int j = 0; j < ts.map.cum_nu[t - 2]; ++j)
              lp.a_eq(er, ts.map.p_index(t - 1, i, j)) += st.b_mat(r, i) * v[j];
          }
        } else {
          rhs -= st.b_mat.row(r).dot(inst.s0);
        }
        for (int k = 0; k < st.n_y; ++k) lp.a_eq(er, ybase + yo + k) = st.w_mat(r, k);
        lp.b_eq[er++] = rhs;
      }
      for (int r = 0; r < st.num_ge(); ++r) {
        for (int k = 0; k < inst.n_x; ++k) lp.a_ge(gr, k) = st.l_mat(r, k);
        for (int i = 0; i < st.n_s; ++i) {
          lp.a_ge(gr, ts.map.q_index(t, i)) += st.e_mat(r, i);
          for (int j = 0; j < ts.map.cum_nu[t - 1]; ++j)
            lp.a_ge(gr, ts.map.p_index(t, i, j)) += st.e_mat(r, i) * v[j];
        }
        for (int k = 0; k < st.n_y; ++k) lp.a_ge(gr, ybase + yo + k) = st.g_mat(r, k);
        lp.b_ge[gr++] = st.m0[r] + st.m_mat.row(r).dot(v.segment(inst.u_offset(t), st.n_u));
      }
      yo += st.n_y;
    }
  }

  LpSolution sol = solve_lp(lp);
  OracleTwoStage out;
  out.status = sol.status;
  if (sol.status == LpStatus::kOptimal) {
    out.value = sol.objective;
    out.xhat = sol.x.head(dim);
  }
  return out;
}

FiniteDiffReport finite_diff_check(const Vec& xhat, const Vec& grad, int n_dirs, double h,
                                   const std::function<double(const Vec&)>& f_eval,
                                   Rng& rng, bool kink_detected) {
  FiniteDiffReport rep;
  rep.kink_detected = kink_detected;
  const int n = static_cast<int>(xhat.size());
  const double f0 = kink_detected ? f_eval(xhat) : 0.0;
  for (int d = 0; d < n_dirs; ++d) {
    Vec dir = rng.unit_vector(n);
    double fp = f_eval(xhat + h * dir);
    if (kink_detected) {
      // Subgradient inequality fallback: F(x + h d) >= F(x) + h <g, d>.
      if (fp < f0 + h * grad.dot(dir) - 1e-8) rep.subgradient_inequality_ok = false;
      ++rep.checked;
      continue;
    }
    double fm = f_eval(xhat - h * dir);
    double slope = (fp - fm) / (2.0 * h);
    double expect = grad.dot(dir);
    double err = std::abs(slope - expect);
    rep.errors.push_back(err);
    ++rep.checked;
    if (err <= 1e-4 * (1.0 + std::abs(expect))) ++rep.passed;
  }
  return rep;
}

BoundChainReport check_bound_chain(const Instance& inst, const BundleConfig& cfg) {
  BoundChainReport rep;
  TwoStageProblem ts = build_two_stage(inst);

  AdrSolution adr = solve_adr(inst);
  rep.affine_feasible = adr.status == LpStatus::kOptimal;
  if (rep.affine_feasible) rep.v_affine = adr.value;

  BundleSolution bundle = run_bundle(ts, cfg);
  rep.v_bundle = bundle.upper_bound;

  ScenarioSet scen = harvest_scenarios(bundle.harvested);
  ScenarioTree tree = build_scenario_tree(inst, scen);
  rep.v_scenario = solve_scenario_bound(inst, scen, tree);

  VertexEnumOptions vo;
  bool have_exact = false;
  if (inst.total_nu() <= vo.dim_cap) {
    VertexList verts = enumerate_vertices(inst.u_set, vo);
    if (verts.exhaustive) {
      OracleTwoStage exact = brute_force_two_stage(ts, verts);
      if (exact.status == LpStatus::kOptimal) {
        rep.v_exact = exact.value;
        have_exact = true;
      }
    }
  }

  const double tol = 1e-6 * (1.0 + std::abs(rep.v_bundle));
  std::ostringstream os;
  rep.chain_ok = rep.v_scenario <= rep.v_bundle + tol;
  if (rep.affine_feasible) rep.chain_ok = rep.chain_ok && rep.v_bundle <= rep.v_affine + tol;
  if (have_exact)
    rep.chain_ok = rep.chain_ok && rep.v_scenario <= rep.v_exact + tol &&
                   rep.v_exact <= rep.v_bundle + tol;
  os << "scenario " << rep.v_scenario << " <= bundle " << rep.v_bundle;
  if (have_exact) os << " (exact " << rep.v_exact << ")";
  if (rep.affine_feasible) os << " <= affine " << rep.v_affine;
  rep.detail = os.str();
  return rep;
}

}  // namespace maro

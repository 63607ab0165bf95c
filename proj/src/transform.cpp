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

#include "maro/transform.hpp"

#include <numeric>

#include "nlohmann/json.hpp"

namespace maro {

std::vector<Vec> evaluate_state_policy(const AffineStatePolicy& pol, const Vec& u) {
  std::vector<Vec> states;
  states.reserve(pol.p.size());
  for (size_t t = 0; t < pol.p.size(); ++t) {
    const Mat& p = pol.p[t];
    if (p.cols() > u.size())
      throw ValidationError("state policy expects a longer realization vector");
    states.push_back(p * u.head(p.cols()) + pol.q[t]);
  }
  return states;
}

AffineStatePolicy TwoStageProblem::unpack_policy(const Vec& xhat) const {
  AffineStatePolicy pol;
  for (int t = 1; t <= horizon(); ++t) {
    const int ns = map.n_s[t - 1];
    const int cols = map.cum_nu[t - 1];
    Vec q(ns);
    Mat p(ns, cols);
    for (int i = 0; i < ns; ++i) {
      q[i] = xhat[map.q_index(t, i)];
      for (int j = 0; j < cols; ++j) p(i, j) = xhat[map.p_index(t, i, j)];
    }
    pol.q.push_back(std::move(q));
    pol.p.push_back(std::move(p));
  }
  return pol;
}

Vec TwoStageProblem::pack(const Vec& x, const AffineStatePolicy& pol) const {
  Vec xhat = Vec::Zero(map.dim);
  xhat.head(map.n_x) = x;
  for (int t = 1; t <= horizon(); ++t) {
    const Mat& p = pol.p[t - 1];
    const Vec& q = pol.q[t - 1];
    if (p.rows() != map.n_s[t - 1] || p.cols() != map.cum_nu[t - 1])
      throw ValidationError("policy block does not honor the causal shape");
    for (int i = 0; i < p.rows(); ++i) {
      xhat[map.q_index(t, i)] = q[i];
      for (int j = 0; j < p.cols(); ++j) xhat[map.p_index(t, i, j)] = p(i, j);
    }
  }
  return xhat;
}

TwoStageProblem::StageRecourse TwoStageProblem::stage_recourse(int t, const Vec& xhat) const {
  const StageData& st = inst.stages[t - 1];
  const int nu = total_nu();
  AffineStatePolicy pol = unpack_policy(xhat);
  Vec x = x_part(xhat);

  StageRecourse rec;
  rec.eq_u_coeff = Mat::Zero(st.num_eq(), nu);
  rec.ge_u_coeff = Mat::Zero(st.num_ge(), nu);

  const Mat& p_t = pol.p[t - 1];
  rec.eq_u_coeff.leftCols(p_t.cols()) += st.a_mat * p_t;
  rec.ge_u_coeff.leftCols(p_t.cols()) += st.e_mat * p_t;
  if (t >= 2) {
    const Mat& p_prev = pol.p[t - 2];
    rec.eq_u_coeff.leftCols(p_prev.cols()) += st.b_mat * p_prev;
  }
  const int off = inst.u_offset(t);
  rec.eq_u_coeff.middleCols(off, st.n_u) -= st.h_mat;
  rec.ge_u_coeff.middleCols(off, st.n_u) -= st.m_mat;

  rec.eq_const = st.h0 - st.a_mat * pol.q[t - 1];
  rec.ge_const = st.m0 - st.e_mat * pol.q[t - 1];
  if (map.n_x > 0) {
    rec.eq_const -= st.t_mat * x;
    rec.ge_const -= st.l_mat * x;
  }
  rec.eq_const -= st.b_mat * (t >= 2 ? pol.q[t - 2] : Vec(inst.s0));
  return rec;
}

Vec TwoStageProblem::objective_u_coeff(const Vec& xhat) const {
  AffineStatePolicy pol = unpack_policy(xhat);
  Vec coeff = Vec::Zero(total_nu());
  for (int t = 1; t <= horizon(); ++t) {
    const Mat& p = pol.p[t - 1];
    coeff.head(p.cols()) += p.transpose() * inst.stages[t - 1].d;
  }
  return coeff;
}

LinearProgram TwoStageProblem::inner_lp(const Vec& xhat, const Vec& u) const {
  int ny = 0, me = 0, mi = 0;
  for (const auto& st : inst.stages) {
    ny += st.n_y;
    me += st.num_eq();
    mi += st.num_ge();
  }
  LinearProgram lp;
  lp.c = Vec::Zero(ny);
  lp.lo = Vec::Constant(ny, -kInf);
  lp.hi = Vec::Constant(ny, kInf);
  lp.a_eq = Mat::Zero(me, ny);
  lp.b_eq = Vec::Zero(me);
  lp.a_ge = Mat::Zero(mi, ny);
  lp.b_ge = Vec::Zero(mi);
  int yo = 0, eo = 0, io = 0;
  for (int t = 1; t <= horizon(); ++t) {
    const StageData& st = inst.stages[t - 1];
    StageRecourse rec = stage_recourse(t, xhat);
    lp.c.segment(yo, st.n_y) = st.f;
    lp.a_eq.block(eo, yo, st.num_eq(), st.n_y) = st.w_mat;
    lp.b_eq.segment(eo, st.num_eq()) = rec.eq_const - rec.eq_u_coeff * u;
    lp.a_ge.block(io, yo, st.num_ge(), st.n_y) = st.g_mat;
    lp.b_ge.segment(io, st.num_ge()) = rec.ge_const - rec.ge_u_coeff * u;
    yo += st.n_y;
    eo += st.num_eq();
    io += st.num_ge();
  }
  return lp;
}

LinearProgram TwoStageProblem::slack_inner_lp(const Vec& xhat, const Vec& u) const {
  int ny = 0, me = 0, mi = 0;
  for (const auto& st : inst.stages) {
    ny += st.n_y;
    me += st.num_eq();
    mi += st.num_ge();
  }
  const int n = ny + 2 * me + mi;  // y, a+, a-, beta
  LinearProgram lp;
  lp.c = Vec::Zero(n);
  lp.c.segment(ny, 2 * me + mi).setOnes();
  lp.lo = Vec::Constant(n, -kInf);
  lp.hi = Vec::Constant(n, kInf);
  lp.lo.segment(ny, 2 * me + mi).setZero();
  lp.a_eq = Mat::Zero(me, n);
  lp.b_eq = Vec::Zero(me);
  lp.a_ge = Mat::Zero(mi, n);
  lp.b_ge = Vec::Zero(mi);
  int yo = 0, eo = 0, io = 0;
  for (int t = 1; t <= horizon(); ++t) {
    const StageData& st = inst.stages[t - 1];
    StageRecourse rec = stage_recourse(t, xhat);
    lp.a_eq.block(eo, yo, st.num_eq(), st.n_y) = st.w_mat;
    for (int i = 0; i < st.num_eq(); ++i) {
      lp.a_eq(eo + i, ny + eo + i) = 1.0;        // a+
      lp.a_eq(eo + i, ny + me + eo + i) = -1.0;  // a-
    }
    lp.b_eq.segment(eo, st.num_eq()) = rec.eq_const - rec.eq_u_coeff * u;
    lp.a_ge.block(io, yo, st.num_ge(), st.n_y) = st.g_mat;
    for (int i = 0; i < st.num_ge(); ++i) lp.a_ge(io + i, ny + 2 * me + io + i) = 1.0;
    lp.b_ge.segment(io, st.num_ge()) = rec.ge_const - rec.ge_u_coeff * u;
    yo += st.n_y;
    eo += st.num_eq();
    io += st.num_ge();
  }
  return lp;
}

LinearProgram TwoStageProblem::stage_inner_lp(int t, const Vec& xhat, const Vec& u) const {
  const StageData& st = inst.stages[t - 1];
  StageRecourse rec = stage_recourse(t, xhat);
  LinearProgram lp;
  lp.c = st.f;
  lp.lo = Vec::Constant(st.n_y, -kInf);
  lp.hi = Vec::Constant(st.n_y, kInf);
  lp.a_eq = st.w_mat;
  lp.b_eq = rec.eq_const - rec.eq_u_coeff * u;
  lp.a_ge = st.g_mat;
  lp.b_ge = rec.ge_const - rec.ge_u_coeff * u;
  return lp;
}

TwoStageProblem build_two_stage(const Instance& inst) {
  TwoStageProblem ts;
  ts.inst = inst;
  FlatIndexMap& map = ts.map;
  map.n_x = inst.n_x;
  int cum = 0;
  int off = inst.n_x;
  for (const auto& st : inst.stages) {
    cum += st.n_u;
    map.cum_nu.push_back(cum);
    map.n_s.push_back(st.n_s);
    map.q_offsets.push_back(off);
    off += st.n_s;
    map.p_offsets.push_back(off);
    off += st.n_s * cum;
  }
  map.dim = off;

  ts.first_stage_cost = Vec::Zero(map.dim);
  ts.first_stage_cost.head(inst.n_x) = inst.c;
  for (int t = 1; t <= inst.horizon; ++t) {
    const StageData& st = inst.stages[t - 1];
    for (int i = 0; i < st.n_s; ++i)
      ts.first_stage_cost[map.q_index(t, i)] = st.d[i];
  }
  return ts;
}

double first_stage_value(const TwoStageProblem& ts, const Vec& xhat) {
  if (xhat.size() != ts.map.dim)
    throw ValidationError("xhat does not conform to the flat index map");
  return ts.first_stage_cost.dot(xhat);
}

// --- affine counterpart -----------------------------------------------------

LinearProgram build_adr_counterpart(const Instance& inst, AdrLayout* layout_out) {
  TwoStageProblem ts = build_two_stage(inst);  // reuse the flat state map
  const int t_total = inst.horizon;
  const int nu = inst.total_nu();

  AdrLayout layout;
  layout.state_map = ts.map;
  int off = ts.map.dim;
  for (int t = 1; t <= t_total; ++t) {
    const StageData& st = inst.stages[t - 1];
    layout.y0_offsets.push_back(off);
    off += st.n_y;
    layout.yp_offsets.push_back(off);
    off += st.n_y * ts.map.cum_nu[t - 1];
  }
  layout.tau_index = off++;

  // One multiplier block per robust '>=' row plus one for the objective
  // epigraph, each of the stacked polytope's row count.
  Mat a_u;
  Vec b_u;
  inst.u_set.stacked(&a_u, &b_u);
  const int n_stack = static_cast<int>(a_u.rows());
  std::vector<int> dual_offsets;  // objective block first, then stage rows
  dual_offsets.push_back(off);
  off += n_stack;
  for (int t = 1; t <= t_total; ++t)
    for (int i = 0; i < inst.stages[t - 1].num_ge(); ++i) {
      dual_offsets.push_back(off);
      off += n_stack;
    }
  layout.num_vars = off;
  const int n = off;

  auto y0_index = [&](int t, int i) { return layout.y0_offsets[t - 1] + i; };
  auto yp_index = [&](int t, int i, int j) {
    return layout.yp_offsets[t - 1] + i * ts.map.cum_nu[t - 1] + j;
  };

  LinearProgram lp;
  lp.c = Vec::Zero(n);
  lp.c[layout.tau_index] = 1.0;
  lp.lo = Vec::Constant(n, -kInf);
  lp.hi = Vec::Constant(n, kInf);
  for (int k = dual_offsets.front(); k < n; ++k) lp.lo[k] = 0.0;
  for (int i = 0; i < inst.n_x; ++i) {
    lp.lo[i] = inst.x_bounds.lo[i];
    lp.hi[i] = inst.x_bounds.hi[i];
  }

  struct Trip {
    int r;
    int c;
    double v;
  };
  std::vector<Trip> eq_trip, ge_trip;
  std::vector<double> eq_rhs, ge_rhs;
  auto eq_row = [&]() {
    eq_rhs.push_back(0.0);
    return static_cast<int>(eq_rhs.size()) - 1;
  };
  auto ge_row = [&]() {
    ge_rhs.push_back(0.0);
    return static_cast<int>(ge_rhs.size()) - 1;
  };

  // x-space rows of the first-stage feasible set.
  for (const auto& row : inst.x_bounds.rows) {
    if (row.sense == '=') {
      int r = eq_row();
      for (int i = 0; i < inst.n_x; ++i)
        if (row.coeffs[i] != 0.0) eq_trip.push_back({r, i, row.coeffs[i]});
      eq_rhs[r] = row.rhs;
    } else {
      int r = ge_row();
      double sgn = row.sense == '>' ? 1.0 : -1.0;
      for (int i = 0; i < inst.n_x; ++i)
        if (row.coeffs[i] != 0.0) ge_trip.push_back({r, i, sgn * row.coeffs[i]});
      ge_rhs[r] = sgn * row.rhs;
    }
  }

  int dual_block = 0;
  // Objective epigraph: worst case of
  //   c'x + sum_t d_t'(P_t u^t + q_t) + f_t'(Y_t u^t + y0_t)  <=  tau.
  {
    const int blk = dual_offsets[dual_block++];
    // Coefficient matching in u: A_U' lambda = r where r collects P/Y terms.
    for (int j = 0; j < nu; ++j) {
      int r = eq_row();
      for (int k = 0; k < n_stack; ++k)
        if (a_u(k, j) != 0.0) eq_trip.push_back({r, blk + k, a_u(k, j)});
      for (int t = 1; t <= t_total; ++t) {
        if (j >= ts.map.cum_nu[t - 1]) continue;
        const StageData& st = inst.stages[t - 1];
        for (int i = 0; i < st.n_s; ++i)
          if (st.d[i] != 0.0)
            eq_trip.push_back({r, ts.map.p_index(t, i, j), -st.d[i]});
        for (int i = 0; i < st.n_y; ++i)
          if (st.f[i] != 0.0) eq_trip.push_back({r, yp_index(t, i, j), -st.f[i]});
      }
    }
    // tau - const - b_U' lambda >= 0.
    int r = ge_row();
    ge_trip.push_back({r, layout.tau_index, 1.0});
    for (int i = 0; i < inst.n_x; ++i)
      if (inst.c[i] != 0.0) ge_trip.push_back({r, i, -inst.c[i]});
    for (int t = 1; t <= t_total; ++t) {
      const StageData& st = inst.stages[t - 1];
      for (int i = 0; i < st.n_s; ++i)
        if (st.d[i] != 0.0) ge_trip.push_back({r, ts.map.q_index(t, i), -st.d[i]});
      for (int i = 0; i < st.n_y; ++i)
        if (st.f[i] != 0.0) ge_trip.push_back({r, y0_index(t, i), -st.f[i]});
    }
    for (int k = 0; k < n_stack; ++k)
      if (b_u[k] != 0.0) ge_trip.push_back({r, blk + k, -b_u[k]});
  }

  for (int t = 1; t <= t_total; ++t) {
    const StageData& st = inst.stages[t - 1];
    const int cum = ts.map.cum_nu[t - 1];
    const int u_off = inst.u_offset(t);
    const int prev_ns = t >= 2 ? inst.stages[t - 2].n_s : static_cast<int>(inst.s0.size());

    // Equality rows: constants and per-u-column coefficient matching.
    for (int i = 0; i < st.num_eq(); ++i) {
      int r = eq_row();
      for (int k = 0; k < inst.n_x; ++k)
        if (st.t_mat(i, k) != 0.0) eq_trip.push_back({r, k, st.t_mat(i, k)});
      for (int k = 0; k < st.n_s; ++k)
        if (st.a_mat(i, k) != 0.0)
          eq_trip.push_back({r, ts.map.q_index(t, k), st.a_mat(i, k)});
      for (int k = 0; k < st.n_y; ++k)
        if (st.w_mat(i, k) != 0.0) eq_trip.push_back({r, y0_index(t, k), st.w_mat(i, k)});
      double rhs = st.h0[i];
      if (t >= 2) {
        for (int k = 0; k < prev_ns; ++k)
          if (st.b_mat(i, k) != 0.0)
            eq_trip.push_back({r, ts.map.q_index(t - 1, k), st.b_mat(i, k)});
      } else {
        rhs -= st.b_mat.row(i).dot(inst.s0);
      }
      eq_rhs[r] = rhs;
    }
    for (int j = 0; j < cum; ++j) {
      // [A_t P_t + B_t P_{t-1} + W_t Y_t - H_t]_{:, j} = 0
      for (int i = 0; i < st.num_eq(); ++i) {
        int r = eq_row();
        bool any = false;
        for (int k = 0; k < st.n_s; ++k)
          if (st.a_mat(i, k) != 0.0) {
            eq_trip.push_back({r, ts.map.p_index(t, k, j), st.a_mat(i, k)});
            any = true;
          }
        if (t >= 2 && j < ts.map.cum_nu[t - 2])
          for (int k = 0; k < prev_ns; ++k)
            if (st.b_mat(i, k) != 0.0) {
              eq_trip.push_back({r, ts.map.p_index(t - 1, k, j), st.b_mat(i, k)});
              any = true;
            }
        for (int k = 0; k < st.n_y; ++k)
          if (st.w_mat(i, k) != 0.0) {
            eq_trip.push_back({r, yp_index(t, k, j), st.w_mat(i, k)});
            any = true;
          }
        double h = (j >= u_off && j < u_off + st.n_u) ? st.h_mat(i, j - u_off) : 0.0;
        eq_rhs[r] = h;
        if (!any && h == 0.0) {
          // Empty identity row; drop it again.
          eq_rhs.pop_back();
        }
      }
    }

    // Robust inequality rows.
    for (int i = 0; i < st.num_ge(); ++i) {
      const int blk = dual_offsets[dual_block++];
      // A_U' lambda = -(row coefficient in u), componentwise.
      for (int j = 0; j < nu; ++j) {
        int r = eq_row();
        for (int k = 0; k < n_stack; ++k)
          if (a_u(k, j) != 0.0) eq_trip.push_back({r, blk + k, a_u(k, j)});
        if (j < cum) {
          for (int k = 0; k < st.n_s; ++k)
            if (st.e_mat(i, k) != 0.0)
              eq_trip.push_back({r, ts.map.p_index(t, k, j), st.e_mat(i, k)});
          for (int k = 0; k < st.n_y; ++k)
            if (st.g_mat(i, k) != 0.0)
              eq_trip.push_back({r, yp_index(t, k, j), st.g_mat(i, k)});
        }
        double m = (j >= u_off && j < u_off + st.n_u) ? st.m_mat(i, j - u_off) : 0.0;
        eq_rhs[r] = m;
      }
      // const + min_u r'u >= 0  becomes  const - b_U' lambda >= 0.
      int r = ge_row();
      for (int k = 0; k < inst.n_x; ++k)
        if (st.l_mat(i, k) != 0.0) ge_trip.push_back({r, k, st.l_mat(i, k)});
      for (int k = 0; k < st.n_s; ++k)
        if (st.e_mat(i, k) != 0.0)
          ge_trip.push_back({r, ts.map.q_index(t, k), st.e_mat(i, k)});
      for (int k = 0; k < st.n_y; ++k)
        if (st.g_mat(i, k) != 0.0) ge_trip.push_back({r, y0_index(t, k), st.g_mat(i, k)});
      for (int k = 0; k < n_stack; ++k)
        if (b_u[k] != 0.0) ge_trip.push_back({r, blk + k, -b_u[k]});
      ge_rhs[r] = st.m0[i];
    }
  }

  lp.a_eq = Mat::Zero(static_cast<int>(eq_rhs.size()), n);
  for (const auto& tr : eq_trip) lp.a_eq(tr.r, tr.c) += tr.v;
  lp.b_eq = Eigen::Map<Vec>(eq_rhs.data(), static_cast<int>(eq_rhs.size()));
  lp.a_ge = Mat::Zero(static_cast<int>(ge_rhs.size()), n);
  for (const auto& tr : ge_trip) lp.a_ge(tr.r, tr.c) += tr.v;
  lp.b_ge = Eigen::Map<Vec>(ge_rhs.data(), static_cast<int>(ge_rhs.size()));

  if (layout_out) *layout_out = layout;
  return lp;
}

AdrSolution solve_adr(const Instance& inst) {
  AdrLayout layout;
  LinearProgram lp = build_adr_counterpart(inst, &layout);
  LpSolution sol = solve_lp(lp);
  AdrSolution out;
  out.status = sol.status;
  if (sol.status != LpStatus::kOptimal) return out;
  out.value = sol.objective;
  out.xhat = sol.x.head(layout.state_map.dim);
  return out;
}

std::string policy_to_json(const AffineStatePolicy& pol) {
  nlohmann::ordered_json doc;
  auto p_arr = nlohmann::ordered_json::array();
  auto q_arr = nlohmann::ordered_json::array();
  for (size_t t = 0; t < pol.p.size(); ++t) {
    nlohmann::ordered_json m;
    m["rows"] = pol.p[t].rows();
    m["cols"] = pol.p[t].cols();
    auto trips = nlohmann::ordered_json::array();
    for (int i = 0; i < pol.p[t].rows(); ++i)
      for (int j = 0; j < pol.p[t].cols(); ++j)
        if (pol.p[t](i, j) != 0.0) trips.push_back({i, j, pol.p[t](i, j)});
    m["triplets"] = trips;
    p_arr.push_back(m);
    auto qv = nlohmann::ordered_json::array();
    for (int i = 0; i < pol.q[t].size(); ++i) qv.push_back(pol.q[t][i]);
    q_arr.push_back(qv);
  }
  doc["P"] = p_arr;
  doc["q"] = q_arr;
  return doc.dump(1);
}

}  // namespace maro

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

#include "maro/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maro {

namespace {

// Interval of one policy-state coordinate s_t,i = sum_j P(i,j) u_j + q_i over
// the xhat box and the u box.
Interval state_interval(const FlatIndexMap& map, int t, int i, const Vec& xlo,
                        const Vec& xhi, const Polytope& u) {
  Interval acc = {xlo[map.q_index(t, i)], xhi[map.q_index(t, i)]};
  for (int j = 0; j < map.cum_nu[t - 1]; ++j) {
    Interval p{xlo[map.p_index(t, i, j)], xhi[map.p_index(t, i, j)]};
    acc += Interval::product(p, {u.lo[j], u.hi[j]});
  }
  return acc;
}

struct StageIntervals {
  std::vector<Interval> eq_rhs;   // range of the equality right-hand side b_t
  std::vector<Interval> ge_rhs;   // range of the inequality requirement c_t
  std::vector<Interval> y_box;    // derived control bounds
};

// Ranges of the recourse row data over (xhat box) x (u box). Control bounds
// come from single-variable inequality rows with no state or uncertainty
// part.
std::vector<StageIntervals> stage_intervals(const TwoStageProblem& ts, const Vec& xlo,
                                            const Vec& xhi) {
  const Instance& inst = ts.inst;
  const Polytope& u = inst.u_set;
  std::vector<StageIntervals> out(inst.horizon);
  for (int t = 1; t <= inst.horizon; ++t) {
    const StageData& st = inst.stages[t - 1];
    StageIntervals& si = out[t - 1];
    const int u_off = inst.u_offset(t);

    std::vector<Interval> s_cur(st.n_s), s_prev;
    for (int i = 0; i < st.n_s; ++i) s_cur[i] = state_interval(ts.map, t, i, xlo, xhi, u);
    if (t >= 2) {
      const int prev_ns = inst.stages[t - 2].n_s;
      s_prev.resize(prev_ns);
      for (int i = 0; i < prev_ns; ++i)
        s_prev[i] = state_interval(ts.map, t - 1, i, xlo, xhi, u);
    } else {
      for (int i = 0; i < inst.s0.size(); ++i) s_prev.push_back(Interval::point(inst.s0[i]));
    }

    si.eq_rhs.resize(st.num_eq());
    for (int r = 0; r < st.num_eq(); ++r) {
      Interval acc = Interval::point(st.h0[r]);
      for (int j = 0; j < st.n_u; ++j)
        acc += Interval{u.lo[u_off + j], u.hi[u_off + j]}.scaled(st.h_mat(r, j));
      for (int i = 0; i < inst.n_x; ++i)
        acc += Interval{xlo[i], xhi[i]}.scaled(-st.t_mat(r, i));
      for (int i = 0; i < st.n_s; ++i) acc += s_cur[i].scaled(-st.a_mat(r, i));
      for (size_t i = 0; i < s_prev.size(); ++i)
        acc += s_prev[i].scaled(-st.b_mat(r, static_cast<int>(i)));
      si.eq_rhs[r] = acc;
    }
    si.ge_rhs.resize(st.num_ge());
    for (int r = 0; r < st.num_ge(); ++r) {
      Interval acc = Interval::point(st.m0[r]);
      for (int j = 0; j < st.n_u; ++j)
        acc += Interval{u.lo[u_off + j], u.hi[u_off + j]}.scaled(st.m_mat(r, j));
      for (int i = 0; i < inst.n_x; ++i)
        acc += Interval{xlo[i], xhi[i]}.scaled(-st.l_mat(r, i));
      for (int i = 0; i < st.n_s; ++i) acc += s_cur[i].scaled(-st.e_mat(r, i));
      si.ge_rhs[r] = acc;
    }

    // Rows touching exactly one control coordinate bound it through the
    // row's requirement range: G y_j >= c(u) pins y_j on one side.
    si.y_box.assign(st.n_y, Interval::everything());
    for (int r = 0; r < st.num_ge(); ++r) {
      int nz = -1;
      bool single = true;
      for (int j = 0; j < st.n_y; ++j)
        if (st.g_mat(r, j) != 0.0) {
          if (nz >= 0) single = false;
          nz = j;
        }
      if (!single || nz < 0) continue;
      double coef = st.g_mat(r, nz);
      const Interval& c = si.ge_rhs[r];
      if (coef > 0.0)
        si.y_box[nz].lo = std::max(si.y_box[nz].lo, c.lo / coef);
      else
        si.y_box[nz].hi = std::min(si.y_box[nz].hi, c.lo / coef);
    }
  }
  return out;
}

}  // namespace

BigMValues choose_big_m(const TwoStageProblem& ts, const Vec& xhat_lo,
                        const Vec& xhat_hi, const BigMOptions& opts) {
  const Instance& inst = ts.inst;
  std::vector<StageIntervals> si = stage_intervals(ts, xhat_lo, xhat_hi);
  BigMValues out;
  out.dual_cap = opts.dual_cap;
  double budget = 0.0;
  for (int t = 1; t <= inst.horizon; ++t) {
    const StageData& st = inst.stages[t - 1];
    Vec m = Vec::Zero(st.num_ge());
    std::vector<char> fb(st.num_ge(), 0);
    for (int r = 0; r < st.num_ge(); ++r) {
      // slack_r = G_r y - c_r over the boxes; c_r's range is ge_rhs.
      Interval acc = si[t - 1].ge_rhs[r].scaled(-1.0);
      bool finite = true;
      for (int j = 0; j < st.n_y; ++j) {
        if (st.g_mat(r, j) == 0.0) continue;
        Interval yb = si[t - 1].y_box[j];
        Interval term = yb.scaled(st.g_mat(r, j));
        if (!std::isfinite(term.hi)) finite = false;
        acc += term;
      }
      if (finite && std::isfinite(acc.hi)) {
        m[r] = std::max(0.0, acc.hi) + opts.margin;
      } else {
        m[r] = opts.fallback;
        fb[r] = 1;
      }
    }
    out.slack_m.push_back(std::move(m));
    out.from_fallback.push_back(std::move(fb));
    for (const Interval& b : si[t - 1].eq_rhs) budget += b.abs_max();
    for (const Interval& c : si[t - 1].ge_rhs) budget += std::max(0.0, c.hi);
  }
  out.slack_budget = budget + opts.margin;
  return out;
}

namespace {

// Row-major assembly buffer for the KKT subproblems.
struct MipBuilder {
  int n = 0;
  std::vector<double> lo, hi, c;
  struct Row {
    std::vector<std::pair<int, double>> terms;
    double rhs;
  };
  std::vector<Row> eq, ge;

  int add_var(double l, double h, double cost) {
    lo.push_back(l);
    hi.push_back(h);
    c.push_back(cost);
    return n++;
  }
  void fill(MixedIntegerProgram* mip) const {
    LinearProgram& lp = mip->lp;
    lp.c = Eigen::Map<const Vec>(c.data(), n);
    lp.lo = Eigen::Map<const Vec>(lo.data(), n);
    lp.hi = Eigen::Map<const Vec>(hi.data(), n);
    lp.a_eq = Mat::Zero(static_cast<int>(eq.size()), n);
    lp.b_eq = Vec::Zero(static_cast<int>(eq.size()));
    for (size_t r = 0; r < eq.size(); ++r) {
      for (auto [j, v] : eq[r].terms) lp.a_eq(static_cast<int>(r), j) += v;
      lp.b_eq[static_cast<int>(r)] = eq[r].rhs;
    }
    lp.a_ge = Mat::Zero(static_cast<int>(ge.size()), n);
    lp.b_ge = Vec::Zero(static_cast<int>(ge.size()));
    for (size_t r = 0; r < ge.size(); ++r) {
      for (auto [j, v] : ge[r].terms) lp.a_ge(static_cast<int>(r), j) += v;
      lp.b_ge[static_cast<int>(r)] = ge[r].rhs;
    }
  }
};

void add_u_rows(MipBuilder* b, const Polytope& u) {
  for (int r = 0; r < u.num_rows(); ++r) {
    MipBuilder::Row row;
    for (int j = 0; j < u.dim(); ++j)
      if (u.d(r, j) != 0.0) row.terms.emplace_back(j, -u.d(r, j));
    row.rhs = -u.e[r];
    b->ge.push_back(std::move(row));
  }
}

// Stages included in the build; empty means all. Used to certify omega = 0
// one stage at a time (the slack objective is separable across stages).
MixedIntegerProgram build_fp_impl(const TwoStageProblem& ts, const Vec& xhat,
                                  const BigMValues& bigm, const std::vector<int>& stages,
                                  KktLayout* layout_out) {
  const Instance& inst = ts.inst;
  const Polytope& u_set = inst.u_set;
  const int nu = u_set.dim();
  MipBuilder b;
  MixedIntegerProgram mip;
  mip.maximize = true;
  KktLayout layout;

  for (int j = 0; j < nu; ++j) b.add_var(u_set.lo[j], u_set.hi[j], 0.0);
  add_u_rows(&b, u_set);

  std::vector<int> use = stages;
  if (use.empty())
    for (int t = 1; t <= inst.horizon; ++t) use.push_back(t);

  const double m_ab = bigm.slack_budget;
  MipBuilder::Row total;  // aggregate slack row: valid at every KKT point
  for (int t : use) {
    const StageData& st = inst.stages[t - 1];
    TwoStageProblem::StageRecourse rec = ts.stage_recourse(t, xhat);
    const int me = st.num_eq();
    const int mi = st.num_ge();

    int y0 = b.n;
    for (int j = 0; j < st.n_y; ++j) b.add_var(-kInf, kInf, 0.0);
    int ap0 = b.n;
    for (int i = 0; i < me; ++i) b.add_var(0.0, m_ab, 1.0);
    int am0 = b.n;
    for (int i = 0; i < me; ++i) b.add_var(0.0, m_ab, 1.0);
    int be0 = b.n;
    for (int i = 0; i < mi; ++i) b.add_var(0.0, m_ab, 1.0);
    int phi0 = b.n;
    for (int i = 0; i < me; ++i) b.add_var(-1.0, 1.0, 0.0);
    int pi0 = b.n;
    for (int i = 0; i < mi; ++i) b.add_var(0.0, 1.0, 0.0);
    int wpi0 = b.n;
    for (int i = 0; i < mi; ++i) mip.binaries.push_back(b.add_var(0.0, 1.0, 0.0));
    int wap0 = b.n;
    for (int i = 0; i < me; ++i) mip.binaries.push_back(b.add_var(0.0, 1.0, 0.0));
    int wam0 = b.n;
    for (int i = 0; i < me; ++i) mip.binaries.push_back(b.add_var(0.0, 1.0, 0.0));
    int wbe0 = b.n;
    for (int i = 0; i < mi; ++i) mip.binaries.push_back(b.add_var(0.0, 1.0, 0.0));
    layout.y_off.push_back(y0);
    layout.ap_off.push_back(ap0);
    layout.am_off.push_back(am0);
    layout.beta_off.push_back(be0);
    layout.phi_off.push_back(phi0);
    layout.pi_off.push_back(pi0);
    layout.w_off.push_back(wpi0);
    layout.w_ap_off.push_back(wap0);
    layout.w_am_off.push_back(wam0);
    layout.w_beta_off.push_back(wbe0);

    // Primal rows with slacks.
    for (int r = 0; r < me; ++r) {
      MipBuilder::Row row;
      for (int j = 0; j < st.n_y; ++j)
        if (st.w_mat(r, j) != 0.0) row.terms.emplace_back(y0 + j, st.w_mat(r, j));
      row.terms.emplace_back(ap0 + r, 1.0);
      row.terms.emplace_back(am0 + r, -1.0);
      for (int j = 0; j < nu; ++j)
        if (rec.eq_u_coeff(r, j) != 0.0) row.terms.emplace_back(j, rec.eq_u_coeff(r, j));
      row.rhs = rec.eq_const[r];
      b.eq.push_back(std::move(row));
      total.terms.emplace_back(ap0 + r, -1.0);
      total.terms.emplace_back(am0 + r, -1.0);
    }
    for (int r = 0; r < mi; ++r) {
      MipBuilder::Row row;
      for (int j = 0; j < st.n_y; ++j)
        if (st.g_mat(r, j) != 0.0) row.terms.emplace_back(y0 + j, st.g_mat(r, j));
      row.terms.emplace_back(be0 + r, 1.0);
      for (int j = 0; j < nu; ++j)
        if (rec.ge_u_coeff(r, j) != 0.0) row.terms.emplace_back(j, rec.ge_u_coeff(r, j));
      row.rhs = rec.ge_const[r];
      b.ge.push_back(std::move(row));
      total.terms.emplace_back(be0 + r, -1.0);
    }
    // Stationarity of the slack objective: W'phi + G'pi = 0.
    for (int j = 0; j < st.n_y; ++j) {
      MipBuilder::Row row;
      for (int r = 0; r < me; ++r)
        if (st.w_mat(r, j) != 0.0) row.terms.emplace_back(phi0 + r, st.w_mat(r, j));
      for (int r = 0; r < mi; ++r)
        if (st.g_mat(r, j) != 0.0) row.terms.emplace_back(pi0 + r, st.g_mat(r, j));
      row.rhs = 0.0;
      b.eq.push_back(std::move(row));
    }
    // Complementarity, linearized per row.
    for (int r = 0; r < mi; ++r) {
      {  // pi_r <= w
        MipBuilder::Row row;
        row.terms.emplace_back(pi0 + r, -1.0);
        row.terms.emplace_back(wpi0 + r, 1.0);
        row.rhs = 0.0;
        b.ge.push_back(std::move(row));
      }
      {  // G y + beta + coeff u - c <= M (1 - w)
        double m = bigm.slack_m[t - 1][r] + m_ab;
        MipBuilder::Row row;
        for (int j = 0; j < st.n_y; ++j)
          if (st.g_mat(r, j) != 0.0) row.terms.emplace_back(y0 + j, -st.g_mat(r, j));
        row.terms.emplace_back(be0 + r, -1.0);
        for (int j = 0; j < nu; ++j)
          if (rec.ge_u_coeff(r, j) != 0.0) row.terms.emplace_back(j, -rec.ge_u_coeff(r, j));
        row.terms.emplace_back(wpi0 + r, -m);
        row.rhs = -rec.ge_const[r] - m;
        b.ge.push_back(std::move(row));
      }
      {  // beta_r <= M w_beta
        MipBuilder::Row row;
        row.terms.emplace_back(be0 + r, -1.0);
        row.terms.emplace_back(wbe0 + r, m_ab);
        row.rhs = 0.0;
        b.ge.push_back(std::move(row));
      }
      {  // 1 - pi_r <= 1 - w_beta, i.e. pi_r >= w_beta
        MipBuilder::Row row;
        row.terms.emplace_back(pi0 + r, 1.0);
        row.terms.emplace_back(wbe0 + r, -1.0);
        row.rhs = 0.0;
        b.ge.push_back(std::move(row));
      }
    }
    for (int r = 0; r < me; ++r) {
      {  // a+_r <= M w_ap
        MipBuilder::Row row;
        row.terms.emplace_back(ap0 + r, -1.0);
        row.terms.emplace_back(wap0 + r, m_ab);
        row.rhs = 0.0;
        b.ge.push_back(std::move(row));
      }
      {  // 1 - phi_r <= 2 (1 - w_ap), i.e. phi_r >= 2 w_ap - 1
        MipBuilder::Row row;
        row.terms.emplace_back(phi0 + r, 1.0);
        row.terms.emplace_back(wap0 + r, -2.0);
        row.rhs = -1.0;
        b.ge.push_back(std::move(row));
      }
      {  // a-_r <= M w_am
        MipBuilder::Row row;
        row.terms.emplace_back(am0 + r, -1.0);
        row.terms.emplace_back(wam0 + r, m_ab);
        row.rhs = 0.0;
        b.ge.push_back(std::move(row));
      }
      {  // 1 + phi_r <= 2 (1 - w_am), i.e. -phi_r >= 2 w_am - 1
        MipBuilder::Row row;
        row.terms.emplace_back(phi0 + r, -1.0);
        row.terms.emplace_back(wam0 + r, -2.0);
        row.rhs = -1.0;
        b.ge.push_back(std::move(row));
      }
    }
    // Objective: total slack mass of this stage.
    for (int r = 0; r < me; ++r) {
      b.c[ap0 + r] = 1.0;
      b.c[am0 + r] = 1.0;
    }
    for (int r = 0; r < mi; ++r) b.c[be0 + r] = 1.0;
  }
  // At any KKT point the slack mass is the inner optimum, which the budget
  // bounds; adding the row only tightens the relaxation.
  total.rhs = -bigm.slack_budget;
  b.ge.push_back(std::move(total));

  b.fill(&mip);
  layout.num_vars = b.n;
  if (layout_out) *layout_out = layout;
  return mip;
}

}  // namespace

MixedIntegerProgram build_sup(const TwoStageProblem& ts, const Vec& xhat,
                              const BigMValues& bigm, KktLayout* layout_out) {
  const Instance& inst = ts.inst;
  const Polytope& u_set = inst.u_set;
  const int nu = u_set.dim();
  MipBuilder b;
  MixedIntegerProgram mip;
  mip.maximize = true;
  KktLayout layout;

  Vec obj_u = ts.objective_u_coeff(xhat);
  for (int j = 0; j < nu; ++j) b.add_var(u_set.lo[j], u_set.hi[j], obj_u[j]);
  add_u_rows(&b, u_set);

  for (int t = 1; t <= inst.horizon; ++t) {
    const StageData& st = inst.stages[t - 1];
    TwoStageProblem::StageRecourse rec = ts.stage_recourse(t, xhat);
    const int me = st.num_eq();
    const int mi = st.num_ge();

    int y0 = b.n;
    for (int j = 0; j < st.n_y; ++j) b.add_var(-kInf, kInf, st.f[j]);
    int phi0 = b.n;
    for (int i = 0; i < me; ++i) b.add_var(-bigm.dual_cap, bigm.dual_cap, 0.0);
    int pi0 = b.n;
    for (int i = 0; i < mi; ++i) b.add_var(0.0, bigm.dual_cap, 0.0);
    int w0 = b.n;
    for (int i = 0; i < mi; ++i) mip.binaries.push_back(b.add_var(0.0, 1.0, 0.0));
    layout.y_off.push_back(y0);
    layout.phi_off.push_back(phi0);
    layout.pi_off.push_back(pi0);
    layout.w_off.push_back(w0);

    for (int r = 0; r < me; ++r) {
      MipBuilder::Row row;
      for (int j = 0; j < st.n_y; ++j)
        if (st.w_mat(r, j) != 0.0) row.terms.emplace_back(y0 + j, st.w_mat(r, j));
      for (int j = 0; j < nu; ++j)
        if (rec.eq_u_coeff(r, j) != 0.0) row.terms.emplace_back(j, rec.eq_u_coeff(r, j));
      row.rhs = rec.eq_const[r];
      b.eq.push_back(std::move(row));
    }
    for (int r = 0; r < mi; ++r) {
      MipBuilder::Row row;
      for (int j = 0; j < st.n_y; ++j)
        if (st.g_mat(r, j) != 0.0) row.terms.emplace_back(y0 + j, st.g_mat(r, j));
      for (int j = 0; j < nu; ++j)
        if (rec.ge_u_coeff(r, j) != 0.0) row.terms.emplace_back(j, rec.ge_u_coeff(r, j));
      row.rhs = rec.ge_const[r];
      b.ge.push_back(std::move(row));
    }
    for (int j = 0; j < st.n_y; ++j) {  // W'phi + G'pi = f
      MipBuilder::Row row;
      for (int r = 0; r < me; ++r)
        if (st.w_mat(r, j) != 0.0) row.terms.emplace_back(phi0 + r, st.w_mat(r, j));
      for (int r = 0; r < mi; ++r)
        if (st.g_mat(r, j) != 0.0) row.terms.emplace_back(pi0 + r, st.g_mat(r, j));
      row.rhs = st.f[j];
      b.eq.push_back(std::move(row));
    }
    for (int r = 0; r < mi; ++r) {
      {  // pi_r <= dual_cap * w
        MipBuilder::Row row;
        row.terms.emplace_back(pi0 + r, -1.0);
        row.terms.emplace_back(w0 + r, bigm.dual_cap);
        row.rhs = 0.0;
        b.ge.push_back(std::move(row));
      }
      {  // G y + coeff u - c <= M (1 - w)
        double m = bigm.slack_m[t - 1][r];
        MipBuilder::Row row;
        for (int j = 0; j < st.n_y; ++j)
          if (st.g_mat(r, j) != 0.0) row.terms.emplace_back(y0 + j, -st.g_mat(r, j));
        for (int j = 0; j < nu; ++j)
          if (rec.ge_u_coeff(r, j) != 0.0) row.terms.emplace_back(j, -rec.ge_u_coeff(r, j));
        row.terms.emplace_back(w0 + r, -m);
        row.rhs = -rec.ge_const[r] - m;
        b.ge.push_back(std::move(row));
      }
    }
  }
  b.fill(&mip);
  layout.num_vars = b.n;
  if (layout_out) *layout_out = layout;
  return mip;
}

MixedIntegerProgram build_fp(const TwoStageProblem& ts, const Vec& xhat,
                             const BigMValues& bigm, KktLayout* layout_out) {
  return build_fp_impl(ts, xhat, bigm, {}, layout_out);
}

namespace {

// Shared subgradient assembly from inner-LP duals at a fixed realization.
// Optimality cuts add the first-stage gradient so the cut minorizes F.
Vec subgradient_from_duals(const TwoStageProblem& ts, const Vec& u_star,
                           const std::vector<Vec>& phi, const std::vector<Vec>& pi,
                           bool with_first_stage) {
  const Instance& inst = ts.inst;
  const FlatIndexMap& map = ts.map;
  Vec g = Vec::Zero(map.dim);
  if (with_first_stage) g += ts.first_stage_cost;
  for (int t = 1; t <= inst.horizon; ++t) {
    const StageData& st = inst.stages[t - 1];
    if (inst.n_x > 0) {
      Vec gx = -(st.t_mat.transpose() * phi[t - 1]) - (st.l_mat.transpose() * pi[t - 1]);
      g.head(inst.n_x) += gx;
    }
    Vec gq = -(st.a_mat.transpose() * phi[t - 1]) - (st.e_mat.transpose() * pi[t - 1]);
    if (t < inst.horizon) {
      const StageData& nx = inst.stages[t];
      gq -= nx.b_mat.transpose() * phi[t];
    }
    for (int i = 0; i < st.n_s; ++i) {
      g[map.q_index(t, i)] += gq[i];
      double pcomp = gq[i] + (with_first_stage ? st.d[i] : 0.0);
      for (int j = 0; j < map.cum_nu[t - 1]; ++j)
        g[map.p_index(t, i, j)] += pcomp * u_star[j];
    }
  }
  return g;
}

// Exact inner solve at a fixed realization; the stagewise split keeps the
// LPs small and hands back per-stage duals directly.
struct InnerSolve {
  bool feasible = true;
  double value = 0.0;  // sum of stage LP optima (no objective u-term)
  std::vector<Vec> y, phi, pi;
};

InnerSolve solve_inner_at(const TwoStageProblem& ts, const Vec& xhat, const Vec& u) {
  InnerSolve out;
  for (int t = 1; t <= ts.horizon(); ++t) {
    LpSolution sol = solve_lp(ts.stage_inner_lp(t, xhat, u));
    if (sol.status != LpStatus::kOptimal) {
      out.feasible = false;
      return out;
    }
    out.value += sol.objective;
    out.y.push_back(sol.x);
    out.phi.push_back(sol.dual_eq);
    out.pi.push_back(sol.dual_ge);
  }
  return out;
}

struct SlackSolve {
  double value = 0.0;
  std::vector<Vec> phi, pi;
};

SlackSolve solve_slack_at(const TwoStageProblem& ts, const Vec& xhat, const Vec& u) {
  LpSolution sol = solve_lp(ts.slack_inner_lp(xhat, u));
  if (sol.status != LpStatus::kOptimal)
    throw SolverError("elastic recourse subproblem failed to solve");
  SlackSolve out;
  out.value = sol.objective;
  int eo = 0, io = 0;
  for (const auto& st : ts.inst.stages) {
    out.phi.push_back(sol.dual_eq.segment(eo, st.num_eq()));
    out.pi.push_back(sol.dual_ge.segment(io, st.num_ge()));
    eo += st.num_eq();
    io += st.num_ge();
  }
  return out;
}

double data_scale(const TwoStageProblem& ts, const Vec& xhat) {
  double s = 1.0;
  for (int t = 1; t <= ts.horizon(); ++t) {
    TwoStageProblem::StageRecourse rec = ts.stage_recourse(t, xhat);
    if (rec.eq_const.size() > 0) s = std::max(s, rec.eq_const.cwiseAbs().maxCoeff());
    if (rec.ge_const.size() > 0) s = std::max(s, rec.ge_const.cwiseAbs().maxCoeff());
  }
  return s;
}

}  // namespace

AdversarialResult solve_worst_case(const TwoStageProblem& ts, const Vec& xhat,
                                   const AdversarialOptions& opts) {
  const int nu = ts.total_nu();
  BigMValues bigm = choose_big_m(ts, xhat, xhat, opts.bigm);
  KktLayout layout;
  MixedIntegerProgram mip = build_sup(ts, xhat, bigm, &layout);

  Vec obj_u = ts.objective_u_coeff(xhat);
  MipOptions mip_opts = opts.mip;
  if (opts.use_heuristic) {
    mip_opts.heuristic = [&ts, &xhat, &layout, &obj_u, nu,
                          cap = opts.bigm.dual_cap](const Vec& node) -> std::optional<Vec> {
      Vec u = node.head(nu);
      InnerSolve inner = solve_inner_at(ts, xhat, u);
      if (!inner.feasible) return std::nullopt;
      Vec full = Vec::Zero(node.size());
      full.head(nu) = u;
      for (int t = 1; t <= ts.horizon(); ++t) {
        double worst = std::max(inner.phi[t - 1].size() ? inner.phi[t - 1].cwiseAbs().maxCoeff() : 0.0,
                                inner.pi[t - 1].size() ? inner.pi[t - 1].cwiseAbs().maxCoeff() : 0.0);
        if (worst > 0.999 * cap) return std::nullopt;  // exceeds the dual caps
        full.segment(layout.y_off[t - 1], inner.y[t - 1].size()) = inner.y[t - 1];
        full.segment(layout.phi_off[t - 1], inner.phi[t - 1].size()) = inner.phi[t - 1];
        full.segment(layout.pi_off[t - 1], inner.pi[t - 1].size()) = inner.pi[t - 1];
        for (int r = 0; r < inner.pi[t - 1].size(); ++r)
          full[layout.w_off[t - 1] + r] = inner.pi[t - 1][r] > 1e-7 ? 1.0 : 0.0;
      }
      return full;
    };
  }

  MipSolution sol = solve_milp(mip, mip_opts);
  AdversarialResult res;
  if (sol.status == MipStatus::kInfeasible)
    throw SolverError(
        "worst-case subproblem infeasible: recourse unbounded below or dual caps too tight");
  if (sol.status == MipStatus::kUnbounded)
    throw SolverError("worst-case subproblem unbounded; uncertainty set must be bounded");
  if (sol.status == MipStatus::kNodeLimit) {
    if (!sol.has_incumbent)
      throw SolverError("worst-case subproblem hit the node limit with no incumbent");
    res.inexact = true;
    res.residual_gap = sol.rel_gap;
  }

  res.u_star = sol.x.head(nu);
  // Clean duals and an exact value from a fresh inner solve at u*.
  InnerSolve inner = solve_inner_at(ts, xhat, res.u_star);
  if (!inner.feasible)
    throw SolverError("worst-case realization has infeasible recourse; run the feasibility check first");
  res.q_value = obj_u.dot(res.u_star) + inner.value;
  res.y = inner.y;
  res.phi = inner.phi;
  res.pi = inner.pi;
  double scale = 1.0 + std::abs(res.q_value);
  if (!res.inexact && std::abs(res.q_value - sol.objective) > 1e-5 * scale) {
    std::ostringstream os;
    os << "worst-case value drift between the KKT solve (" << sol.objective
       << ") and the inner verification (" << res.q_value << ")";
    res.warnings.push_back(os.str());
  }

  // Post-solve big-M validation on the incumbent.
  const double vf = opts.bigm.validation_factor;
  res.w = Vec::Zero(static_cast<int>(mip.binaries.size()));
  int wi = 0;
  for (int t = 1; t <= ts.horizon(); ++t) {
    const StageData& st = ts.inst.stages[t - 1];
    for (int r = 0; r < st.num_ge(); ++r) {
      double w = sol.x[layout.w_off[t - 1] + r];
      res.w[wi++] = w;
      double pi_v = sol.x[layout.pi_off[t - 1] + r];
      if (pi_v > (1.0 - vf) * bigm.dual_cap)
        res.warnings.push_back("dual cap nearly active at stage " + std::to_string(t));
      if (w < 0.5) {
        TwoStageProblem::StageRecourse rec = ts.stage_recourse(t, xhat);
        double slack = st.g_mat.row(r).dot(sol.x.segment(layout.y_off[t - 1], st.n_y)) +
                       rec.ge_u_coeff.row(r).dot(res.u_star) - rec.ge_const[r];
        if (slack > (1.0 - vf) * bigm.slack_m[t - 1][r])
          res.warnings.push_back("big-M nearly active at stage " + std::to_string(t) +
                                 " row " + std::to_string(r));
      }
    }
  }
  return res;
}

FeasibilityResult feasibility_value(const TwoStageProblem& ts, const Vec& xhat,
                                    const AdversarialOptions& opts) {
  const int nu = ts.total_nu();
  BigMValues bigm = choose_big_m(ts, xhat, xhat, opts.bigm);
  const double tol = opts.feas_tol * data_scale(ts, xhat);

  FeasibilityResult out;
  bool positive = false;
  if (opts.stagewise_screen) {
    for (int t = 1; t <= ts.horizon() && !positive; ++t) {
      KktLayout layout;
      MixedIntegerProgram stage_mip = build_fp_impl(ts, xhat, bigm, {t}, &layout);
      MipSolution sol = solve_milp(stage_mip, opts.mip);
      if (sol.status == MipStatus::kInfeasible)
        throw SolverError("feasibility subproblem infeasible; this cannot happen");
      if (sol.status == MipStatus::kNodeLimit && sol.bound > tol &&
          (!sol.has_incumbent || sol.objective <= tol))
        throw SolverError("feasibility undecided within the node limit");
      if (sol.has_incumbent && sol.objective > tol) positive = true;
    }
    if (!positive) {
      out.omega = 0.0;
      return out;
    }
  }

  KktLayout layout;
  MixedIntegerProgram mip = build_fp_impl(ts, xhat, bigm, {}, &layout);
  MipOptions mip_opts = opts.mip;
  if (opts.use_heuristic) {
    mip_opts.heuristic = [&ts, &xhat, &layout, nu](const Vec& node) -> std::optional<Vec> {
      Vec u = node.head(nu);
      Vec full = Vec::Zero(node.size());
      full.head(nu) = u;
      // Exact stage-by-stage elastic solves at u; reconstruct primal slacks
      // and indicator values from them.
      for (int t = 1; t <= ts.horizon(); ++t) {
        LinearProgram lp = ts.stage_inner_lp(t, xhat, u);
        // Elastic single-stage version.
        const StageData& st = ts.inst.stages[t - 1];
        const int me = st.num_eq(), mi = st.num_ge(), ny = st.n_y;
        LinearProgram el;
        const int n = ny + 2 * me + mi;
        el.c = Vec::Zero(n);
        el.c.segment(ny, 2 * me + mi).setOnes();
        el.lo = Vec::Constant(n, -kInf);
        el.hi = Vec::Constant(n, kInf);
        el.lo.segment(ny, 2 * me + mi).setZero();
        el.a_eq = Mat::Zero(me, n);
        el.a_eq.leftCols(ny) = lp.a_eq;
        for (int i = 0; i < me; ++i) {
          el.a_eq(i, ny + i) = 1.0;
          el.a_eq(i, ny + me + i) = -1.0;
        }
        el.b_eq = lp.b_eq;
        el.a_ge = Mat::Zero(mi, n);
        el.a_ge.leftCols(ny) = lp.a_ge;
        for (int i = 0; i < mi; ++i) el.a_ge(i, ny + 2 * me + i) = 1.0;
        el.b_ge = lp.b_ge;
        LpSolution s = solve_lp(el);
        if (s.status != LpStatus::kOptimal) return std::nullopt;
        full.segment(layout.y_off[t - 1], ny) = s.x.head(ny);
        full.segment(layout.ap_off[t - 1], me) = s.x.segment(ny, me);
        full.segment(layout.am_off[t - 1], me) = s.x.segment(ny + me, me);
        full.segment(layout.beta_off[t - 1], mi) = s.x.segment(ny + 2 * me, mi);
        full.segment(layout.phi_off[t - 1], me) = s.dual_eq;
        full.segment(layout.pi_off[t - 1], mi) = s.dual_ge;
        for (int r = 0; r < mi; ++r) {
          full[layout.w_off[t - 1] + r] = s.dual_ge[r] > 1e-7 ? 1.0 : 0.0;
          full[layout.w_beta_off[t - 1] + r] = s.x[ny + 2 * me + r] > 1e-9 ? 1.0 : 0.0;
        }
        for (int r = 0; r < me; ++r) {
          full[layout.w_ap_off[t - 1] + r] = s.x[ny + r] > 1e-9 ? 1.0 : 0.0;
          full[layout.w_am_off[t - 1] + r] = s.x[ny + me + r] > 1e-9 ? 1.0 : 0.0;
        }
      }
      return full;
    };
  }
  MipSolution sol = solve_milp(mip, mip_opts);
  if (sol.status == MipStatus::kInfeasible)
    throw SolverError("feasibility subproblem infeasible; this cannot happen");
  if (sol.status == MipStatus::kNodeLimit &&
      (!sol.has_incumbent || sol.objective <= tol) && sol.bound > tol)
    throw SolverError("feasibility undecided within the node limit");

  double incumbent = sol.has_incumbent ? sol.objective : 0.0;
  if (incumbent <= tol) {
    out.omega = 0.0;
    return out;
  }
  out.u_star = sol.x.head(nu);
  SlackSolve slack = solve_slack_at(ts, xhat, out.u_star);
  out.omega = slack.value;
  out.phi = slack.phi;
  out.pi = slack.pi;
  if (sol.status == MipStatus::kOptimal &&
      std::abs(slack.value - sol.objective) > 1e-5 * (1.0 + slack.value)) {
    std::ostringstream os;
    os << "feasibility value drift between the KKT solve (" << sol.objective
       << ") and the elastic verification (" << slack.value << ")";
    out.warnings.push_back(os.str());
  }
  return out;
}

Cut optimality_cut(const TwoStageProblem& ts, const Vec& xhat, const AdversarialResult& res) {
  Cut cut;
  cut.kind = CutKind::kOptimality;
  cut.query = xhat;
  cut.value = first_stage_value(ts, xhat) + res.q_value;
  cut.grad = subgradient_from_duals(ts, res.u_star, res.phi, res.pi, true);
  cut.u_star = res.u_star;
  cut.inexact = res.inexact;
  return cut;
}

Cut feasibility_cut(const TwoStageProblem& ts, const Vec& xhat, const FeasibilityResult& res) {
  Cut cut;
  cut.kind = CutKind::kFeasibility;
  cut.query = xhat;
  cut.value = res.omega;
  cut.grad = subgradient_from_duals(ts, res.u_star, res.phi, res.pi, false);
  cut.u_star = res.u_star;
  return cut;
}

}  // namespace maro

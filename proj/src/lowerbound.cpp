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

#include "maro/lowerbound.hpp"

#include <algorithm>

#include "maro/lp.hpp"
#include "nlohmann/json.hpp"

namespace maro {

ScenarioSet harvest_scenarios(const std::vector<Vec>& raw, double dedup_tol) {
  if (raw.empty())
    throw ValidationError("no adversarial realizations to harvest from an empty log");
  ScenarioSet out;
  for (const Vec& u : raw) {
    bool seen = false;
    for (const Vec& kept : out.points)
      if (kept.size() == u.size() &&
          (kept - u).lpNorm<Eigen::Infinity>() <= dedup_tol) {
        seen = true;
        break;
      }
    if (!seen) {
      out.points.push_back(u);
      out.tags.push_back(ScenarioProvenance::kHarvested);
    }
  }
  return out;
}

ScenarioTree build_scenario_tree(const Instance& inst, const ScenarioSet& set, double tol) {
  if (set.points.empty()) throw ValidationError("scenario tree needs a nonempty set");
  ScenarioTree tree;
  const int n = set.size();
  std::vector<int> prev_group(n, 0);  // stage-0 root: everything together
  int prev_count = 1;
  int prefix_len = 0;
  for (int t = 1; t <= inst.horizon; ++t) {
    prefix_len += inst.stages[t - 1].n_u;
    std::vector<std::vector<int>> groups;
    std::vector<int> parent;
    std::vector<int> assign(n, -1);
    for (int g = 0; g < prev_count; ++g) {
      for (int i = 0; i < n; ++i) {
        if (prev_group[i] != g || assign[i] >= 0) continue;
        // i seeds a new subgroup; collect every sibling with an equal prefix.
        int gid = static_cast<int>(groups.size());
        groups.push_back({i});
        parent.push_back(g);
        assign[i] = gid;
        for (int j = i + 1; j < n; ++j) {
          if (prev_group[j] != g || assign[j] >= 0) continue;
          if ((set.points[i].head(prefix_len) - set.points[j].head(prefix_len))
                  .lpNorm<Eigen::Infinity>() <= tol) {
            groups[gid].push_back(j);
            assign[j] = gid;
          }
        }
      }
    }
    tree.groups.push_back(groups);
    tree.parent.push_back(parent);
    tree.group_of.push_back(assign);
    prev_group = assign;
    prev_count = static_cast<int>(groups.size());
  }
  return tree;
}

double solve_scenario_bound(const Instance& inst, const ScenarioSet& set,
                            const ScenarioTree& tree) {
  const int n_scen = set.size();
  // Variable layout: x, theta, then per stage per group (s block, y block).
  int n = inst.n_x + 1;
  const int theta = inst.n_x;
  std::vector<std::vector<int>> s_off(inst.horizon), y_off(inst.horizon);
  for (int t = 1; t <= inst.horizon; ++t) {
    const StageData& st = inst.stages[t - 1];
    for (int g = 0; g < tree.num_groups(t); ++g) {
      s_off[t - 1].push_back(n);
      n += st.n_s;
      y_off[t - 1].push_back(n);
      n += st.n_y;
    }
  }

  int eq_rows = 0, ge_rows = n_scen;
  for (int t = 1; t <= inst.horizon; ++t) {
    eq_rows += inst.stages[t - 1].num_eq() * tree.num_groups(t);
    ge_rows += inst.stages[t - 1].num_ge() * tree.num_groups(t);
  }
  for (const auto& row : inst.x_bounds.rows) (row.sense == '=' ? eq_rows : ge_rows) += 1;

  LinearProgram lp;
  lp.c = Vec::Zero(n);
  lp.c.head(inst.n_x) = inst.c;
  lp.c[theta] = 1.0;
  lp.lo = Vec::Constant(n, -kInf);
  lp.hi = Vec::Constant(n, kInf);
  for (int i = 0; i < inst.n_x; ++i) {
    lp.lo[i] = inst.x_bounds.lo[i];
    lp.hi[i] = inst.x_bounds.hi[i];
  }
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

  // Worst-scenario epigraph: theta >= sum_t d' s + f' y along each scenario.
  for (int i = 0; i < n_scen; ++i) {
    lp.a_ge(gr, theta) = 1.0;
    for (int t = 1; t <= inst.horizon; ++t) {
      const StageData& st = inst.stages[t - 1];
      int g = tree.group_of[t - 1][i];
      for (int k = 0; k < st.n_s; ++k) lp.a_ge(gr, s_off[t - 1][g] + k) -= st.d[k];
      for (int k = 0; k < st.n_y; ++k) lp.a_ge(gr, y_off[t - 1][g] + k) -= st.f[k];
    }
    lp.b_ge[gr++] = 0.0;
  }

  // Stage dynamics per group, at the group's shared prefix realization.
  for (int t = 1; t <= inst.horizon; ++t) {
    const StageData& st = inst.stages[t - 1];
    const int u_off = inst.u_offset(t);
    for (int g = 0; g < tree.num_groups(t); ++g) {
      const int rep = tree.groups[t - 1][g].front();
      Vec u_t = set.points[rep].segment(u_off, st.n_u);
      for (int r = 0; r < st.num_eq(); ++r) {
        for (int k = 0; k < inst.n_x; ++k) lp.a_eq(er, k) = st.t_mat(r, k);
        for (int k = 0; k < st.n_s; ++k)
          lp.a_eq(er, s_off[t - 1][g] + k) = st.a_mat(r, k);
        for (int k = 0; k < st.n_y; ++k)
          lp.a_eq(er, y_off[t - 1][g] + k) = st.w_mat(r, k);
        double rhs = st.h0[r] + st.h_mat.row(r).dot(u_t);
        if (t >= 2) {
          int pg = tree.parent[t - 1][g];
          for (int k = 0; k < inst.stages[t - 2].n_s; ++k)
            lp.a_eq(er, s_off[t - 2][pg] + k) = st.b_mat(r, k);
        } else {
          rhs -= st.b_mat.row(r).dot(inst.s0);
        }
        lp.b_eq[er++] = rhs;
      }
      for (int r = 0; r < st.num_ge(); ++r) {
        for (int k = 0; k < inst.n_x; ++k) lp.a_ge(gr, k) = st.l_mat(r, k);
        for (int k = 0; k < st.n_s; ++k)
          lp.a_ge(gr, s_off[t - 1][g] + k) = st.e_mat(r, k);
        for (int k = 0; k < st.n_y; ++k)
          lp.a_ge(gr, y_off[t - 1][g] + k) = st.g_mat(r, k);
        lp.b_ge[gr++] = st.m0[r] + st.m_mat.row(r).dot(u_t);
      }
    }
  }

  LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible)
    throw SolverError("scenario relaxation infeasible: no policy covers even the sampled tree");
  if (sol.status == LpStatus::kUnbounded)
    throw SolverError("scenario relaxation unbounded below");
  return sol.objective;
}

double optimality_gap(double ub, double lb) {
  if (ub < lb - 1e-9 * (1.0 + std::abs(ub)))
    throw Error("optimality gap called with UB < LB");
  double mid = 0.5 * (ub + lb);
  if (std::abs(mid) <= 5e-13) throw Error("optimality gap undefined: UB + LB is zero");
  return (ub - lb) / mid;
}

ScenarioSet sample_uniform_scenarios(const Polytope& u, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("need at least one sample");
  Rng rng(seed);
  ScenarioSet out;
  const long budget = 10000L * n;
  long trials = 0;
  while (out.size() < n) {
    if (++trials > budget)
      throw SolverError("uniform sampler degenerate: acceptance rate below 1e-4");
    Vec cand(u.dim());
    for (int i = 0; i < u.dim(); ++i) cand[i] = rng.uniform(u.lo[i], u.hi[i]);
    if (u.num_rows() > 0 && (u.d * cand - u.e).maxCoeff() > 0.0) continue;
    out.points.push_back(cand);
    out.tags.push_back(ScenarioProvenance::kSampled);
  }
  return out;
}

std::string scenarios_to_json(const ScenarioSet& set) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (int i = 0; i < set.size(); ++i) {
    nlohmann::ordered_json s;
    s["u"] = nlohmann::ordered_json::array();
    for (int k = 0; k < set.points[i].size(); ++k) s["u"].push_back(set.points[i][k]);
    s["provenance"] =
        set.tags[i] == ScenarioProvenance::kHarvested ? "harvested" : "sampled";
    doc.push_back(s);
  }
  return doc.dump(1);
}

}  // namespace maro

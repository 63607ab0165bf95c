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

#include "maro/inventory.hpp"

#include <chrono>
#include <future>
#include <sstream>
#include <thread>

#include "maro/lowerbound.hpp"

namespace maro {

void InventoryConfig::check() const {
  if (periods < 1) throw ValidationError("inventory: periods must be >= 1");
  if (hold_cost < 0 || short_cost < 0 || order_cost < 0)
    throw ValidationError("inventory: costs must be nonnegative");
  if (order_lo > order_hi) throw ValidationError("inventory: order_lo > order_hi");
  if (cap <= 0) throw ValidationError("inventory: cap must be positive");
  if (!demand_nominal.empty() && static_cast<int>(demand_nominal.size()) != periods)
    throw ValidationError("inventory: demand_nominal length must match periods");
  if (!demand_dev.empty() && static_cast<int>(demand_dev.size()) != periods)
    throw ValidationError("inventory: demand_dev length must match periods");
  for (double d : demand_dev)
    if (d < 0) throw ValidationError("inventory: demand_dev must be nonnegative");
  if (budget < 0) throw ValidationError("inventory: a negative budget empties the uncertainty set");
}

Instance generate_inventory(const InventoryConfig& cfg, std::uint64_t seed) {
  cfg.check();
  const int t_total = cfg.periods;
  Rng rng(seed ^ 0x1337beefULL);

  std::vector<double> nominal(cfg.demand_nominal), dev(cfg.demand_dev);
  if (nominal.empty()) {
    nominal.resize(t_total);
    for (double& v : nominal)
      v = cfg.demand_base * (1.0 + cfg.demand_spread * (2.0 * rng.uniform() - 1.0));
  }
  if (dev.empty()) {
    dev.resize(t_total);
    for (int t = 0; t < t_total; ++t) dev[t] = cfg.demand_dev_frac * nominal[t];
  }

  const bool budgeted = cfg.budget < static_cast<double>(t_total);
  const double aux_cap = 2.0 * std::max(cfg.hold_cost, cfg.short_cost) * cfg.cap + 10.0;

  Instance inst;
  inst.horizon = t_total;
  inst.n_x = 0;
  inst.c = Vec(0);
  inst.s0 = Vec::Constant(1, cfg.init_inventory);
  inst.x_bounds.lo = Vec(0);
  inst.x_bounds.hi = Vec(0);

  int nu_total = 0;
  std::vector<int> xi_col(t_total, -1);  // deviation coordinate per stage, if any
  for (int t = 1; t <= t_total; ++t) {
    const bool has_xi = budgeted && dev[t - 1] > 0.0;
    StageData st;
    st.t = t;
    st.n_s = 1;
    st.n_y = 2;  // order, cost epigraph
    st.n_u = has_xi ? 2 : 1;

    st.a_mat = Mat::Constant(1, 1, 1.0);
    st.b_mat = Mat::Constant(1, 1, -1.0);
    st.w_mat = Mat::Zero(1, 2);
    st.w_mat(0, 0) = -1.0;
    st.t_mat = Mat::Zero(1, 0);
    st.h0 = Vec::Zero(1);
    st.h_mat = Mat::Zero(1, st.n_u);
    st.h_mat(0, 0) = -1.0;  // balance: s_t - s_{t-1} - order = -demand

    const int mi = 7;
    st.l_mat = Mat::Zero(mi, 0);
    st.e_mat = Mat::Zero(mi, 1);
    st.g_mat = Mat::Zero(mi, 2);
    st.m0 = Vec::Zero(mi);
    st.m_mat = Mat::Zero(mi, st.n_u);
    st.e_mat(0, 0) = -cfg.hold_cost;  // aux >= hold * s
    st.g_mat(0, 1) = 1.0;
    st.e_mat(1, 0) = cfg.short_cost;  // aux >= -short * s
    st.g_mat(1, 1) = 1.0;
    st.g_mat(2, 0) = 1.0;  // order bounds
    st.m0[2] = cfg.order_lo;
    st.g_mat(3, 0) = -1.0;
    st.m0[3] = -cfg.order_hi;
    st.e_mat(4, 0) = -1.0;  // capacity
    st.m0[4] = -cfg.cap;
    st.e_mat(5, 0) = 1.0;
    st.m0[5] = -cfg.cap;
    st.g_mat(6, 1) = -1.0;  // epigraph box keeps the recourse bounded
    st.m0[6] = -aux_cap;

    st.d = Vec::Zero(1);
    st.f = Vec(2);
    st.f << cfg.order_cost, 1.0;
    if (has_xi) xi_col[t - 1] = nu_total + 1;
    nu_total += st.n_u;
    inst.stages.push_back(std::move(st));
  }

  Polytope& u = inst.u_set;
  u.lo = Vec::Zero(nu_total);
  u.hi = Vec::Zero(nu_total);
  int col = 0;
  for (int t = 1; t <= t_total; ++t) {
    u.lo[col] = nominal[t - 1] - dev[t - 1];
    u.hi[col] = nominal[t - 1] + dev[t - 1];
    ++col;
    if (xi_col[t - 1] >= 0) {
      u.lo[col] = 0.0;
      u.hi[col] = 1.0;
      ++col;
    }
  }
  if (budgeted) {
    // |demand - nominal| <= dev * xi plus the total deviation budget.
    int extra = 0;
    for (int t = 0; t < t_total; ++t)
      if (xi_col[t] >= 0) extra += 2;
    u.d = Mat::Zero(extra + 1, nu_total);
    u.e = Vec::Zero(extra + 1);
    int r = 0;
    col = 0;
    for (int t = 0; t < t_total; ++t) {
      int dem = col;
      col += inst.stages[t].n_u;
      if (xi_col[t] < 0) continue;
      u.d(r, dem) = 1.0;
      u.d(r, xi_col[t]) = -dev[t];
      u.e[r++] = nominal[t];
      u.d(r, dem) = -1.0;
      u.d(r, xi_col[t]) = -dev[t];
      u.e[r++] = -nominal[t];
      u.d(extra, xi_col[t]) = 1.0;
    }
    u.e[extra] = cfg.budget;
  } else {
    u.d = Mat::Zero(0, nu_total);
    u.e = Vec(0);
  }
  return inst;
}

namespace {

std::pair<StudyRow, StudyRow> run_study_instance(const InventoryConfig& cfg,
                                                 std::uint64_t seed,
                                                 const BundleConfig& bundle_cfg,
                                                 int scenario_cap) {
  using clock = std::chrono::steady_clock;
  StudyRow tpb, adr;
  tpb.seed = adr.seed = seed;
  tpb.periods = adr.periods = cfg.periods;
  tpb.method = "tpb";
  adr.method = "adr";
  try {
    Instance inst = generate_inventory(cfg, seed);
    TwoStageProblem ts = build_two_stage(inst);

    auto t0 = clock::now();
    BundleSolution bundle = run_bundle(ts, bundle_cfg);
    tpb.time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    tpb.upper_bound = bundle.upper_bound;
    tpb.iterations = static_cast<int>(bundle.log.size());

    auto t1 = clock::now();
    AdrSolution affine = solve_adr(inst);
    adr.time_ms = std::chrono::duration<double, std::milli>(clock::now() - t1).count();
    if (affine.status != LpStatus::kOptimal) {
      adr.failed = true;
      adr.error = "affine counterpart did not solve";
    } else {
      adr.upper_bound = affine.value;
    }

    ScenarioSet scen = harvest_scenarios(bundle.harvested);
    if (scen.size() > scenario_cap) {
      scen.points.resize(scenario_cap);
      scen.tags.resize(scenario_cap);
    }
    ScenarioTree tree = build_scenario_tree(inst, scen);
    double lb = solve_scenario_bound(inst, scen, tree);
    tpb.lower_bound = adr.lower_bound = lb;
    tpb.gap = optimality_gap(tpb.upper_bound, lb);
    if (!adr.failed) adr.gap = optimality_gap(adr.upper_bound, lb);
  } catch (const std::exception& e) {
    tpb.failed = adr.failed = true;
    tpb.error = adr.error = e.what();
  }
  return {tpb, adr};
}

}  // namespace

StudyReport study(const InventoryConfig& cfg, const std::vector<std::uint64_t>& seeds,
                  const BundleConfig& bundle_cfg, int scenario_cap) {
  StudyReport rep;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::pair<StudyRow, StudyRow>> results(seeds.size());
  size_t next = 0;
  while (next < seeds.size()) {
    size_t batch = std::min<size_t>(hw, seeds.size() - next);
    std::vector<std::future<std::pair<StudyRow, StudyRow>>> futs;
    for (size_t b = 0; b < batch; ++b) {
      std::uint64_t seed = seeds[next + b];
      futs.push_back(std::async(std::launch::async, [&, seed] {
        return run_study_instance(cfg, seed, bundle_cfg, scenario_cap);
      }));
    }
    for (size_t b = 0; b < batch; ++b) results[next + b] = futs[b].get();
    next += batch;
  }

  double sum_tpb = 0.0, sum_adr = 0.0;
  int n_ok = 0;
  for (auto& [tpb, adr] : results) {
    if (tpb.failed || adr.failed) {
      ++rep.failures;
    } else {
      sum_tpb += tpb.gap;
      sum_adr += adr.gap;
      ++n_ok;
    }
    rep.rows.push_back(tpb);
    rep.rows.push_back(adr);
  }
  if (n_ok > 0) {
    rep.avg_gap_tpb = sum_tpb / n_ok;
    rep.avg_gap_adr = sum_adr / n_ok;
  }
  return rep;
}

std::string StudyReport::to_csv(bool zero_times) const {
  std::ostringstream os;
  os << "seed,T,method,UB,LB,gap,iters,time_ms\n";
  for (const auto& r : rows) {
    if (r.failed) {
      os << r.seed << "," << r.periods << "," << r.method << ",failed,,,,\n";
      continue;
    }
    os << r.seed << "," << r.periods << "," << r.method << ","
       << format_double(r.upper_bound) << "," << format_double(r.lower_bound) << ","
       << format_double(r.gap) << "," << r.iterations << ","
       << format_double(zero_times ? 0.0 : r.time_ms) << "\n";
  }
  return os.str();
}

}  // namespace maro

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
// Hand-built and randomized instances shared across test suites.

#ifndef MARO_TESTS_SUPPORT_INSTANCES_HPP_
#define MARO_TESTS_SUPPORT_INSTANCES_HPP_

#include "maro/model.hpp"
#include "maro/types.hpp"

namespace maro::testing {

// One-stage balance problem: s_1 = s0 + y - u, |s_1| <= 5, y in [0, 4].
// Complete recourse on the equality via the state rule's freedom and y's box.
inline Instance simple_t1() {
  Instance inst;
  inst.horizon = 1;
  inst.n_x = 1;
  inst.c = Vec::Constant(1, 0.5);
  inst.s0 = Vec::Zero(1);
  inst.x_bounds.lo = Vec::Constant(1, 0.0);
  inst.x_bounds.hi = Vec::Constant(1, 10.0);
  StageData st;
  st.t = 1;
  st.n_s = 1;
  st.n_y = 1;
  st.n_u = 1;
  st.a_mat = Mat::Constant(1, 1, 1.0);
  st.b_mat = Mat::Constant(1, 1, -1.0);
  st.w_mat = Mat::Constant(1, 1, -1.0);
  st.t_mat = Mat::Zero(1, 1);
  st.h0 = Vec::Zero(1);
  st.h_mat = Mat::Constant(1, 1, -1.0);
  st.l_mat = Mat::Zero(4, 1);
  st.e_mat = Mat::Zero(4, 1);
  st.g_mat = Mat::Zero(4, 1);
  st.m0 = Vec(4);
  st.e_mat(0, 0) = 1.0;   //  s >= -5
  st.e_mat(1, 0) = -1.0;  // -s >= -5
  st.g_mat(2, 0) = 1.0;   //  y >= 0
  st.g_mat(3, 0) = -1.0;  // -y >= -4
  st.m0 << -5, -5, 0, -4;
  st.m_mat = Mat::Zero(4, 1);
  st.d = Vec::Constant(1, 1.0);
  st.f = Vec::Constant(1, 2.0);
  inst.stages.push_back(st);
  inst.u_set.lo = Vec::Zero(1);
  inst.u_set.hi = Vec::Ones(1);
  inst.u_set.d = Mat::Zero(0, 1);
  inst.u_set.e = Vec(0);
  return inst;
}

struct RandomInstanceOptions {
  int horizon = 2;
  int n_x = 1;          // 0 or 1
  bool budget_row = false;   // add sum(u) <= budget to U
  bool hard_state_rows = false;  // state-only rows that break complete recourse
  double slack_span = 50.0;      // equality slack box half-width
};

// Random multistage instance with bounded recourse: every stage has one
// balance-style equality carrying a dedicated slack control, and every
// control is boxed through inequality rows. Without hard_state_rows the
// recourse is feasible for every (xhat, u), so only optimality cuts arise.
inline Instance random_instance(Rng& rng, const RandomInstanceOptions& o = {}) {
  Instance inst;
  inst.horizon = o.horizon;
  inst.n_x = o.n_x;
  inst.c = Vec(o.n_x);
  for (int i = 0; i < o.n_x; ++i) inst.c[i] = rng.uniform(-1.0, 1.0);
  inst.s0 = Vec::Constant(1, rng.uniform(-1.0, 1.0));
  inst.x_bounds.lo = Vec::Constant(o.n_x, -2.0);
  inst.x_bounds.hi = Vec::Constant(o.n_x, 2.0);

  for (int t = 1; t <= o.horizon; ++t) {
    StageData st;
    st.t = t;
    st.n_s = 1;
    st.n_y = 2;  // main control + equality slack
    st.n_u = 1;
    const int me = 1;
    st.a_mat = Mat::Constant(me, 1, rng.uniform(0.5, 1.5));
    st.b_mat = Mat::Constant(me, 1, rng.uniform(-1.5, -0.5));
    st.w_mat = Mat(me, 2);
    st.w_mat << rng.uniform(-1.5, -0.5), 1.0;  // slack enters with +1
    st.t_mat = Mat::Zero(me, o.n_x);
    if (o.n_x > 0) st.t_mat(0, 0) = rng.uniform(-1.0, 1.0);
    st.h0 = Vec::Constant(me, rng.uniform(-0.5, 0.5));
    st.h_mat = Mat::Constant(me, 1, rng.uniform(-1.5, 1.5));

    // Boxes on both controls; optionally a state-only row.
    int mi = 4 + (o.hard_state_rows ? 1 : 0);
    st.l_mat = Mat::Zero(mi, o.n_x);
    st.e_mat = Mat::Zero(mi, 1);
    st.g_mat = Mat::Zero(mi, 2);
    st.m0 = Vec::Zero(mi);
    st.m_mat = Mat::Zero(mi, 1);
    st.g_mat(0, 0) = 1.0;
    st.m0[0] = -3.0;  //  y >= -3
    st.g_mat(1, 0) = -1.0;
    st.m0[1] = -3.0;  // -y >= -3
    st.g_mat(2, 1) = 1.0;
    st.m0[2] = -o.slack_span;
    st.g_mat(3, 1) = -1.0;
    st.m0[3] = -o.slack_span;
    if (o.hard_state_rows) {
      st.e_mat(4, 0) = -1.0;  // s_t <= cap, no control can rescue it
      st.m0[4] = -2.5;
    }
    st.d = Vec::Constant(1, rng.uniform(-0.5, 1.0));
    st.f = Vec(2);
    st.f << rng.uniform(0.2, 1.5), rng.uniform(0.5, 1.5);
    inst.stages.push_back(st);
  }
  const int nu = o.horizon;
  inst.u_set.lo = Vec::Zero(nu);
  inst.u_set.hi = Vec::Ones(nu);
  if (o.budget_row) {
    inst.u_set.d = Mat::Ones(1, nu);
    inst.u_set.e = Vec::Constant(1, 0.5 * nu + 0.25);
  } else {
    inst.u_set.d = Mat::Zero(0, nu);
    inst.u_set.e = Vec(0);
  }
  return inst;
}

}  // namespace maro::testing

#endif  // MARO_TESTS_SUPPORT_INSTANCES_HPP_

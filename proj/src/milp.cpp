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

#include "maro/milp.hpp"

#include <cmath>
#include <memory>
#include <queue>

namespace maro {

void MixedIntegerProgram::check() const {
  lp.check();
  for (int j : binaries) {
    if (j < 0 || j >= lp.num_vars())
      throw ValidationError("MixedIntegerProgram: binary index out of range");
    if (lp.lo[j] < -1e-12 || lp.hi[j] > 1.0 + 1e-12)
      throw ValidationError("MixedIntegerProgram: binary bounds must lie in [0, 1]");
  }
}

namespace {

struct Node {
  // Sparse bound fixings accumulated along the path from the root.
  std::vector<std::pair<int, double>> fixings;  // (binary var, 0 or 1)
  double bound;  // parent LP value (minimization sense)
  int depth;
  long id;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

}  // namespace

MipSolution solve_milp(const MixedIntegerProgram& mip, const MipOptions& opts) {
  mip.check();
  LinearProgram lp = mip.lp;
  if (mip.maximize) lp.c = -lp.c;

  MipSolution out;
  const double int_tol = opts.integrality_tol;
  double incumbent = kInf;
  Vec incumbent_x;
  bool have_incumbent = false;

  auto accept = [&](double value, const Vec& x) {
    if (value < incumbent - 1e-12) {
      incumbent = value;
      incumbent_x = x;
      have_incumbent = true;
    }
  };

  auto prune_threshold = [&]() {
    if (!have_incumbent) return kInf;
    return incumbent - opts.gap_tol * std::max(1.0, std::abs(incumbent));
  };

  const int depth_cap = 10 * std::max<int>(1, static_cast<int>(mip.binaries.size()));

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push({{}, -kInf, 0, 0});
  long next_id = 1;
  bool node_limited = false;
  bool root_unbounded = false;
  bool any_bound_prune = false;

  Vec base_lo = lp.lo, base_hi = lp.hi;
  while (!open.empty()) {
    if (out.nodes >= opts.node_limit) {
      node_limited = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= prune_threshold()) {  // bound-based prune
      any_bound_prune = true;
      continue;
    }
    ++out.nodes;

    lp.lo = base_lo;
    lp.hi = base_hi;
    for (auto [j, v] : node.fixings) {
      lp.lo[j] = v;
      lp.hi[j] = v;
    }
    LpSolution rel = solve_lp(lp, opts.simplex);
    if (rel.status == LpStatus::kInfeasible) continue;
    if (rel.status == LpStatus::kUnbounded) {
      // Binaries are bounded, so an unbounded relaxation is inherited by
      // every child: the MILP itself is unbounded (if any completion is
      // feasible) -- report it at the root.
      root_unbounded = true;
      break;
    }
    if (rel.objective >= prune_threshold()) {
      any_bound_prune = true;
      continue;
    }

    int branch_var = -1;
    double best_frac = int_tol;
    for (int j : mip.binaries) {
      double frac = std::abs(rel.x[j] - std::round(rel.x[j]));
      if (frac > best_frac + 1e-15) {
        best_frac = frac;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      accept(rel.objective, rel.x);
      continue;
    }
    if (opts.heuristic) {
      // The hook maps the fractional point to a feasible point (original
      // variable space, binaries integral); feasibility is its contract.
      if (auto fixed = opts.heuristic(rel.x)) {
        double v = mip.lp.c.dot(*fixed);
        accept(mip.maximize ? -v : v, *fixed);
      }
    }
    if (node.depth >= depth_cap) continue;  // safety valve; see node_limit

    Node child0{node.fixings, rel.objective, node.depth + 1, next_id++};
    child0.fixings.emplace_back(branch_var, 0.0);
    Node child1{node.fixings, rel.objective, node.depth + 1, next_id++};
    child1.fixings.emplace_back(branch_var, 1.0);
    open.push(std::move(child0));
    open.push(std::move(child1));
  }

  if (root_unbounded) {
    out.status = MipStatus::kUnbounded;
    return out;
  }

  // Proven bound: open nodes first (node-limited runs), else the weakest
  // pruning threshold that was actually used.
  double global_bound;
  if (!open.empty()) {
    global_bound = open.top().bound;
    if (!std::isfinite(global_bound) && have_incumbent) global_bound = -kInf;
  } else if (any_bound_prune && have_incumbent) {
    global_bound = prune_threshold();
  } else {
    global_bound = incumbent;  // tree exhausted without bound pruning
  }

  out.has_incumbent = have_incumbent;
  if (have_incumbent) {
    out.x = incumbent_x;
    out.objective = mip.maximize ? -incumbent : incumbent;
    out.bound = mip.maximize ? -global_bound : global_bound;
    out.rel_gap = std::abs(incumbent - global_bound) / std::max(1.0, std::abs(incumbent));
    out.status = node_limited ? MipStatus::kNodeLimit : MipStatus::kOptimal;
  } else {
    out.status = node_limited ? MipStatus::kNodeLimit : MipStatus::kInfeasible;
  }
  return out;
}

}  // namespace maro

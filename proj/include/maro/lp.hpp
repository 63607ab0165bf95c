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

#ifndef MARO_LP_HPP_
#define MARO_LP_HPP_

#include <string>

#include "maro/types.hpp"

namespace maro {

/// min c'x  s.t.  a_eq x = b_eq,  a_ge x >= b_ge,  lo <= x <= hi.
/// Empty matrices stand for "no rows"; +-inf bounds are allowed.
struct LinearProgram {
  Vec c;
  Mat a_eq;
  Vec b_eq;
  Mat a_ge;
  Vec b_ge;
  Vec lo;
  Vec hi;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eq() const { return static_cast<int>(b_eq.size()); }
  int num_ge() const { return static_cast<int>(b_ge.size()); }

  /// Throws ValidationError on nonconforming dimensions or lo > hi.
  void check() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vec x;
  double objective = 0.0;
  Vec dual_eq;  // free sign
  Vec dual_ge;  // >= 0 at optimality
  // Certificates: infeasibility gives row multipliers (eq then ge) with
  // y'A dominated by bound activity yet y'b strictly positive; unboundedness
  // gives a feasible ray of strictly decreasing objective.
  Vec farkas;
  Vec ray;
  int iterations = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-9;
  int max_iters = 0;       // 0: automatic from problem size
  int refactor_every = 64; // basis refactorization cadence
  int degeneracy_limit = 60;  // consecutive degenerate pivots before Bland
};

/// Bounded-variable two-phase revised simplex.
/// Throws SolverError when the iteration cap trips despite Bland's rule.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

/// Debug dump in the instance document's matrix format.
std::string lp_to_json(const LinearProgram& lp);

}  // namespace maro

#endif  // MARO_LP_HPP_

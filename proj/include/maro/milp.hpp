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

#ifndef MARO_MILP_HPP_
#define MARO_MILP_HPP_

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "maro/lp.hpp"
#include "maro/types.hpp"

namespace maro {

/// An LP plus a set of binary variables. `maximize` flips the objective
/// sense; bounds of every binary must lie inside [0, 1].
struct MixedIntegerProgram {
  LinearProgram lp;
  std::vector<int> binaries;
  bool maximize = false;

  void check() const;
};

enum class MipStatus { kOptimal, kInfeasible, kUnbounded, kNodeLimit };

struct MipSolution {
  MipStatus status = MipStatus::kInfeasible;
  Vec x;
  double objective = 0.0;  // incumbent value, in the problem's own sense
  double bound = 0.0;      // best proven bound on the optimum
  double rel_gap = 0.0;    // |objective - bound| / max(1, |objective|)
  long nodes = 0;
  bool has_incumbent = false;
};

struct MipOptions {
  double gap_tol = 1e-6;      // relative optimality gap at termination
  double integrality_tol = 1e-7;
  long node_limit = 500000;
  /// Optional primal heuristic: maps a (fractional) node relaxation point to
  /// a feasible point, or nullopt. Used to seed strong incumbents.
  std::function<std::optional<Vec>(const Vec&)> heuristic;
  SimplexOptions simplex;
};

/// Best-bound branch and bound, branching on the most fractional binary with
/// index ties broken low. Node-limit exhaustion returns kNodeLimit with the
/// incumbent and the residual gap rather than throwing.
MipSolution solve_milp(const MixedIntegerProgram& mip, const MipOptions& opts = {});

}  // namespace maro

#endif  // MARO_MILP_HPP_

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

#ifndef MARO_QP_HPP_
#define MARO_QP_HPP_

#include <optional>
#include <vector>

#include "maro/types.hpp"

namespace maro {

/// Proximal master problem shape:
///
///   min  linear'x [+ eta] + (1/(2t)) ||x - center||^2
///   s.t. rows over (x [, eta]),  bounds on x
///
/// The quadratic acts on the x block only; eta, when present, is the last
/// variable and enters the objective with coefficient one.
struct QuadraticProgram {
  int dim_x = 0;
  bool has_eta = false;
  double prox_t = 1.0;  // must be > 0: strict convexity on the x block
  Vec center;           // length dim_x
  Vec linear;           // length dim_x, may be zero

  struct Row {
    Vec coeffs;  // length dim_x (+1 with eta)
    double rhs = 0.0;
    char sense = '>';  // '>', '<', '='
  };
  std::vector<Row> rows;
  Vec lo;  // bounds over x (+ eta slot when present); +-inf allowed
  Vec hi;

  int num_vars() const { return dim_x + (has_eta ? 1 : 0); }
  void check() const;
};

enum class QpStatus { kOptimal, kInfeasible };

struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
  double max() const {
    return std::max(std::max(primal, dual), std::max(stationarity, complementarity));
  }
};

struct QpSolution {
  QpStatus status = QpStatus::kInfeasible;
  Vec x;             // dim_x
  double eta = 0.0;  // meaningful iff has_eta
  double objective = 0.0;
  /// One multiplier per input row, in input order; >= 0 for '>' rows,
  /// <= 0 for '<' rows, free for '='. Zero on inactive rows.
  Vec row_duals;
  KktResiduals kkt;
  int iterations = 0;
};

/// Primal active-set method. `warm` is an optional feasible start in
/// (x [, eta]) coordinates; when absent or infeasible a phase-1 LP finds one.
/// Throws SolverError if the objective is unbounded below (no row caps eta).
QpSolution solve_qp(const QuadraticProgram& qp, const Vec* warm = nullptr);

}  // namespace maro

#endif  // MARO_QP_HPP_

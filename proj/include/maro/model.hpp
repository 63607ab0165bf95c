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

#ifndef MARO_MODEL_HPP_
#define MARO_MODEL_HPP_

#include <optional>
#include <string>
#include <vector>

#include "maro/types.hpp"

namespace maro {

/// Bounded polyhedron { u : D u <= e, lo <= u <= hi }. Finite bounds are
/// required so adversarial subproblems and big-M estimates stay finite.
struct Polytope {
  Mat d;   // constraint matrix, possibly 0 rows
  Vec e;   // right-hand side of D u <= e
  Vec lo;  // per-coordinate lower bounds
  Vec hi;  // per-coordinate upper bounds

  int dim() const { return static_cast<int>(lo.size()); }
  int num_rows() const { return static_cast<int>(d.rows()); }

  bool contains(const Vec& u, double tol) const;

  /// Constraints as a single stacked system A u <= b (D rows, then hi rows,
  /// then -lo rows). Convenient for dualization and vertex enumeration.
  void stacked(Mat* a, Vec* b) const;
};

/// Per-stage data of the multistage robust program
///
///   T_t x + A_t s_t + B_t s_{t-1} + W_t y_t  = h0_t + H_t u_t
///   L_t x + E_t s_t            + G_t y_t    >= m0_t + M_t u_t
///
/// with state decisions s_t, control decisions y_t, and stage uncertainty u_t.
/// Matrices absent from an input document are zero blocks of conforming size.
struct StageData {
  int t = 0;  // 1-based stage index
  int n_s = 0;
  int n_y = 0;
  int n_u = 0;

  Mat t_mat;  // equality block on x
  Mat a_mat;  // equality block on s_t
  Mat b_mat;  // equality block on s_{t-1}
  Mat w_mat;  // equality block on y_t
  Vec h0;     // equality rhs
  Mat h_mat;  // equality uncertainty map (columns of u_t)

  Mat l_mat;  // inequality block on x
  Mat e_mat;  // inequality block on s_t
  Mat g_mat;  // inequality block on y_t
  Vec m0;     // inequality rhs
  Mat m_mat;  // inequality uncertainty map (columns of u_t)

  Vec d;  // state cost
  Vec f;  // control cost

  int num_eq() const { return static_cast<int>(h0.size()); }
  int num_ge() const { return static_cast<int>(m0.size()); }
};

/// Full problem instance: here-and-now decisions x constrained by x_bounds,
/// per-stage blocks, and the uncertainty polytope over the stacked vector
/// u = (u_1, ..., u_T). The initial state s0 is fixed, known data.
struct Instance {
  int horizon = 0;  // T
  int n_x = 0;
  Vec c;   // here-and-now cost
  Vec s0;  // initial state (multiplied by B_1)

  struct LinearRow {
    Vec coeffs;
    double rhs = 0.0;
    char sense = '<';  // '<', '>', '='
  };
  struct XBounds {
    Vec lo;
    Vec hi;
    std::vector<LinearRow> rows;
  };
  XBounds x_bounds;

  std::vector<StageData> stages;
  Polytope u_set;

  int total_nu() const;
  /// Columns of u belonging to stage t (1-based): [offset, offset + n_u).
  int u_offset(int t) const;
};

struct ValidationFinding {
  std::string where;    // e.g. "stage 2 / At"
  std::string message;  // what is wrong
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool ok() const { return findings.empty(); }
  std::string to_string() const;
};

/// Checks every structural invariant: block dimension conformance, bound
/// ordering, U nonemptiness (one LP feasibility solve) and boundedness.
/// Findings are reported, never thrown.
ValidationReport validate(const Instance& inst);

/// Parses an instance document. Throws ParseError on malformed JSON or schema
/// violations (message carries the JSON path), ValidationError when the parsed
/// data fails dimension validation (message names block and stage).
Instance load_instance(const std::string& text);

/// Canonical document for an instance: fixed key order, triplets sorted
/// row-major, numbers printed exactly. load(save(inst)) reproduces every
/// numeric entry bit for bit.
std::string save_instance(const Instance& inst);

}  // namespace maro

#endif  // MARO_MODEL_HPP_

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

#include "maro/qp.hpp"

#include <Eigen/LU>
#include <algorithm>

#include "maro/lp.hpp"

namespace maro {

void QuadraticProgram::check() const {
  const int n = num_vars();
  if (prox_t <= 0.0) throw ValidationError("QuadraticProgram: prox_t must be > 0");
  if (center.size() != dim_x) throw ValidationError("QuadraticProgram: center length");
  if (linear.size() != dim_x) throw ValidationError("QuadraticProgram: linear length");
  if (lo.size() != n || hi.size() != n) throw ValidationError("QuadraticProgram: bound length");
  for (const auto& r : rows)
    if (r.coeffs.size() != n) throw ValidationError("QuadraticProgram: row length");
}

namespace {

// All constraints normalized to a'v >= b ('=' rows keep a flag). Bound
// constraints become singleton rows so the active-set logic is uniform.
struct NormRow {
  Vec a;
  double b;
  bool equality;
  int source;  // index into qp.rows, or -1 for a bound row
  double sign; // +1 if kept as '>', -1 if it was a '<' row
};

class ActiveSetQp {
 public:
  ActiveSetQp(const QuadraticProgram& qp, const Vec* warm) : qp_(qp), n_(qp.num_vars()) {
    h_ = Vec::Zero(n_);
    for (int i = 0; i < qp.dim_x; ++i) h_[i] = 1.0 / qp.prox_t;
    for (size_t r = 0; r < qp.rows.size(); ++r) {
      const auto& row = qp.rows[r];
      if (row.sense == '=') {
        rows_.push_back({row.coeffs, row.rhs, true, static_cast<int>(r), +1.0});
      } else if (row.sense == '>') {
        rows_.push_back({row.coeffs, row.rhs, false, static_cast<int>(r), +1.0});
      } else {
        rows_.push_back({-row.coeffs, -row.rhs, false, static_cast<int>(r), -1.0});
      }
    }
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(qp.lo[j])) {
        Vec e = Vec::Zero(n_);
        e[j] = 1.0;
        rows_.push_back({e, qp.lo[j], false, -1, +1.0});
      }
      if (std::isfinite(qp.hi[j])) {
        Vec e = Vec::Zero(n_);
        e[j] = -1.0;
        rows_.push_back({e, -qp.hi[j], false, -1, +1.0});
      }
    }
    if (warm && warm->size() == n_ && feasible(*warm, 1e-9)) {
      v_ = *warm;
      have_start_ = true;
    }
  }

  QpSolution run() {
    QpSolution sol;
    if (!have_start_ && !phase1(&sol)) return sol;

    const int m = static_cast<int>(rows_.size());
    std::vector<char> in_w(m, 0);
    std::vector<int> w;
    auto try_add = [&](int r) {
      // Rows entering on a strictly blocking step are independent of the
      // working set by construction; equality seeding still needs the check.
      Mat a(static_cast<int>(w.size()) + 1, n_);
      for (size_t i = 0; i < w.size(); ++i) a.row(static_cast<int>(i)) = rows_[w[i]].a;
      a.row(static_cast<int>(w.size())) = rows_[r].a;
      Eigen::FullPivLU<Mat> lu(a);
      if (lu.rank() < a.rows()) return false;
      w.push_back(r);
      in_w[r] = 1;
      return true;
    };
    for (int r = 0; r < m; ++r)
      if (rows_[r].equality) try_add(r);
    for (int r = 0; r < m; ++r)
      if (!rows_[r].equality && activity(r) <= 1e-9) try_add(r);

    const int max_iters = 100 * (n_ + m + 1);
    int zero_steps = 0;
    Vec duals_w;
    for (int iter = 0; iter < max_iters; ++iter) {
      ++sol.iterations;
      Vec grad = gradient();
      Vec p;
      bool singular = !solve_eqp(w, grad, &p, &duals_w);
      if (singular) {
        // Objective is linear along eta and no working row pins it: walk the
        // eta ray until a cut blocks.
        Vec d = Vec::Zero(n_);
        d[n_ - 1] = -1.0;
        int block = blocking_row(d, in_w, nullptr);
        if (block < 0)
          throw SolverError("master QP unbounded: no optimality cut bounds eta");
        v_ += step_to(block, d) * d;
        try_add(block);
        continue;
      }
      if (p.lpNorm<Eigen::Infinity>() <= 1e-11) {
        const bool bland = zero_steps > 50;
        int worst = -1;
        double worst_val = -1e-9;
        for (size_t i = 0; i < w.size(); ++i) {
          if (rows_[w[i]].equality) continue;
          double lam = duals_w[static_cast<int>(i)];
          if (lam >= -1e-9) continue;
          if (bland) {
            if (worst < 0 || w[i] < w[worst]) worst = static_cast<int>(i);
          } else if (lam < worst_val) {
            worst_val = lam;
            worst = static_cast<int>(i);
          }
        }
        if (worst < 0) {
          finish(&sol, w, duals_w);
          return sol;
        }
        in_w[w[worst]] = 0;
        w.erase(w.begin() + worst);
        ++zero_steps;
        continue;
      }
      double alpha = 1.0;
      int block = blocking_row(p, in_w, &alpha);
      v_ += alpha * p;
      if (block >= 0) {
        try_add(block);
        if (alpha <= 1e-12) ++zero_steps;
        else zero_steps = 0;
      } else {
        zero_steps = 0;
      }
    }
    throw SolverError("QP active set failed to converge");
  }

 private:
  bool feasible(const Vec& v, double tol) const {
    for (const auto& r : rows_) {
      double act = r.a.dot(v) - r.b;
      if (r.equality ? std::abs(act) > tol : act < -tol) return false;
    }
    return true;
  }

  double activity(int r) const { return rows_[r].a.dot(v_) - rows_[r].b; }

  Vec gradient() const {
    Vec g = Vec::Zero(n_);
    for (int i = 0; i < qp_.dim_x; ++i)
      g[i] = qp_.linear[i] + h_[i] * (v_[i] - qp_.center[i]);
    if (qp_.has_eta) g[n_ - 1] = 1.0;
    return g;
  }

  double objective() const {
    double val = 0.0;
    for (int i = 0; i < qp_.dim_x; ++i) {
      double d = v_[i] - qp_.center[i];
      val += qp_.linear[i] * v_[i] + 0.5 * h_[i] * d * d;
    }
    if (qp_.has_eta) val += v_[n_ - 1];
    return val;
  }

  // Equality-constrained step: min 1/2 p'Hp + grad'p s.t. A_w p = 0.
  // Returns false when the KKT system is singular (free eta direction).
  // Multipliers come back with the sign convention grad(f) = A_w' lambda.
  bool solve_eqp(const std::vector<int>& w, const Vec& grad, Vec* p, Vec* lambda) {
    const int k = static_cast<int>(w.size());
    Mat kkt = Mat::Zero(n_ + k, n_ + k);
    for (int i = 0; i < n_; ++i) kkt(i, i) = h_[i];
    for (int i = 0; i < k; ++i) {
      kkt.block(n_ + i, 0, 1, n_) = rows_[w[i]].a.transpose();
      kkt.block(0, n_ + i, n_, 1) = rows_[w[i]].a;
    }
    Eigen::FullPivLU<Mat> lu(kkt);
    if (lu.rank() < n_ + k) return false;
    Vec rhs = Vec::Zero(n_ + k);
    rhs.head(n_) = -grad;
    Vec sol = lu.solve(rhs);
    *p = sol.head(n_);
    *lambda = -sol.tail(k);
    return true;
  }

  // First inactive row blocked by direction d; alpha (if given) is capped at
  // its current value. Deterministic: smallest step, ties to lowest row index.
  int blocking_row(const Vec& d, const std::vector<char>& in_w, double* alpha) const {
    double best = alpha ? *alpha : kInf;
    int block = -1;
    for (size_t r = 0; r < rows_.size(); ++r) {
      if (in_w[r] || rows_[r].equality) continue;
      double ad = rows_[r].a.dot(d);
      if (ad >= -1e-12) continue;
      double step = (rows_[r].b - rows_[r].a.dot(v_)) / ad;
      if (step < 0.0) step = 0.0;
      // Strict improvement keeps the lowest row index on ties.
      if (step < best - 1e-12) {
        best = step;
        block = static_cast<int>(r);
      }
    }
    if (alpha) *alpha = best;
    return block;
  }

  double step_to(int r, const Vec& d) const {
    double ad = rows_[r].a.dot(d);
    double step = (rows_[r].b - rows_[r].a.dot(v_)) / ad;
    return std::max(step, 0.0);
  }

  bool phase1(QpSolution* sol) {
    LinearProgram lp;
    lp.c = Vec::Zero(n_);
    lp.lo = qp_.lo;
    lp.hi = qp_.hi;
    int n_eq = 0, n_ge = 0;
    for (const auto& r : rows_) {
      if (r.source < 0) continue;  // bounds already in lo/hi
      (r.equality ? n_eq : n_ge)++;
    }
    lp.a_eq = Mat::Zero(n_eq, n_);
    lp.b_eq = Vec::Zero(n_eq);
    lp.a_ge = Mat::Zero(n_ge, n_);
    lp.b_ge = Vec::Zero(n_ge);
    int ie = 0, ig = 0;
    for (const auto& r : rows_) {
      if (r.source < 0) continue;
      if (r.equality) {
        lp.a_eq.row(ie) = r.a;
        lp.b_eq[ie++] = r.b;
      } else {
        lp.a_ge.row(ig) = r.a;
        lp.b_ge[ig++] = r.b;
      }
    }
    LpSolution start = solve_lp(lp);
    if (start.status != LpStatus::kOptimal) {
      sol->status = QpStatus::kInfeasible;
      return false;
    }
    v_ = start.x;
    return true;
  }

  void finish(QpSolution* sol, const std::vector<int>& w, const Vec& duals_w) {
    sol->status = QpStatus::kOptimal;
    sol->x = v_.head(qp_.dim_x);
    sol->eta = qp_.has_eta ? v_[n_ - 1] : 0.0;
    sol->objective = objective();
    sol->row_duals = Vec::Zero(static_cast<int>(qp_.rows.size()));
    for (size_t i = 0; i < w.size(); ++i) {
      const NormRow& r = rows_[w[i]];
      if (r.source >= 0) sol->row_duals[r.source] = r.sign * duals_w[static_cast<int>(i)];
    }
    // KKT residuals over the original formulation.
    Vec grad = gradient();
    Vec station = grad;
    for (size_t i = 0; i < w.size(); ++i)
      station -= duals_w[static_cast<int>(i)] * rows_[w[i]].a;
    sol->kkt.stationarity = station.lpNorm<Eigen::Infinity>();
    double primal = 0.0, comp = 0.0, dual = 0.0;
    for (size_t r = 0; r < rows_.size(); ++r) {
      double act = rows_[r].a.dot(v_) - rows_[r].b;
      if (rows_[r].equality) {
        primal = std::max(primal, std::abs(act));
      } else {
        primal = std::max(primal, std::max(0.0, -act));
      }
    }
    for (size_t i = 0; i < w.size(); ++i) {
      const NormRow& r = rows_[w[i]];
      double lam = duals_w[static_cast<int>(i)];
      if (!r.equality) {
        dual = std::max(dual, std::max(0.0, -lam));
        comp = std::max(comp, std::abs(lam * (r.a.dot(v_) - r.b)));
      }
    }
    sol->kkt.primal = primal;
    sol->kkt.dual = dual;
    sol->kkt.complementarity = comp;
  }

  const QuadraticProgram& qp_;
  int n_;
  Vec h_;
  std::vector<NormRow> rows_;
  Vec v_;
  bool have_start_ = false;
};

}  // namespace

QpSolution solve_qp(const QuadraticProgram& qp, const Vec* warm) {
  qp.check();
  ActiveSetQp solver(qp, warm);
  return solver.run();
}

}  // namespace maro

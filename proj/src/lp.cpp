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

#include "maro/lp.hpp"

#include <Eigen/LU>
#include <charconv>
#include <cstdlib>
#include <cstdio>
#include <sstream>
#include <vector>

#include "nlohmann/json.hpp"

namespace maro {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void LinearProgram::check() const {
  const int n = num_vars();
  auto fail = [](const std::string& msg) { throw ValidationError("LinearProgram: " + msg); };
  if (lo.size() != n || hi.size() != n) fail("bound vectors do not match variable count");
  for (int j = 0; j < n; ++j)
    if (lo[j] > hi[j]) fail("lo > hi at variable " + std::to_string(j));
  if (a_eq.size() > 0 && a_eq.cols() != n) fail("a_eq column count mismatch");
  if (a_ge.size() > 0 && a_ge.cols() != n) fail("a_ge column count mismatch");
  if (a_eq.rows() != b_eq.size()) fail("a_eq/b_eq row mismatch");
  if (a_ge.rows() != b_ge.size()) fail("a_ge/b_ge row mismatch");
}

namespace {

enum class VarState : unsigned char { kBasic, kAtLo, kAtUp, kAtZero };

// Bounded-variable revised simplex over  min c'x : A x = b, lo <= x <= hi,
// with a product-form basis inverse (LU factor plus an eta file).
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opts) : opts_(opts) {
    const int n0 = lp.num_vars();
    const int m_eq = lp.num_eq();
    const int m_ge = lp.num_ge();
    m_ = m_eq + m_ge;
    n_struct_ = n0 + m_ge;           // original + surplus
    n_ = n_struct_ + m_;             // + artificials

    a_ = Mat::Zero(m_, n_);
    if (m_eq > 0) a_.block(0, 0, m_eq, n0) = lp.a_eq;
    if (m_ge > 0) a_.block(m_eq, 0, m_ge, n0) = lp.a_ge;
    for (int i = 0; i < m_ge; ++i) a_(m_eq + i, n0 + i) = -1.0;  // surplus
    b_ = Vec::Zero(m_);
    if (m_eq > 0) b_.head(m_eq) = lp.b_eq;
    if (m_ge > 0) b_.tail(m_ge) = lp.b_ge;

    // Row equilibration. Duals are rescaled on extraction.
    row_scale_ = Vec::Ones(m_);
    for (int i = 0; i < m_; ++i) {
      double nrm = a_.row(i).head(n_struct_).cwiseAbs().maxCoeff();
      if (nrm > 0.0) {
        row_scale_[i] = 1.0 / nrm;
        a_.row(i) *= row_scale_[i];
        b_[i] *= row_scale_[i];
      }
    }
    for (int i = 0; i < m_; ++i) a_(i, n_struct_ + i) = 1.0;  // artificial columns

    lo_ = Vec::Constant(n_, 0.0);
    hi_ = Vec::Constant(n_, 0.0);
    lo_.head(n0) = lp.lo;
    hi_.head(n0) = lp.hi;
    for (int i = 0; i < m_ge; ++i) {
      lo_[n0 + i] = 0.0;
      hi_[n0 + i] = kInf;
    }
    cost_ = Vec::Zero(n_);
    cost_.head(n0) = lp.c;

    x_ = Vec::Zero(n_);
    state_.assign(n_, VarState::kAtZero);
    for (int j = 0; j < n_struct_; ++j) {
      if (std::isfinite(lo_[j])) {
        state_[j] = VarState::kAtLo;
        x_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        state_[j] = VarState::kAtUp;
        x_[j] = hi_[j];
      } else {
        state_[j] = VarState::kAtZero;
        x_[j] = 0.0;
      }
    }

    // Start from the all-artificial basis; signs make the residual feasible.
    Vec res = b_;
    for (int j = 0; j < n_struct_; ++j)
      if (x_[j] != 0.0) res -= a_.col(j) * x_[j];
    basis_.resize(m_);
    phase1_cost_ = Vec::Zero(n_);
    for (int i = 0; i < m_; ++i) {
      int j = n_struct_ + i;
      basis_[i] = j;
      state_[j] = VarState::kBasic;
      if (res[i] >= 0.0) {
        lo_[j] = 0.0;
        hi_[j] = kInf;
        phase1_cost_[j] = 1.0;
      } else {
        lo_[j] = -kInf;
        hi_[j] = 0.0;
        phase1_cost_[j] = -1.0;
      }
      x_[j] = res[i];
    }
    max_iters_ = opts.max_iters > 0 ? opts.max_iters : 5000 + 200 * (m_ + n_);
  }

  // Relative residual of the current point: structural bound violations plus
  // per-row defects (any leftover artificial activity shows up there).
  double primal_infeasibility() {
    refactorize();  // fresh factorization and basic values
    double viol = 0.0;
    for (int j = 0; j < n_struct_; ++j) {
      if (std::isfinite(lo_[j]))
        viol = std::max(viol, (lo_[j] - x_[j]) / (1.0 + std::abs(lo_[j])));
      if (std::isfinite(hi_[j]))
        viol = std::max(viol, (x_[j] - hi_[j]) / (1.0 + std::abs(hi_[j])));
    }
    Vec res = b_;
    for (int j = 0; j < n_struct_; ++j)
      if (x_[j] != 0.0) res -= a_.col(j) * x_[j];
    for (int i = 0; i < m_; ++i)
      viol = std::max(viol, std::abs(res[i]) / (1.0 + std::abs(b_[i])));
    return viol;
  }

  LpSolution run(const LinearProgram& lp) {
    LpSolution sol;
    refactorize();

    // Phase 1: drive artificial activity to zero. Residuals count relative
    // to their own row's right-hand side.
    solve_phase(phase1_cost_, /*phase1=*/true);
    double infeas = 0.0;
    for (int j = n_struct_; j < n_; ++j)
      infeas = std::max(infeas, std::abs(x_[j]) / (1.0 + std::abs(b_[j - n_struct_])));
    if (infeas > 1e-7) {
      sol.status = LpStatus::kInfeasible;
      sol.iterations = iterations_;
      Vec y = btran_costs(phase1_cost_);
      sol.farkas = unscale_duals(y);
      return sol;
    }

    // Pin artificials so phase 2 cannot reuse them.
    for (int j = n_struct_; j < n_; ++j) {
      lo_[j] = 0.0;
      hi_[j] = 0.0;
      if (state_[j] != VarState::kBasic) {
        x_[j] = 0.0;
        state_[j] = VarState::kAtLo;
      }
    }

    bool bounded = solve_phase(cost_, /*phase1=*/false);
    sol.iterations = iterations_;
    if (!bounded) {
      sol.status = LpStatus::kUnbounded;
      sol.ray = ray_.head(lp.num_vars());
      sol.x = x_.head(lp.num_vars());
      return sol;
    }
    final_violation_ = primal_infeasibility();
    sol.status = LpStatus::kOptimal;
    sol.x = x_.head(lp.num_vars());
    sol.objective = lp.c.size() ? lp.c.dot(sol.x) : 0.0;
    Vec y = unscale_duals(btran_costs(cost_));
    sol.dual_eq = y.head(lp.num_eq());
    sol.dual_ge = y.tail(lp.num_ge());
    return sol;
  }

  double final_violation() const { return final_violation_; }

 private:
  // --- basis inverse -------------------------------------------------------

  struct Eta {
    int row;
    Vec col;  // pivot column in the basis frame
  };

  void refactorize() {
    Mat bmat(m_, m_);
    for (int i = 0; i < m_; ++i) bmat.col(i) = a_.col(basis_[i]);
    lu_.compute(bmat);
    etas_.clear();
    recompute_basics();
  }

  void recompute_basics() {
    Vec rhs = b_;
    for (int j = 0; j < n_; ++j)
      if (state_[j] != VarState::kBasic && x_[j] != 0.0) rhs -= a_.col(j) * x_[j];
    Vec xb = ftran(rhs);
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
  }

  Vec ftran(const Vec& v) const {
    Vec z = lu_.solve(v);
    for (const Eta& e : etas_) {
      double zr = z[e.row] / e.col[e.row];
      z -= e.col * zr;
      z[e.row] = zr;
    }
    return z;
  }

  Vec btran(const Vec& v) const {
    Vec z = v;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const Eta& e = *it;
      double acc = z[e.row];
      for (int i = 0; i < m_; ++i)
        if (i != e.row) acc -= e.col[i] * z[i];
      z[e.row] = acc / e.col[e.row];
    }
    return lu_.transpose().solve(z);
  }

  Vec btran_costs(const Vec& costs) const {
    Vec cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = costs[basis_[i]];
    return btran(cb);
  }

  Vec unscale_duals(const Vec& y) const { return y.cwiseProduct(row_scale_); }

  // --- iteration -----------------------------------------------------------

  // Returns false iff unbounded. Throws SolverError on a stall.
  bool solve_phase(const Vec& costs, bool phase1) {
    bool bland = false;
    int degenerate_run = 0;
    while (true) {
      if (++iterations_ > max_iters_)
        throw SolverError("simplex stall: iteration cap exceeded (" +
                          std::to_string(max_iters_) + ")");
      Vec y = btran_costs(costs);
      int q = -1;
      double best = 0.0;
      int dir = +1;
      for (int j = 0; j < n_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        if (lo_[j] == hi_[j]) continue;  // pinned
        double dj = costs[j] - y.dot(a_.col(j));
        double viol = 0.0;
        int d = 0;
        if (state_[j] == VarState::kAtLo && dj < -opts_.pivot_tol) {
          viol = -dj;
          d = +1;
        } else if (state_[j] == VarState::kAtUp && dj > opts_.pivot_tol) {
          viol = dj;
          d = -1;
        } else if (state_[j] == VarState::kAtZero && std::abs(dj) > opts_.pivot_tol) {
          viol = std::abs(dj);
          d = dj < 0 ? +1 : -1;
        }
        if (d == 0) continue;
        if (bland) {
          q = j;
          dir = d;
          break;
        }
        if (viol > best + 1e-15) {
          best = viol;
          q = j;
          dir = d;
        }
      }
      if (q < 0) return true;  // optimal for this phase

      Vec w = ftran(a_.col(q));
      // Two-pass (Harris) ratio test: entering moves by step*dir, basics by
      // -dir*w. Pass one sets the largest step every bound tolerates with a
      // small slack; pass two picks the largest pivot within it. Tiny pivots
      // otherwise breed near-singular bases.
      double step = hi_[q] - lo_[q];  // own range, may be inf
      int block = -1;                 // basis position that blocks
      int block_side = 0;             // -1: leaving at lo, +1: leaving at hi
      double alpha_max = step;
      for (int i = 0; i < m_; ++i) {
        double wi = dir * w[i];
        int j = basis_[i];
        if (wi > opts_.pivot_tol && std::isfinite(lo_[j])) {
          double slack = 1e-9 * (1.0 + std::abs(lo_[j]));
          alpha_max = std::min(alpha_max, (x_[j] - lo_[j] + slack) / wi);
        } else if (wi < -opts_.pivot_tol && std::isfinite(hi_[j])) {
          double slack = 1e-9 * (1.0 + std::abs(hi_[j]));
          alpha_max = std::min(alpha_max, (hi_[j] - x_[j] + slack) / (-wi));
        }
      }
      if (std::isfinite(alpha_max)) {
        double best_pivot = 0.0;
        for (int i = 0; i < m_; ++i) {
          double wi = dir * w[i];
          int j = basis_[i];
          double cand;
          int side;
          if (wi > opts_.pivot_tol && std::isfinite(lo_[j])) {
            cand = (x_[j] - lo_[j]) / wi;
            side = -1;
          } else if (wi < -opts_.pivot_tol && std::isfinite(hi_[j])) {
            cand = (hi_[j] - x_[j]) / (-wi);
            side = +1;
          } else {
            continue;
          }
          if (cand < 0.0) cand = 0.0;
          if (cand > alpha_max) continue;
          bool take;
          if (bland) {
            // Exact smallest ratio, lowest variable index: anti-cycling.
            take = block < 0 || cand < step - 1e-12 ||
                   (cand <= step + 1e-12 && basis_[i] < basis_[block]);
          } else {
            take = block < 0 || std::abs(w[i]) > best_pivot;
          }
          if (take) {
            step = cand;
            block = i;
            block_side = side;
            best_pivot = std::abs(w[i]);
          }
        }
        if (block >= 0) step = std::max(0.0, std::min(step, alpha_max));
      }

      if (!std::isfinite(step)) {
        if (phase1) throw SolverError("simplex: unbounded phase-1 subproblem");
        ray_ = Vec::Zero(n_);
        ray_[q] = dir;
        for (int i = 0; i < m_; ++i) ray_[basis_[i]] = -dir * w[i];
        return false;
      }

      if (step <= 1e-12) {
        if (++degenerate_run > opts_.degeneracy_limit) bland = true;
      } else {
        degenerate_run = 0;
      }

      if (block < 0) {
        // Bound flip: the entering variable crosses its whole range.
        x_[q] += dir * step;
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * step * w[i];
        state_[q] = dir > 0 ? VarState::kAtUp : VarState::kAtLo;
        continue;
      }

      // Pivot q in, basis_[block] out.
      int leave = basis_[block];
      x_[q] += dir * step;
      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * step * w[i];
      x_[leave] = block_side < 0 ? lo_[leave] : hi_[leave];
      state_[leave] = block_side < 0 ? VarState::kAtLo : VarState::kAtUp;
      state_[q] = VarState::kBasic;
      basis_[block] = q;
      etas_.push_back({block, w});
      // Small pivots poison the eta file; rebuild the factorization early.
      if (static_cast<int>(etas_.size()) >= opts_.refactor_every ||
          std::abs(w[block]) < 1e-6)
        refactorize();
    }
  }

  SimplexOptions opts_;
  int m_ = 0, n_ = 0, n_struct_ = 0;
  Mat a_;
  Vec b_, lo_, hi_, cost_, phase1_cost_, x_, row_scale_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  Eigen::PartialPivLU<Mat> lu_;
  std::vector<Eta> etas_;
  Vec ray_;
  int iterations_ = 0;
  int max_iters_ = 0;
  double final_violation_ = 0.0;
};

// Bound-only problems need no basis machinery.
LpSolution solve_boxed(const LinearProgram& lp) {
  LpSolution sol;
  const int n = lp.num_vars();
  sol.x = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    double cj = lp.c[j];
    if (cj > 0.0) {
      if (!std::isfinite(lp.lo[j])) {
        sol.status = LpStatus::kUnbounded;
        sol.ray = Vec::Zero(n);
        sol.ray[j] = -1.0;
        return sol;
      }
      sol.x[j] = lp.lo[j];
    } else if (cj < 0.0) {
      if (!std::isfinite(lp.hi[j])) {
        sol.status = LpStatus::kUnbounded;
        sol.ray = Vec::Zero(n);
        sol.ray[j] = 1.0;
        return sol;
      }
      sol.x[j] = lp.hi[j];
    } else {
      sol.x[j] = std::isfinite(lp.lo[j]) ? lp.lo[j] : (std::isfinite(lp.hi[j]) ? lp.hi[j] : 0.0);
    }
  }
  sol.status = LpStatus::kOptimal;
  sol.objective = n ? lp.c.dot(sol.x) : 0.0;
  return sol;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  lp.check();
  if (lp.num_eq() + lp.num_ge() == 0) return solve_boxed(lp);
  Simplex simplex(lp, opts);
  LpSolution sol = simplex.run(lp);
  if (sol.status == LpStatus::kOptimal && simplex.final_violation() > 1e-7) {
    // Numerical drift (typically big-M rows plus tiny pivots): redo the solve
    // with aggressive refactorization and Bland's rule from the start.
    SimplexOptions safe = opts;
    safe.refactor_every = 8;
    safe.degeneracy_limit = 0;
    Simplex retry(lp, safe);
    sol = retry.run(lp);
    if (sol.status == LpStatus::kOptimal && retry.final_violation() > 1e-6) {
      std::ostringstream os;
      os << "simplex: solution failed the residual check twice (violation "
         << retry.final_violation() << ", " << (lp.num_eq() + lp.num_ge())
         << " rows, " << lp.num_vars() << " vars)";
      if (const char* dir = std::getenv("MARO_DUMP_BAD_LP")) {
        std::string path = std::string(dir) + "/bad_lp.json";
        FILE* f = std::fopen(path.c_str(), "w");
        if (f) {
          std::string text = lp_to_json(lp);
          std::fwrite(text.data(), 1, text.size(), f);
          std::fclose(f);
          os << "; dumped to " << path;
        }
      }
      throw SolverError(os.str());
    }
  }
  return sol;
}

std::string lp_to_json(const LinearProgram& lp) {
  nlohmann::ordered_json j;
  auto mat = [](const Mat& m) {
    nlohmann::ordered_json out;
    out["rows"] = m.rows();
    out["cols"] = m.cols();
    auto trips = nlohmann::ordered_json::array();
    for (int i = 0; i < m.rows(); ++i)
      for (int k = 0; k < m.cols(); ++k)
        if (m(i, k) != 0.0) trips.push_back({i, k, m(i, k)});
    out["triplets"] = trips;
    return out;
  };
  auto vec = [](const Vec& v) {
    auto arr = nlohmann::ordered_json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
  };
  j["c"] = vec(lp.c);
  j["a_eq"] = mat(lp.a_eq);
  j["b_eq"] = vec(lp.b_eq);
  j["a_ge"] = mat(lp.a_ge);
  j["b_ge"] = vec(lp.b_ge);
  j["lo"] = vec(lp.lo);
  j["hi"] = vec(lp.hi);
  return j.dump(2);
}

}  // namespace maro

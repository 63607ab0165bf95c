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

#ifndef MARO_TYPES_HPP_
#define MARO_TYPES_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace maro {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (bad JSON, schema violation).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally inconsistent problem data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numerical kernel failed (stall, node limit, corrupted cut pool).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Closed interval, used for big-M range estimation. Infinite endpoints allowed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double v) { return {v, v}; }
  static Interval everything() { return {-kInf, kInf}; }

  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }

  Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }
  Interval operator-(const Interval& o) const { return {lo - o.hi, hi - o.lo}; }
  Interval& operator+=(const Interval& o) {
    *this = *this + o;
    return *this;
  }
  // Scaling flips the endpoints for negative factors; 0 * inf is pinned to 0.
  Interval scaled(double a) const {
    if (a == 0.0) return {0.0, 0.0};
    if (a > 0.0) return {a * lo, a * hi};
    return {a * hi, a * lo};
  }
  static Interval product(const Interval& a, const Interval& b) {
    double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    for (double& v : c)
      if (std::isnan(v)) v = 0.0;  // 0 * inf
    return {std::min(std::min(c[0], c[1]), std::min(c[2], c[3])),
            std::max(std::max(c[0], c[1]), std::max(c[2], c[3]))};
  }
  double width() const { return hi - lo; }
  double abs_max() const { return std::max(std::abs(lo), std::abs(hi)); }
};

/// Deterministic random source. Raw mt19937_64 draws are mapped to doubles by
/// hand so sequences do not depend on the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // xorshift* generator; small, fast, reproducible everywhere.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [a, b] inclusive.
  int uniform_int(int a, int b) {
    return a + static_cast<int>(next_u64() % static_cast<std::uint64_t>(b - a + 1));
  }

  /// Standard normal via Box-Muller on the raw uniform.
  double normal() {
    double u1 = std::max(uniform(), 1e-300);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  Vec unit_vector(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    double nrm = v.norm();
    if (nrm < 1e-12) {
      v.setZero();
      v[0] = 1.0;
      return v;
    }
    return v / nrm;
  }

 private:
  std::uint64_t state_;
};

/// Shortest decimal string that round-trips to the same double. Used for
/// canonical JSON and CSV output.
std::string format_double(double v);

}  // namespace maro

#endif  // MARO_TYPES_HPP_

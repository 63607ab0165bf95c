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

#include "maro/model.hpp"

#include <algorithm>
#include <sstream>

#include "maro/lp.hpp"
#include "nlohmann/json.hpp"

namespace maro {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

bool Polytope::contains(const Vec& u, double tol) const {
  if (u.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (u[i] < lo[i] - tol || u[i] > hi[i] + tol) return false;
  if (num_rows() > 0) {
    Vec slack = e - d * u;
    if (slack.minCoeff() < -tol) return false;
  }
  return true;
}

void Polytope::stacked(Mat* a, Vec* b) const {
  const int n = dim();
  const int md = num_rows();
  a->setZero(md + 2 * n, n);
  b->resize(md + 2 * n);
  if (md > 0) {
    a->topRows(md) = d;
    b->head(md) = e;
  }
  for (int i = 0; i < n; ++i) {
    (*a)(md + i, i) = 1.0;
    (*b)[md + i] = hi[i];
    (*a)(md + n + i, i) = -1.0;
    (*b)[md + n + i] = -lo[i];
  }
}

int Instance::total_nu() const {
  int n = 0;
  for (const auto& st : stages) n += st.n_u;
  return n;
}

int Instance::u_offset(int t) const {
  int off = 0;
  for (int i = 0; i + 1 < t; ++i) off += stages[i].n_u;
  return off;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& f : findings) os << f.where << ": " << f.message << "\n";
  return os.str();
}

namespace {

void check_block(ValidationReport* rep, const std::string& where, const Mat& m,
                 int rows, int cols) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    rep->findings.push_back({where, os.str()});
  }
}

std::string stage_label(int t, const char* block) {
  return "stage " + std::to_string(t) + " / " + block;
}

}  // namespace

namespace {

ValidationReport structural_findings(const Instance& inst) {
  ValidationReport rep;
  if (static_cast<int>(inst.stages.size()) != inst.horizon)
    rep.findings.push_back({"stages", "stage count does not match T"});
  if (inst.c.size() != inst.n_x)
    rep.findings.push_back({"c", "length does not match n_x"});
  if (inst.x_bounds.lo.size() != inst.n_x || inst.x_bounds.hi.size() != inst.n_x)
    rep.findings.push_back({"x_bounds", "bound lengths do not match n_x"});
  else
    for (int i = 0; i < inst.n_x; ++i)
      if (inst.x_bounds.lo[i] > inst.x_bounds.hi[i])
        rep.findings.push_back({"x_bounds", "lo > hi at coordinate " + std::to_string(i)});
  for (const auto& row : inst.x_bounds.rows)
    if (row.coeffs.size() != inst.n_x)
      rep.findings.push_back({"x_bounds/rows", "coefficient length does not match n_x"});

  int prev_ns = static_cast<int>(inst.s0.size());
  for (const auto& st : inst.stages) {
    const int me = st.num_eq();
    const int mi = st.num_ge();
    check_block(&rep, stage_label(st.t, "Tt"), st.t_mat, me, inst.n_x);
    check_block(&rep, stage_label(st.t, "At"), st.a_mat, me, st.n_s);
    check_block(&rep, stage_label(st.t, "Bt"), st.b_mat, me, prev_ns);
    check_block(&rep, stage_label(st.t, "Wt"), st.w_mat, me, st.n_y);
    check_block(&rep, stage_label(st.t, "Ht"), st.h_mat, me, st.n_u);
    check_block(&rep, stage_label(st.t, "Lt"), st.l_mat, mi, inst.n_x);
    check_block(&rep, stage_label(st.t, "Et"), st.e_mat, mi, st.n_s);
    check_block(&rep, stage_label(st.t, "Gt"), st.g_mat, mi, st.n_y);
    check_block(&rep, stage_label(st.t, "Mt"), st.m_mat, mi, st.n_u);
    if (st.d.size() != st.n_s)
      rep.findings.push_back({stage_label(st.t, "dt"), "length does not match n_s"});
    if (st.f.size() != st.n_y)
      rep.findings.push_back({stage_label(st.t, "ft"), "length does not match n_y"});
    prev_ns = st.n_s;
  }

  const Polytope& u = inst.u_set;
  if (u.dim() != inst.total_nu())
    rep.findings.push_back({"U", "dimension does not match sum of stage n_u"});
  if (u.hi.size() != u.dim())
    rep.findings.push_back({"U", "hi length does not match dim"});
  bool bounds_ok = u.lo.size() == u.dim() && u.hi.size() == u.dim();
  if (bounds_ok)
    for (int i = 0; i < u.dim(); ++i) {
      if (!std::isfinite(u.lo[i]) || !std::isfinite(u.hi[i])) {
        rep.findings.push_back({"U", "bounds must be finite (coordinate " +
                                        std::to_string(i) + ")"});
        bounds_ok = false;
      }
      if (u.lo[i] > u.hi[i]) {
        rep.findings.push_back(
            {"U", "infeasible: lo > hi at coordinate " + std::to_string(i)});
        bounds_ok = false;
      }
    }
  if (u.num_rows() > 0 &&
      (u.d.cols() != u.dim() || u.e.size() != u.num_rows()))
    rep.findings.push_back({"U", "D/e dimensions inconsistent"});
  return rep;
}

}  // namespace

ValidationReport validate(const Instance& inst) {
  ValidationReport rep = structural_findings(inst);
  // One LP feasibility solve certifies nonemptiness of U.
  const Polytope& u = inst.u_set;
  if (rep.ok() && u.dim() > 0) {
    LinearProgram fp;
    fp.c = Vec::Zero(u.dim());
    fp.lo = u.lo;
    fp.hi = u.hi;
    if (u.num_rows() > 0) {
      fp.a_ge = -u.d;
      fp.b_ge = -u.e;
    }
    if (solve_lp(fp).status != LpStatus::kOptimal)
      rep.findings.push_back({"U", "infeasible: D u <= e cuts off the whole box"});
  }
  return rep;
}

// --- JSON ------------------------------------------------------------------

namespace {

Vec parse_vec(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected array");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(path + "[" + std::to_string(i) + "]: expected number");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

Vec parse_vec_opt(const json& parent, const char* key, int dim, const std::string& path) {
  if (!parent.contains(key)) return Vec::Zero(dim);
  Vec v = parse_vec(parent[key], path + "/" + key);
  if (v.size() != dim)
    throw ParseError(path + "/" + key + ": expected length " + std::to_string(dim));
  return v;
}

Mat parse_mat(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols"))
    throw ParseError(path + ": expected {rows, cols, triplets}");
  int rows = j["rows"].get<int>();
  int cols = j["cols"].get<int>();
  if (rows < 0 || cols < 0) throw ParseError(path + ": negative dimension");
  Mat m = Mat::Zero(rows, cols);
  if (j.contains("triplets")) {
    const json& trips = j["triplets"];
    if (!trips.is_array()) throw ParseError(path + "/triplets: expected array");
    for (size_t k = 0; k < trips.size(); ++k) {
      const json& t = trips[k];
      if (!t.is_array() || t.size() != 3)
        throw ParseError(path + "/triplets[" + std::to_string(k) + "]: expected [i, j, v]");
      int i = t[0].get<int>();
      int c = t[1].get<int>();
      if (i < 0 || i >= rows || c < 0 || c >= cols)
        throw ParseError(path + "/triplets[" + std::to_string(k) + "]: index out of range");
      m(i, c) = t[2].get<double>();
    }
  }
  return m;
}

// Absent matrices are zero blocks of conforming size.
Mat parse_mat_opt(const json& parent, const char* key, int rows, int cols,
                  const std::string& path) {
  if (!parent.contains(key)) return Mat::Zero(rows, cols);
  Mat m = parse_mat(parent[key], path + "/" + key);
  return m;  // dimension conformance is left to validate()
}

ojson mat_json(const Mat& m) {
  ojson out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  auto trips = ojson::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) trips.push_back({i, j, m(i, j)});
  out["triplets"] = trips;
  return out;
}

ojson vec_json(const Vec& v) {
  auto arr = ojson::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

Instance load_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("instance document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance document: expected object");
  for (const char* key : {"T", "stages", "U"})
    if (!doc.contains(key)) throw ParseError(std::string("/") + key + ": missing");

  Instance inst;
  inst.horizon = doc["T"].get<int>();
  if (inst.horizon < 1) throw ParseError("/T: must be >= 1");
  inst.n_x = doc.value("n_x", 0);
  if (inst.n_x < 0) throw ParseError("/n_x: must be >= 0");
  inst.c = parse_vec_opt(doc, "c", inst.n_x, "");
  inst.s0 = doc.contains("s0") ? parse_vec(doc["s0"], "/s0") : Vec(0);

  if (doc.contains("x_bounds")) {
    const json& xb = doc["x_bounds"];
    inst.x_bounds.lo = xb.contains("lo") ? parse_vec(xb["lo"], "/x_bounds/lo")
                                         : Vec::Constant(inst.n_x, -kInf);
    inst.x_bounds.hi = xb.contains("hi") ? parse_vec(xb["hi"], "/x_bounds/hi")
                                         : Vec::Constant(inst.n_x, kInf);
    if (xb.contains("rows")) {
      for (size_t r = 0; r < xb["rows"].size(); ++r) {
        const json& row = xb["rows"][r];
        std::string path = "/x_bounds/rows[" + std::to_string(r) + "]";
        Instance::LinearRow lr;
        lr.coeffs = parse_vec(row.at("coeffs"), path + "/coeffs");
        lr.rhs = row.at("rhs").get<double>();
        std::string sense = row.at("sense").get<std::string>();
        if (sense == "<=") lr.sense = '<';
        else if (sense == ">=") lr.sense = '>';
        else if (sense == "=") lr.sense = '=';
        else throw ParseError(path + "/sense: expected \"<=\", \">=\" or \"=\"");
        inst.x_bounds.rows.push_back(std::move(lr));
      }
    }
  } else {
    inst.x_bounds.lo = Vec::Constant(inst.n_x, -kInf);
    inst.x_bounds.hi = Vec::Constant(inst.n_x, kInf);
  }

  const json& stages = doc["stages"];
  if (!stages.is_array()) throw ParseError("/stages: expected array");
  if (static_cast<int>(stages.size()) != inst.horizon)
    throw ParseError("/stages: length does not match T");
  int prev_ns = static_cast<int>(inst.s0.size());
  for (int t = 1; t <= inst.horizon; ++t) {
    const json& sj = stages[t - 1];
    std::string path = "/stages[" + std::to_string(t - 1) + "]";
    StageData st;
    st.t = t;
    st.n_s = sj.value("n_s", 0);
    st.n_y = sj.value("n_y", 0);
    st.n_u = sj.value("n_u", 0);
    if (st.n_s < 0 || st.n_y < 0 || st.n_u < 0)
      throw ParseError(path + ": negative dimension");

    // Equality row count: from h0 if present, else from any equality block.
    int me = -1;
    if (sj.contains("h0")) me = static_cast<int>(sj["h0"].size());
    for (const char* key : {"Tt", "At", "Bt", "Wt", "Ht"})
      if (me < 0 && sj.contains(key)) me = sj[key].value("rows", 0);
    if (me < 0) me = 0;
    int mi = -1;
    if (sj.contains("m0")) mi = static_cast<int>(sj["m0"].size());
    for (const char* key : {"Lt", "Et", "Gt", "Mt"})
      if (mi < 0 && sj.contains(key)) mi = sj[key].value("rows", 0);
    if (mi < 0) mi = 0;

    st.h0 = parse_vec_opt(sj, "h0", me, path);
    st.m0 = parse_vec_opt(sj, "m0", mi, path);
    st.t_mat = parse_mat_opt(sj, "Tt", me, inst.n_x, path);
    st.a_mat = parse_mat_opt(sj, "At", me, st.n_s, path);
    st.b_mat = parse_mat_opt(sj, "Bt", me, prev_ns, path);
    st.w_mat = parse_mat_opt(sj, "Wt", me, st.n_y, path);
    st.h_mat = parse_mat_opt(sj, "Ht", me, st.n_u, path);
    st.l_mat = parse_mat_opt(sj, "Lt", mi, inst.n_x, path);
    st.e_mat = parse_mat_opt(sj, "Et", mi, st.n_s, path);
    st.g_mat = parse_mat_opt(sj, "Gt", mi, st.n_y, path);
    st.m_mat = parse_mat_opt(sj, "Mt", mi, st.n_u, path);
    st.d = parse_vec_opt(sj, "dt", st.n_s, path);
    st.f = parse_vec_opt(sj, "ft", st.n_y, path);
    inst.stages.push_back(std::move(st));
    prev_ns = inst.stages.back().n_s;
  }

  const json& uj = doc["U"];
  int udim = uj.value("dim", -1);
  if (udim < 0) throw ParseError("/U/dim: missing or negative");
  inst.u_set.lo = parse_vec_opt(uj, "lo", udim, "/U");
  inst.u_set.hi = parse_vec_opt(uj, "hi", udim, "/U");
  if (uj.contains("lo") && static_cast<int>(uj["lo"].size()) != udim)
    throw ParseError("/U/lo: length does not match dim");
  if (uj.contains("hi") && static_cast<int>(uj["hi"].size()) != udim)
    throw ParseError("/U/hi: length does not match dim");
  if (uj.contains("D")) {
    inst.u_set.d = parse_mat(uj["D"], "/U/D");
    inst.u_set.e = uj.contains("e") ? parse_vec(uj["e"], "/U/e") : Vec::Zero(inst.u_set.d.rows());
  } else {
    inst.u_set.d = Mat::Zero(0, udim);
    inst.u_set.e = Vec(0);
  }

  // Dimension validation; report the first finding as an error.
  ValidationReport rep = structural_findings(inst);
  if (!rep.ok()) {
    const auto& f = rep.findings.front();
    throw ValidationError(f.where + ": " + f.message);
  }
  return inst;
}

std::string save_instance(const Instance& inst) {
  ojson doc;
  doc["T"] = inst.horizon;
  doc["n_x"] = inst.n_x;
  doc["c"] = vec_json(inst.c);
  doc["s0"] = vec_json(inst.s0);
  ojson xb;
  xb["lo"] = vec_json(inst.x_bounds.lo);
  xb["hi"] = vec_json(inst.x_bounds.hi);
  auto rows = ojson::array();
  for (const auto& r : inst.x_bounds.rows) {
    ojson row;
    row["coeffs"] = vec_json(r.coeffs);
    row["rhs"] = r.rhs;
    row["sense"] = r.sense == '<' ? "<=" : (r.sense == '>' ? ">=" : "=");
    rows.push_back(row);
  }
  xb["rows"] = rows;
  doc["x_bounds"] = xb;

  auto stages = ojson::array();
  for (const auto& st : inst.stages) {
    ojson sj;
    sj["n_s"] = st.n_s;
    sj["n_y"] = st.n_y;
    sj["n_u"] = st.n_u;
    sj["Tt"] = mat_json(st.t_mat);
    sj["At"] = mat_json(st.a_mat);
    sj["Bt"] = mat_json(st.b_mat);
    sj["Wt"] = mat_json(st.w_mat);
    sj["h0"] = vec_json(st.h0);
    sj["Ht"] = mat_json(st.h_mat);
    sj["Lt"] = mat_json(st.l_mat);
    sj["Et"] = mat_json(st.e_mat);
    sj["Gt"] = mat_json(st.g_mat);
    sj["m0"] = vec_json(st.m0);
    sj["Mt"] = mat_json(st.m_mat);
    sj["dt"] = vec_json(st.d);
    sj["ft"] = vec_json(st.f);
    stages.push_back(sj);
  }
  doc["stages"] = stages;

  ojson uj;
  uj["dim"] = inst.u_set.dim();
  uj["lo"] = vec_json(inst.u_set.lo);
  uj["hi"] = vec_json(inst.u_set.hi);
  uj["D"] = mat_json(inst.u_set.d);
  uj["e"] = vec_json(inst.u_set.e);
  doc["U"] = uj;
  return doc.dump(1);
}

}  // namespace maro

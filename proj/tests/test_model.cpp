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

#include <string>

#include "doctest.h"

using namespace maro;

namespace {

// Smallest well-formed document: T=1, one-dimensional x, s, y, u.
const char* kMinimalDoc = R"({
  "T": 1,
  "n_x": 1,
  "c": [1.0],
  "s0": [0.0],
  "x_bounds": {"lo": [0.0], "hi": [10.0], "rows": []},
  "stages": [{
    "n_s": 1, "n_y": 1, "n_u": 1,
    "At": {"rows": 1, "cols": 1, "triplets": [[0, 0, 1.0]]},
    "Bt": {"rows": 1, "cols": 1, "triplets": [[0, 0, -1.0]]},
    "Wt": {"rows": 1, "cols": 1, "triplets": [[0, 0, -1.0]]},
    "h0": [0.0],
    "Ht": {"rows": 1, "cols": 1, "triplets": [[0, 0, -1.0]]},
    "Gt": {"rows": 2, "cols": 1, "triplets": [[0, 0, 1.0], [1, 0, -1.0]]},
    "m0": [0.0, -5.0],
    "ft": [1.0],
    "dt": [0.25]
  }],
  "U": {"dim": 1, "lo": [0.0], "hi": [2.0]}
})";

}  // namespace

TEST_CASE("minimal document loads") {
  Instance inst = load_instance(kMinimalDoc);
  CHECK(inst.horizon == 1);
  CHECK(inst.n_x == 1);
  CHECK(inst.stages.size() == 1);
  CHECK(inst.stages[0].num_eq() == 1);
  CHECK(inst.stages[0].num_ge() == 2);
  // Absent blocks materialize as zeros of conforming size.
  CHECK(inst.stages[0].t_mat.rows() == 1);
  CHECK(inst.stages[0].t_mat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(validate(inst).ok());
}

TEST_CASE("wrong row count is a validation error naming the block") {
  std::string doc = kMinimalDoc;
  // Grow At to 2 rows while h0 stays 1-dimensional.
  auto pos = doc.find("\"At\": {\"rows\": 1");
  REQUIRE(pos != std::string::npos);
  doc.replace(pos, 16, "\"At\": {\"rows\": 2");
  try {
    load_instance(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("stage 1 / At") != std::string::npos);
  }
}

TEST_CASE("malformed JSON is a parse error") {
  CHECK_THROWS_AS(load_instance("{ not json"), ParseError);
  CHECK_THROWS_AS(load_instance("{\"T\": 1}"), ParseError);
}

TEST_CASE("save/load round-trip is exact") {
  Instance inst = load_instance(kMinimalDoc);
  std::string text = save_instance(inst);
  Instance again = load_instance(text);
  CHECK(save_instance(again) == text);  // canonical fixed point
  // Numeric entries reproduce bit for bit.
  CHECK(again.c[0] == inst.c[0]);
  CHECK(again.stages[0].d[0] == inst.stages[0].d[0]);
  CHECK(again.stages[0].a_mat(0, 0) == inst.stages[0].a_mat(0, 0));
  CHECK(again.u_set.hi[0] == inst.u_set.hi[0]);

  // Awkward doubles survive the trip.
  Instance tweaked = inst;
  tweaked.stages[0].d[0] = 0.1 + 0.2;
  tweaked.u_set.hi[0] = 1.0 / 3.0;
  Instance back = load_instance(save_instance(tweaked));
  CHECK(back.stages[0].d[0] == tweaked.stages[0].d[0]);
  CHECK(back.u_set.hi[0] == tweaked.u_set.hi[0]);
}

TEST_CASE("validate flags an empty uncertainty set") {
  Instance inst = load_instance(kMinimalDoc);

  SUBCASE("lo > hi") {
    inst.u_set.lo[0] = 3.0;  // above hi = 2
    ValidationReport rep = validate(inst);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.findings[0].where == "U");
  }
  SUBCASE("D row cuts off the whole box") {
    inst.u_set.d = Mat(1, 1);
    inst.u_set.d << 1.0;
    inst.u_set.e = Vec(1);
    inst.u_set.e << -1.0;  // u <= -1 against box [0, 2]
    ValidationReport rep = validate(inst);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.findings[0].message.find("infeasible") != std::string::npos);
  }
}

TEST_CASE("validate reports every finding, not just the first") {
  Instance inst = load_instance(kMinimalDoc);
  inst.stages[0].f = Vec::Zero(3);     // wrong length
  inst.u_set.lo[0] = 5.0;              // empty box
  ValidationReport rep = validate(inst);
  CHECK(rep.findings.size() >= 2);
}

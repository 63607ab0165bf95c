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

#ifndef MARO_LOWERBOUND_HPP_
#define MARO_LOWERBOUND_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "maro/model.hpp"

namespace maro {

enum class ScenarioProvenance { kHarvested, kSampled };

struct ScenarioSet {
  std::vector<Vec> points;  // full-horizon realizations
  std::vector<ScenarioProvenance> tags;

  int size() const { return static_cast<int>(points.size()); }
};

/// Deduplicates (within tol, max norm) the adversarial realizations of a run.
/// Throws ValidationError on an empty log.
ScenarioSet harvest_scenarios(const std::vector<Vec>& raw, double dedup_tol = 1e-7);

/// Prefix-equality groups per stage. Groups refine over time by
/// construction: stage-t groups are split inside their stage-(t-1) parents.
struct ScenarioTree {
  // groups[t-1][g] lists scenario indices; parent[t-1][g] is the enclosing
  // group at stage t-1 (zero for t = 1: the shared root).
  std::vector<std::vector<std::vector<int>>> groups;
  std::vector<std::vector<int>> parent;
  std::vector<std::vector<int>> group_of;  // [t-1][scenario] -> group

  int stages() const { return static_cast<int>(groups.size()); }
  int num_groups(int t) const { return static_cast<int>(groups[t - 1].size()); }
};

ScenarioTree build_scenario_tree(const Instance& inst, const ScenarioSet& set,
                                 double tol = 1e-9);

/// Scenario relaxation: shared x, one (s_t, y_t) block per tree group, a
/// shared epigraph for the worst scenario cost. Its optimum lower-bounds the
/// multistage optimum. Throws SolverError if the relaxation is infeasible.
double solve_scenario_bound(const Instance& inst, const ScenarioSet& set,
                            const ScenarioTree& tree);

/// (ub - lb) / (0.5 (ub + lb)); throws Error when ub + lb is within 1e-12
/// of zero.
double optimality_gap(double ub, double lb);

/// Rejection sampling from the bounding box, deterministic per seed. Throws
/// SolverError when the acceptance rate collapses below 1e-4.
ScenarioSet sample_uniform_scenarios(const Polytope& u, int n, std::uint64_t seed);

std::string scenarios_to_json(const ScenarioSet& set);

}  // namespace maro

#endif  // MARO_LOWERBOUND_HPP_

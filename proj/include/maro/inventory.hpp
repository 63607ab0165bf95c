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

#ifndef MARO_INVENTORY_HPP_
#define MARO_INVENTORY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "maro/bundle.hpp"
#include "maro/model.hpp"

namespace maro {

/// Multi-period inventory control under box-plus-budget demand uncertainty.
/// State: inventory level. Controls: order quantity and a cost epigraph
/// variable covering max(holding, shortage). A budget below `periods`
/// activates normalized-deviation coordinates in the uncertainty vector.
struct InventoryConfig {
  int periods = 5;
  double init_inventory = 0.0;
  double order_lo = 0.0;
  double order_hi = 40.0;
  double cap = 60.0;  // |inventory| <= cap
  double hold_cost = 2.0;
  double short_cost = 8.0;
  double order_cost = 1.0;
  // Explicit per-period vectors win when nonempty; otherwise seeded draws:
  // nominal in demand_base * [1 -/+ demand_spread], dev = demand_dev_frac *
  // nominal.
  std::vector<double> demand_nominal;
  std::vector<double> demand_dev;
  double demand_base = 20.0;
  double demand_spread = 0.4;
  double demand_dev_frac = 0.35;
  double budget = kInf;  // deviation budget Gamma; >= periods means the plain box

  void check() const;
};

/// Instance in the stagewise block format. The balance row is
/// s_t - s_{t-1} - order_t = -demand_t; epigraph rows price holding and
/// shortage; explicit rows box the order, the inventory level, and the
/// epigraph control so every recourse variable carries interval bounds.
Instance generate_inventory(const InventoryConfig& cfg, std::uint64_t seed);

struct StudyRow {
  std::uint64_t seed = 0;
  int periods = 0;
  std::string method;  // "tpb" or "adr"
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double time_ms = 0.0;
  bool failed = false;
  std::string error;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  double avg_gap_tpb = 0.0;
  double avg_gap_adr = 0.0;
  int failures = 0;

  std::string to_csv(bool zero_times) const;
};

/// Paired runs of the bundle solver and the affine counterpart over seeded
/// instances; both methods share the harvested-scenario lower bound. Failed
/// instances are excluded from the averages and counted.
StudyReport study(const InventoryConfig& cfg, const std::vector<std::uint64_t>& seeds,
                  const BundleConfig& bundle_cfg, int scenario_cap = 64);

}  // namespace maro

#endif  // MARO_INVENTORY_HPP_

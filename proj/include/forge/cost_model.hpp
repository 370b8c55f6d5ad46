// Copyright 2026 The Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "forge/ir.hpp"
#include "forge/metrics.hpp"

namespace forge {

// Coefficients of the analytical evaluator. Defaults mirror
// config/cost_params_v1.json.
struct CostParams {
  std::array<std::int64_t, 4> op_latency{1, 3, 16, 1};  // add, mul, div, logic
  std::array<std::int64_t, 4> op_area{10, 40, 200, 5};
  std::int64_t pipeline_reg_area_per_stage = 4;
  std::int64_t partition_area_per_way = 8;
  // Extra port pairs contributed by each partition way beyond the first.
  std::int64_t port_multiplier_per_partition_way = 1;
  // Cycles lost per memory access beyond the available ports in one unrolled
  // iteration.
  std::int64_t port_conflict_cycles = 1;
  std::int64_t access_latency = 1;

  std::int64_t latency_of(OpClass c) const { return op_latency[static_cast<std::size_t>(c)]; }
  std::int64_t area_of(OpClass c) const { return op_area[static_cast<std::size_t>(c)]; }

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

inline constexpr int kCostParamsVersion = 1;

nlohmann::json to_json(const CostParams& p);
// Missing keys keep their defaults; non-positive values are rejected.
CostParams cost_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Metrics& m);
Metrics metrics_from_json(const nlohmann::json& j);

std::int64_t available_ports(const ArrayDecl& a, const CostParams& p);

// max(requested II, carried_dep * unroll, ceil(accesses * unroll / ports) over
// arrays, occupancy of nested sequential sub-schedules).
std::int64_t effective_ii(const Design& d, const Function& f, const LoopStmt& loop,
                          const CostParams& p = {});

// Whole design: latency of top, area of every reachable function plus global
// array storage and partition overhead.
Metrics estimate(const Design& d, const CostParams& p = {});

// Metrics of one function's call subtree as if synthesised in isolation:
// subtree latency; own area of subtree functions plus the partition overhead
// of global arrays the subtree references.
Metrics estimate_function(const Design& d, const std::string& function, const CostParams& p = {});

}  // namespace forge

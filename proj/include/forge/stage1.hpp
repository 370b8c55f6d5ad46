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

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/evaluator.hpp"
#include "forge/ir.hpp"
#include "forge/subprocess.hpp"
#include "forge/transforms.hpp"

namespace forge {

inline constexpr int kMaxVariants = 7;

struct OptimizerPolicy {
  enum class Kind { Builtin, External };
  Kind kind = Kind::Builtin;
  std::uint64_t seed = 0;
  CommandSpec command;  // external only
  std::chrono::milliseconds timeout = kDefaultAdapterTimeout;
};

nlohmann::json to_json(const OptimizerPolicy& p);
OptimizerPolicy optimizer_policy_from_json(const nlohmann::json& j);

struct VariantSet {
  std::string function;
  std::vector<Variant> variants;  // ascending index, all Correct
  Metrics baseline_metrics;

  const Variant* find(int index) const;
};

nlohmann::json to_json(const Variant& v);
Variant variant_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VariantSet& s);
VariantSet variant_set_from_json(const nlohmann::json& j);

// Loops not nested inside another loop, and loops with no nested loop.
std::vector<const LoopStmt*> outermost_loops(const Function& f);
std::vector<const LoopStmt*> innermost_loops(const Function& f);

// Global or local array of `f` with the highest accesses/base_ports ratio;
// empty when f touches no partitionable array.
std::string most_contended_array(const Design& d, const Function& f);

// Untested variants, index 0 = no transforms. External policy failures fall
// back to the builtin set with a warning.
std::vector<Variant> generate_variants(const Function& f, const Design& d, const OptimizerPolicy& policy);
std::vector<Variant> builtin_variants(const Function& f, const Design& d);

VariantSet search_and_evaluate(const std::string& function, const Design& d, const OptimizerPolicy& policy,
                               const Evaluator& evaluator);

// Functions the ILP selects variants for: direct callees of top in first-call
// order, or top itself when it makes no calls.
std::vector<std::string> ilp_leaves(const Design& d);

// search_and_evaluate for every function, concurrently; results in input order.
std::vector<VariantSet> run_stage1(const Design& d, const std::vector<std::string>& functions,
                                   const OptimizerPolicy& policy, const Evaluator& evaluator);

}  // namespace forge

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
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/evaluator.hpp"
#include "forge/ilp.hpp"
#include "forge/stage1.hpp"
#include "forge/subprocess.hpp"
#include "forge/transforms.hpp"

namespace forge {

enum class AcceptRule { StrictImprove, ParetoAdd };
enum class Path { PragmaComposition, CodeRestructuring, MemoryOptimization, ComputeOptimization };
inline constexpr std::array<Path, 4> kPaths{Path::PragmaComposition, Path::CodeRestructuring,
                                            Path::MemoryOptimization, Path::ComputeOptimization};

std::string to_string(Path p);
std::string to_string(AcceptRule r);

struct ExplorerConfig {
  enum class Kind { Builtin, External };
  Kind kind = Kind::Builtin;
  std::uint64_t seed = 0;  // agent i runs with seed + i
  int max_steps = 25;
  AcceptRule accept_rule = AcceptRule::ParetoAdd;
  std::array<double, 4> path_weights{1, 1, 1, 1};  // indexed like kPaths
  // External only. An argument "{seed}" is replaced by the agent's seed.
  CommandSpec command;
  std::chrono::milliseconds timeout = kDefaultAdapterTimeout;
};

nlohmann::json to_json(const ExplorerConfig& c);
ExplorerConfig explorer_config_from_json(const nlohmann::json& j);

struct ExplorationRecord {
  std::string design_ref;
  std::vector<Transform> transforms_applied;  // cumulative, on top of the instantiated design
  std::int64_t latency = 0;
  std::int64_t area = 0;
  int agent_index = 1;
  int step = 0;
  int seeded_from = 1;  // ILP solution rank
  std::string path;     // "instantiate", a path name, or "external"
};

nlohmann::json to_json(const ExplorationRecord& r);
ExplorationRecord exploration_record_from_json(const nlohmann::json& j);

// FNV-1a 64 of the serialized design, as 16 hex digits.
std::string design_ref(const Design& d);

// Applies each chosen variant's transforms in variant-set order and checks
// the result against the original.
Design instantiate(const Design& d, const IlpSolution& s, const std::vector<VariantSet>& sets);

struct AgentContext {
  const Design& original;
  const std::vector<VariantSet>& variant_sets;
  const IlpSolution& solution;
  std::int64_t budget = 0;
  const Evaluator& evaluator;
  int agent_index = 1;
};

// `seed` is the agent's own seed.
std::vector<ExplorationRecord> targeted_refinement(const AgentContext& ctx, const ExplorerConfig& cfg,
                                                   std::uint64_t seed);

// Agents 1..n, run concurrently; agent i uses seed cfg.seed + i and solution
// ((i-1) mod |solutions|) + 1. Result indexed by agent.
std::vector<std::vector<ExplorationRecord>> run_stage2(const Design& original,
                                                       const std::vector<VariantSet>& sets,
                                                       const std::vector<IlpSolution>& solutions,
                                                       std::int64_t budget, const ExplorerConfig& cfg,
                                                       const Evaluator& evaluator, int agents_n);

// Minimum latency within budget; ties by area, agent_index, step.
ExplorationRecord select_final(const std::vector<ExplorationRecord>& records, std::int64_t budget);

// Rebuilds the design a record describes.
Design reconstruct(const Design& original, const std::vector<VariantSet>& sets, const IlpSolution& seed,
                   const ExplorationRecord& r);

}  // namespace forge

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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/call_graph.hpp"
#include "forge/ir.hpp"
#include "forge/stage1.hpp"

namespace forge {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t n, std::int64_t d = 1);
  std::int64_t ceil() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

Rational operator+(Rational a, Rational b);
Rational operator*(Rational a, Rational b);
bool operator<(Rational a, Rational b);
std::string to_string(Rational r);

struct ModelNode {
  enum class Kind { Leaf, Sum, Max, Scale, LoopMul };
  Kind kind = Kind::Leaf;
  std::string function;             // Leaf
  std::vector<ModelNode> children;  // Sum, Max: any number; Scale, LoopMul: one
  Rational constant = Rational::of(1);  // Scale
  std::int64_t count = 1;           // LoopMul

  static ModelNode leaf(std::string f);
  static ModelNode sum(std::vector<ModelNode> c);
  static ModelNode max(std::vector<ModelNode> c);
  static ModelNode scale(Rational k, ModelNode c);
  static ModelNode loop_mul(std::int64_t n, ModelNode c);

  friend bool operator==(const ModelNode&, const ModelNode&) = default;
};

struct LatencyModel {
  ModelNode root;
  friend bool operator==(const LatencyModel&, const LatencyModel&) = default;
};

std::string to_string(const ModelNode& n);
nlohmann::json to_json(const ModelNode& n);
ModelNode model_node_from_json(const nlohmann::json& j);
std::vector<std::string> leaf_functions(const ModelNode& n);  // first-appearance order

// Model over the ILP leaves (see ilp_leaves) following the top function's
// structure: sequential statements sum, parallel regions take the max, loops
// multiply. Linear subtrees are folded into Sum-of-Scale form.
LatencyModel build_latency_model(const CallGraph& g, const Design& d);

// Exact value before rounding, and rounded up to whole cycles.
Rational eval_model_exact(const ModelNode& n, const std::map<std::string, std::int64_t>& latencies);
std::int64_t eval_model(const LatencyModel& m, const std::map<std::string, std::int64_t>& latencies);

struct IlpProblem {
  std::vector<VariantSet> variant_sets;
  LatencyModel model;
  std::int64_t area_budget = 0;
};

struct IlpSolution {
  std::map<std::string, int> choice;  // function -> variant index
  std::int64_t predicted_latency = 0;
  std::int64_t total_area = 0;
  int rank = 0;
  friend bool operator==(const IlpSolution&, const IlpSolution&) = default;
};

struct IlpResult {
  std::vector<IlpSolution> solutions;
  bool infeasible = false;
  std::int64_t min_area = 0;  // smallest achievable total area
  std::string report;         // set when infeasible
};

nlohmann::json to_json(const IlpSolution& s);
IlpSolution ilp_solution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IlpResult& r);

inline constexpr std::int64_t kOracleGuard = 1'000'000;

// Ranked by (predicted_latency, total_area, choice vector in variant_sets
// order), all ascending.
IlpResult solve_top_n(const IlpProblem& p, int n);
IlpResult brute_force_oracle(const IlpProblem& p, int n);

}  // namespace forge

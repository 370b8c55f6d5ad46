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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "forge/ir.hpp"
#include "forge/metrics.hpp"

namespace forge {

// Per-loop directive. A value of 0 clears the directive on that loop.
struct LoopPragma {
  std::optional<std::int64_t> pipeline_ii;
  std::optional<std::int64_t> unroll;
  friend bool operator==(const LoopPragma&, const LoopPragma&) = default;
};

struct PragmaConfig {
  std::map<std::string, LoopPragma> loops;     // by loop id
  std::map<std::string, Partition> arrays;     // local or global array name
  std::map<std::string, bool> calls;           // call id -> inline
  bool empty() const { return loops.empty() && arrays.empty() && calls.empty(); }
  friend bool operator==(const PragmaConfig&, const PragmaConfig&) = default;
};

struct ApplyPragmas {
  std::string target_function;
  PragmaConfig config;
  bool replace = false;  // clear the function's loop/call directives first
  friend bool operator==(const ApplyPragmas&, const ApplyPragmas&) = default;
};

struct LoopFuse {
  std::string function, loop_a, loop_b;
  friend bool operator==(const LoopFuse&, const LoopFuse&) = default;
};

struct LoopReorder {
  std::string function, loop_outer, loop_inner;
  friend bool operator==(const LoopReorder&, const LoopReorder&) = default;
};

struct InlineCall {
  std::string function, call_id;
  friend bool operator==(const InlineCall&, const InlineCall&) = default;
};

struct RepartitionArray {
  std::string array;  // global array
  Partition partition;
  friend bool operator==(const RepartitionArray&, const RepartitionArray&) = default;
};

struct ClosedFormRewrite {
  std::string function, loop_id;
  friend bool operator==(const ClosedFormRewrite&, const ClosedFormRewrite&) = default;
};

using Transform =
    std::variant<ApplyPragmas, LoopFuse, LoopReorder, InlineCall, RepartitionArray, ClosedFormRewrite>;

// Returns a new, validated design. Throws TransformError when a target is
// missing or the transform is illegal (unequal fuse trip counts, rewrite of a
// loop without closed_form, an imperfect or dependent reorder nest, ...).
Design apply(const Design& d, const Transform& t);
Design apply_all(const Design& d, std::span<const Transform> ts);

// True for directive-only transforms, which never change interpret outputs.
bool is_pragma_only(const Transform& t);

nlohmann::json to_json(const Transform& t);
Transform transform_from_json(const nlohmann::json& j);
nlohmann::json to_json(std::span<const Transform> ts);
std::vector<Transform> transforms_from_json(const nlohmann::json& j);
std::string describe(const Transform& t);

enum class VariantStatus { Untested, Correct, Failed };

struct Variant {
  std::string function;
  int index = 0;
  std::vector<Transform> transforms;
  std::optional<Metrics> metrics;  // present iff status == Correct
  VariantStatus status = VariantStatus::Untested;
};

std::string to_string(VariantStatus s);

struct EquivalenceResult {
  bool correct = true;
  std::string report;  // empty when correct
  explicit operator bool() const { return correct; }
};

// Caches the original's outputs so many candidates can be checked cheaply.
class EquivalenceChecker {
 public:
  explicit EquivalenceChecker(const Design& original);
  EquivalenceResult check(const Design& candidate) const;

 private:
  const Design& original_;
  std::vector<std::map<std::string, Value>> reference_;
  std::string reference_error_;
};

// correct iff the interpreter agrees element-wise on every test vector of the
// original. Interpreter failures in the candidate are reported as failed.
EquivalenceResult check_equivalence(const Design& original, const Design& candidate);

}  // namespace forge

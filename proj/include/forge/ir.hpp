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

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "forge/expr.hpp"

namespace forge {

inline constexpr int kIrVersion = 1;

enum class OpClass { Add, Mul, Div, Logic };
enum class PartitionMode { Cyclic, Block, Complete };
enum class ParamKind { Scalar, Array };

struct Partition {
  PartitionMode mode = PartitionMode::Cyclic;
  std::int64_t factor = 2;

  // Number of banks the array is split into.
  std::int64_t ways(std::int64_t length) const {
    return mode == PartitionMode::Complete ? length : std::min(factor, length);
  }
  friend bool operator==(const Partition&, const Partition&) = default;
};

struct ArrayDecl {
  std::string name;
  std::int64_t length = 1;
  std::int64_t base_ports = 2;
  std::int64_t storage_area = 0;
  std::optional<Partition> partition;

  friend bool operator==(const ArrayDecl&, const ArrayDecl&) = default;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct LoopStmt {
  std::string id;
  std::int64_t trip_count = 1;
  std::int64_t carried_dep_latency = 0;
  bool reducible = false;
  std::optional<Block> closed_form;  // replaces the whole loop when rewritten
  Block body;
  // pragmas
  std::optional<std::int64_t> pipeline_ii;
  std::optional<std::int64_t> unroll;

  std::int64_t unroll_factor() const { return unroll.value_or(1); }
  bool fully_unrolled() const { return unroll_factor() == trip_count; }

  friend bool operator==(const LoopStmt&, const LoopStmt&);
};

struct ComputeStmt {
  std::string id;
  OpClass op_class = OpClass::Add;
  std::int64_t count = 1;
  std::optional<Effect> effect;

  friend bool operator==(const ComputeStmt&, const ComputeStmt&) = default;
};

struct AccessStmt {
  std::string id;
  std::string array;
  std::int64_t reads_per_iter = 0;
  std::int64_t writes_per_iter = 0;

  std::int64_t accesses() const { return reads_per_iter + writes_per_iter; }
  friend bool operator==(const AccessStmt&, const AccessStmt&) = default;
};

struct CallStmt {
  std::string id;
  std::string callee;
  std::string relation_tag;
  std::vector<std::string> args;
  bool inline_pragma = false;

  friend bool operator==(const CallStmt&, const CallStmt&) = default;
};

struct ParallelStmt {
  std::string id;
  std::vector<Block> branches;

  friend bool operator==(const ParallelStmt&, const ParallelStmt&);
};

struct Stmt {
  std::variant<LoopStmt, ComputeStmt, AccessStmt, CallStmt, ParallelStmt> node;

  const std::string& id() const;
  template <typename T>
  const T* as() const { return std::get_if<T>(&node); }
  template <typename T>
  T* as() { return std::get_if<T>(&node); }

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

inline bool operator==(const LoopStmt& a, const LoopStmt& b) {
  return a.id == b.id && a.trip_count == b.trip_count &&
         a.carried_dep_latency == b.carried_dep_latency && a.reducible == b.reducible &&
         a.closed_form == b.closed_form && a.body == b.body && a.pipeline_ii == b.pipeline_ii &&
         a.unroll == b.unroll;
}

inline bool operator==(const ParallelStmt& a, const ParallelStmt& b) {
  return a.id == b.id && a.branches == b.branches;
}

struct Param {
  std::string name;
  ParamKind kind = ParamKind::Array;
  friend bool operator==(const Param&, const Param&) = default;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  Block body;
  std::vector<ArrayDecl> local_arrays;

  const ArrayDecl* find_local(const std::string& n) const;
  ArrayDecl* find_local(const std::string& n);
  friend bool operator==(const Function&, const Function&) = default;
};

// A scalar or a flat array of integers.
struct Value {
  bool scalar = false;
  std::vector<std::int64_t> data;
  friend bool operator==(const Value&, const Value&) = default;
};

struct TestVector {
  std::map<std::string, Value> inputs;
  std::map<std::string, Value> expected_outputs;
  friend bool operator==(const TestVector&, const TestVector&) = default;
};

struct Design {
  std::string name;
  std::string top;
  std::vector<ArrayDecl> arrays;
  std::vector<Function> functions;
  std::vector<TestVector> test_vectors;

  const Function* find_function(const std::string& n) const;
  Function* find_function(const std::string& n);
  const Function& function(const std::string& n) const;  // throws if missing
  Function& function(const std::string& n);
  const ArrayDecl* find_array(const std::string& n) const;
  ArrayDecl* find_array(const std::string& n);

  friend bool operator==(const Design&, const Design&) = default;
};

std::string to_string(OpClass c);
std::string to_string(PartitionMode m);

// Pre-order walks. The callback may not add or remove statements.
template <typename F>
void walk(const Block& block, F&& f) {
  for (const Stmt& s : block) {
    f(s);
    if (const auto* loop = s.as<LoopStmt>()) {
      walk(loop->body, f);
    } else if (const auto* par = s.as<ParallelStmt>()) {
      for (const Block& b : par->branches) walk(b, f);
    }
  }
}

template <typename F>
void walk_mut(Block& block, F&& f) {
  for (Stmt& s : block) {
    f(s);
    if (auto* loop = s.as<LoopStmt>()) {
      walk_mut(loop->body, f);
    } else if (auto* par = s.as<ParallelStmt>()) {
      for (Block& b : par->branches) walk_mut(b, f);
    }
  }
}

const LoopStmt* find_loop(const Block& block, const std::string& id);
LoopStmt* find_loop(Block& block, const std::string& id);
const CallStmt* find_call(const Block& block, const std::string& id);
CallStmt* find_call(Block& block, const std::string& id);

// Functions reachable from top, top first, then in first-call order.
std::vector<std::string> reachable_functions(const Design& d);
// `root` plus everything it transitively calls.
std::vector<std::string> subtree_functions(const Design& d, const std::string& root);

}  // namespace forge

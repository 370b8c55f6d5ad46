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

#include "forge/ir.hpp"

#include <algorithm>
#include <set>

#include "forge/errors.hpp"

namespace forge {

const std::string& Stmt::id() const {
  return std::visit([](const auto& n) -> const std::string& { return n.id; }, node);
}

const ArrayDecl* Function::find_local(const std::string& n) const {
  for (const auto& a : local_arrays)
    if (a.name == n) return &a;
  return nullptr;
}

ArrayDecl* Function::find_local(const std::string& n) {
  return const_cast<ArrayDecl*>(std::as_const(*this).find_local(n));
}

const Function* Design::find_function(const std::string& n) const {
  for (const auto& f : functions)
    if (f.name == n) return &f;
  return nullptr;
}

Function* Design::find_function(const std::string& n) {
  return const_cast<Function*>(std::as_const(*this).find_function(n));
}

const Function& Design::function(const std::string& n) const {
  const Function* f = find_function(n);
  if (!f) throw ValidationError("unknown function '" + n + "'");
  return *f;
}

Function& Design::function(const std::string& n) {
  return const_cast<Function&>(std::as_const(*this).function(n));
}

const ArrayDecl* Design::find_array(const std::string& n) const {
  for (const auto& a : arrays)
    if (a.name == n) return &a;
  return nullptr;
}

ArrayDecl* Design::find_array(const std::string& n) {
  return const_cast<ArrayDecl*>(std::as_const(*this).find_array(n));
}

std::string to_string(OpClass c) {
  switch (c) {
    case OpClass::Add: return "add";
    case OpClass::Mul: return "mul";
    case OpClass::Div: return "div";
    case OpClass::Logic: return "logic";
  }
  return "?";
}

std::string to_string(PartitionMode m) {
  switch (m) {
    case PartitionMode::Cyclic: return "cyclic";
    case PartitionMode::Block: return "block";
    case PartitionMode::Complete: return "complete";
  }
  return "?";
}

const LoopStmt* find_loop(const Block& block, const std::string& id) {
  const LoopStmt* found = nullptr;
  walk(block, [&](const Stmt& s) {
    if (const auto* l = s.as<LoopStmt>(); l && l->id == id && !found) found = l;
  });
  return found;
}

LoopStmt* find_loop(Block& block, const std::string& id) {
  return const_cast<LoopStmt*>(find_loop(std::as_const(block), id));
}

const CallStmt* find_call(const Block& block, const std::string& id) {
  const CallStmt* found = nullptr;
  walk(block, [&](const Stmt& s) {
    if (const auto* c = s.as<CallStmt>(); c && c->id == id && !found) found = c;
  });
  return found;
}

CallStmt* find_call(Block& block, const std::string& id) {
  return const_cast<CallStmt*>(find_call(std::as_const(block), id));
}

std::vector<std::string> subtree_functions(const Design& d, const std::string& root) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  std::vector<std::string> stack{root};
  // Iterative DFS in call order; cycles are rejected elsewhere but the seen
  // set keeps this total regardless.
  while (!stack.empty()) {
    std::string name = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(name).second) continue;
    order.push_back(name);
    const Function* f = d.find_function(name);
    if (!f) continue;
    std::vector<std::string> callees;
    walk(f->body, [&](const Stmt& s) {
      if (const auto* c = s.as<CallStmt>()) callees.push_back(c->callee);
    });
    for (auto it = callees.rbegin(); it != callees.rend(); ++it)
      if (!seen.count(*it)) stack.push_back(*it);
  }
  return order;
}

std::vector<std::string> reachable_functions(const Design& d) { return subtree_functions(d, d.top); }

}  // namespace forge

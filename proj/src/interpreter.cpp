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

#include "forge/interpreter.hpp"

#include <memory>
#include <unordered_map>
#include <vector>

#include "forge/errors.hpp"

namespace forge {

namespace {

using Storage = std::vector<std::int64_t>;

struct Frame {
  const Function* fn = nullptr;
  std::unordered_map<std::string, Storage*> storage;
  std::unordered_map<std::string, std::int64_t> loop_vars;
};

class Machine {
 public:
  Machine(const Design& d, const InterpretLimits& limits) : d_(d), limits_(limits) {}

  void call(const Function& fn, std::unordered_map<std::string, Storage*> bindings) {
    Frame frame;
    frame.fn = &fn;
    frame.storage = std::move(bindings);
    std::vector<std::unique_ptr<Storage>> locals;
    for (const auto& a : fn.local_arrays) {
      locals.push_back(std::make_unique<Storage>(static_cast<std::size_t>(a.length), 0));
      frame.storage[a.name] = locals.back().get();
    }
    for (auto& g : globals_)
      frame.storage.emplace(g.first, g.second.get());  // params/locals shadow globals
    exec(frame, fn.body);
  }

  std::unordered_map<std::string, std::unique_ptr<Storage>> globals_;

 private:
  void exec(Frame& frame, const Block& b) {
    for (const Stmt& s : b) {
      if (++steps_ > limits_.max_steps) throw InterpretError("step limit exceeded");
      if (const auto* l = s.as<LoopStmt>()) {
        for (std::int64_t i = 0; i < l->trip_count; ++i) {
          frame.loop_vars[l->id] = i;
          exec(frame, l->body);
        }
        frame.loop_vars.erase(l->id);
      } else if (const auto* c = s.as<ComputeStmt>()) {
        if (c->effect) assign(frame, *c->effect, c->id);
      } else if (const auto* c = s.as<CallStmt>()) {
        const Function* callee = d_.find_function(c->callee);
        if (!callee) throw InterpretError("call to missing function '" + c->callee + "'");
        if (callee->params.size() != c->args.size())
          throw InterpretError("call '" + c->id + "' argument count mismatch");
        std::unordered_map<std::string, Storage*> bindings;
        for (std::size_t i = 0; i < c->args.size(); ++i)
          bindings[callee->params[i].name] = lookup(frame, c->args[i], c->id);
        call(*callee, std::move(bindings));
      } else if (const auto* p = s.as<ParallelStmt>()) {
        // Branches are independent by contract; run them in order.
        for (const Block& br : p->branches) exec(frame, br);
      }
    }
  }

  Storage* lookup(Frame& frame, const std::string& name, const std::string& sid) {
    auto it = frame.storage.find(name);
    if (it == frame.storage.end())
      throw InterpretError("unbound identifier '" + name + "' in " + frame.fn->name + "/" + sid);
    return it->second;
  }

  std::int64_t& element(Frame& frame, const std::string& name, const ExprPtr& index,
                        const std::string& sid) {
    Storage* st = lookup(frame, name, sid);
    const std::int64_t i = index ? eval(frame, index, sid) : 0;
    if (i < 0 || i >= static_cast<std::int64_t>(st->size()))
      throw InterpretError("out-of-bounds access " + name + "[" + std::to_string(i) + "] (length " +
                           std::to_string(st->size()) + ") in " + frame.fn->name + "/" + sid);
    return (*st)[static_cast<std::size_t>(i)];
  }

  std::int64_t eval(Frame& frame, const ExprPtr& e, const std::string& sid) {
    switch (e->kind) {
      case Expr::Kind::Constant:
        return e->value;
      case Expr::Kind::Ref: {
        if (!e->lhs) {
          auto lv = frame.loop_vars.find(e->name);
          if (lv != frame.loop_vars.end()) return lv->second;
        }
        return element(frame, e->name, e->lhs, sid);
      }
      case Expr::Kind::Negate:
        return static_cast<std::int64_t>(0 - static_cast<std::uint64_t>(eval(frame, e->lhs, sid)));
      case Expr::Kind::Binary: {
        const std::int64_t a = eval(frame, e->lhs, sid);
        const std::int64_t b = eval(frame, e->rhs, sid);
        try {
          return apply_binary(e->op, a, b);
        } catch (const InterpretError& err) {
          throw InterpretError(std::string(err.what()) + " in " + frame.fn->name + "/" + sid);
        }
      }
    }
    return 0;
  }

  void assign(Frame& frame, const Effect& eff, const std::string& sid) {
    const std::int64_t v = eval(frame, eff.value, sid);
    element(frame, eff.target, eff.target_index, sid) = v;
  }

  const Design& d_;
  const InterpretLimits& limits_;
  std::int64_t steps_ = 0;
};

}  // namespace

Outputs interpret(const Design& d, const TestVector& tv, const InterpretLimits& limits) {
  const Function* top = d.find_function(d.top);
  if (!top) throw InterpretError("top function '" + d.top + "' does not exist");
  Machine m(d, limits);
  for (const auto& a : d.arrays)
    m.globals_[a.name] = std::make_unique<Storage>(static_cast<std::size_t>(a.length), 0);
  std::unordered_map<std::string, std::unique_ptr<Storage>> params;
  std::unordered_map<std::string, Storage*> bindings;
  for (const auto& p : top->params) {
    auto in = tv.inputs.find(p.name);
    if (in == tv.inputs.end()) throw InterpretError("unbound top parameter '" + p.name + "'");
    params[p.name] = std::make_unique<Storage>(in->second.data);
    if (params[p.name]->empty()) params[p.name]->push_back(0);
    bindings[p.name] = params[p.name].get();
  }
  for (const auto& [name, value] : tv.inputs) {
    if (params.count(name)) continue;
    auto g = m.globals_.find(name);
    if (g == m.globals_.end()) throw InterpretError("input '" + name + "' names no parameter or array");
    if (g->second->size() != value.data.size())
      throw InterpretError("input '" + name + "' has the wrong length");
    *g->second = value.data;
  }

  m.call(*top, bindings);

  auto read = [&](const std::string& name) -> Value {
    Value v;
    if (auto p = params.find(name); p != params.end()) {
      v.data = *p->second;
      for (const auto& tp : top->params)
        if (tp.name == name) v.scalar = tp.kind == ParamKind::Scalar;
    } else if (auto g = m.globals_.find(name); g != m.globals_.end()) {
      v.data = *g->second;
    } else {
      throw InterpretError("output '" + name + "' names no parameter or array");
    }
    if (v.scalar) v.data.resize(1);
    return v;
  };

  Outputs out;
  if (tv.expected_outputs.empty()) {
    for (const auto& p : top->params) out[p.name] = read(p.name);
    for (const auto& a : d.arrays) out[a.name] = read(a.name);
  } else {
    for (const auto& kv : tv.expected_outputs) out[kv.first] = read(kv.first);
  }
  return out;
}

}  // namespace forge

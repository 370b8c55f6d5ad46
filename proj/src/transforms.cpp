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

#include "forge/transforms.hpp"

#include <functional>
#include <set>

#include "forge/design_io.hpp"
#include "forge/errors.hpp"
#include "forge/interpreter.hpp"

namespace forge {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw TransformError(msg); }

Function& target_function(Design& d, const std::string& name) {
  Function* f = d.find_function(name);
  if (!f) fail("unknown function '" + name + "'");
  return *f;
}

// Renames identifiers (names) and statement ids (ids) throughout a block.
void rename_block(Block& b, const Renamer& names, const Renamer& ids) {
  for (Stmt& s : b) {
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          n.id = ids(n.id);
          if constexpr (std::is_same_v<T, LoopStmt>) {
            rename_block(n.body, names, ids);
            if (n.closed_form) rename_block(*n.closed_form, names, ids);
          } else if constexpr (std::is_same_v<T, ComputeStmt>) {
            if (n.effect) n.effect = rename(*n.effect, names);
          } else if constexpr (std::is_same_v<T, AccessStmt>) {
            n.array = names(n.array);
          } else if constexpr (std::is_same_v<T, CallStmt>) {
            for (auto& a : n.args) a = names(a);
          } else if constexpr (std::is_same_v<T, ParallelStmt>) {
            for (Block& br : n.branches) rename_block(br, names, ids);
          }
        },
        s.node);
  }
}

const Renamer kSame = [](const std::string& s) { return s; };

// Finds the statement with `id` and replaces it with the block returned by
// `make`, which also learns whether the statement sits inside a loop.
bool splice(Block& b, const std::string& id, bool in_loop,
            const std::function<Block(const Stmt&, bool)>& make) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i].id() == id) {
      Block repl = make(b[i], in_loop);
      b.erase(b.begin() + static_cast<std::ptrdiff_t>(i));
      b.insert(b.begin() + static_cast<std::ptrdiff_t>(i), std::make_move_iterator(repl.begin()),
               std::make_move_iterator(repl.end()));
      return true;
    }
    if (auto* l = b[i].as<LoopStmt>()) {
      if (splice(l->body, id, true, make)) return true;
    } else if (auto* p = b[i].as<ParallelStmt>()) {
      for (Block& br : p->branches)
        if (splice(br, id, in_loop, make)) return true;
    }
  }
  return false;
}

// Block that directly contains the statement `id`.
Block* parent_block(Block& b, const std::string& id) {
  for (Stmt& s : b) {
    if (s.id() == id) return &b;
    if (auto* l = s.as<LoopStmt>()) {
      if (Block* p = parent_block(l->body, id)) return p;
    } else if (auto* p = s.as<ParallelStmt>()) {
      for (Block& br : p->branches)
        if (Block* r = parent_block(br, id)) return r;
    }
  }
  return nullptr;
}

void prune_unreachable(Design& d) {
  const auto reach = reachable_functions(d);
  const std::set<std::string> keep(reach.begin(), reach.end());
  std::erase_if(d.functions, [&](const Function& f) { return !keep.count(f.name); });
}

void check_partition(const Partition& p, const std::string& array) {
  if (p.mode != PartitionMode::Complete && p.factor < 2)
    fail("partition of '" + array + "' needs factor >= 2 unless complete");
}

void do_apply(Design& d, const ApplyPragmas& t) {
  Function& f = target_function(d, t.target_function);
  if (t.replace) {
    walk_mut(f.body, [](Stmt& s) {
      if (auto* l = s.as<LoopStmt>()) {
        l->pipeline_ii.reset();
        l->unroll.reset();
      } else if (auto* c = s.as<CallStmt>()) {
        c->inline_pragma = false;
      }
    });
  }
  for (const auto& [id, lp] : t.config.loops) {
    LoopStmt* l = find_loop(f.body, id);
    if (!l) fail("function '" + f.name + "' has no loop '" + id + "'");
    if (lp.pipeline_ii) {
      if (*lp.pipeline_ii < 0) fail("negative II on loop '" + id + "'");
      l->pipeline_ii = *lp.pipeline_ii == 0 ? std::nullopt : lp.pipeline_ii;
    }
    if (lp.unroll) {
      if (*lp.unroll < 0) fail("negative unroll on loop '" + id + "'");
      if (*lp.unroll > 0 && l->trip_count % *lp.unroll != 0)
        fail("unroll factor " + std::to_string(*lp.unroll) + " does not divide trip_count of '" + id + "'");
      l->unroll = *lp.unroll == 0 ? std::nullopt : lp.unroll;
    }
  }
  for (const auto& [name, part] : t.config.arrays) {
    check_partition(part, name);
    ArrayDecl* a = f.find_local(name);
    if (!a) a = d.find_array(name);
    if (!a) fail("no array '" + name + "' visible in '" + f.name + "'");
    a->partition = part;
  }
  for (const auto& [id, inl] : t.config.calls) {
    CallStmt* c = find_call(f.body, id);
    if (!c) fail("function '" + f.name + "' has no call '" + id + "'");
    c->inline_pragma = inl;
  }
}

void do_apply(Design& d, const LoopFuse& t) {
  Function& f = target_function(d, t.function);
  Block* parent = parent_block(f.body, t.loop_a);
  if (!parent) fail("function '" + f.name + "' has no statement '" + t.loop_a + "'");
  auto find_in = [&](const std::string& id) {
    return std::find_if(parent->begin(), parent->end(), [&](const Stmt& s) { return s.id() == id; });
  };
  auto ia = find_in(t.loop_a);
  auto ib = find_in(t.loop_b);
  if (ib == parent->end()) fail("loops '" + t.loop_a + "' and '" + t.loop_b + "' are not siblings");
  if (ib <= ia) fail("loop '" + t.loop_b + "' must follow '" + t.loop_a + "'");
  auto* a = ia->as<LoopStmt>();
  auto* b = ib->as<LoopStmt>();
  if (!a || !b) fail("fuse targets must both be loops");
  if (a->trip_count != b->trip_count)
    fail("cannot fuse loops with unequal trip counts (" + std::to_string(a->trip_count) + " vs " +
         std::to_string(b->trip_count) + ")");
  Block tail = std::move(b->body);
  const std::string from = b->id, to = a->id;
  rename_block(tail, [&](const std::string& n) { return n == from ? to : n; }, kSame);
  for (Stmt& s : tail) a->body.push_back(std::move(s));
  a->carried_dep_latency = std::max(a->carried_dep_latency, b->carried_dep_latency);
  a->reducible = false;
  a->closed_form.reset();
  parent->erase(ib);
}

void do_apply(Design& d, const LoopReorder& t) {
  Function& f = target_function(d, t.function);
  LoopStmt* outer = find_loop(f.body, t.loop_outer);
  if (!outer) fail("function '" + f.name + "' has no loop '" + t.loop_outer + "'");
  if (outer->body.size() != 1 || !outer->body[0].as<LoopStmt>() || outer->body[0].id() != t.loop_inner)
    fail("'" + t.loop_inner + "' is not perfectly nested in '" + t.loop_outer + "'");
  LoopStmt inner = std::move(*outer->body[0].as<LoopStmt>());
  if (outer->carried_dep_latency != 0 || inner.carried_dep_latency != 0)
    fail("loop reorder requires both loops free of carried dependences");
  LoopStmt new_inner = std::move(*outer);
  new_inner.body = std::move(inner.body);
  new_inner.reducible = false;
  new_inner.closed_form.reset();
  LoopStmt new_outer = std::move(inner);
  new_outer.reducible = false;
  new_outer.closed_form.reset();
  new_outer.body.clear();
  new_outer.body.push_back(Stmt{std::move(new_inner)});
  *outer = std::move(new_outer);
}

void do_apply(Design& d, const InlineCall& t) {
  Function& f = target_function(d, t.function);
  const CallStmt* call = find_call(f.body, t.call_id);
  if (!call) fail("function '" + f.name + "' has no call '" + t.call_id + "'");
  const Function* callee_ptr = d.find_function(call->callee);
  if (!callee_ptr) fail("call '" + t.call_id + "' targets missing function");
  const Function callee = *callee_ptr;  // copy: d.functions may change below
  const std::string prefix = t.call_id + "__";

  std::map<std::string, std::string> mapping;
  for (std::size_t i = 0; i < callee.params.size(); ++i) mapping[callee.params[i].name] = call->args[i];
  for (const auto& a : callee.local_arrays) mapping[a.name] = prefix + a.name;
  walk(callee.body, [&](const Stmt& s) {
    if (s.as<LoopStmt>()) mapping[s.id()] = prefix + s.id();
  });
  const Renamer names = [&](const std::string& n) {
    auto it = mapping.find(n);
    return it == mapping.end() ? n : it->second;
  };
  const Renamer ids = [&](const std::string& id) { return prefix + id; };

  std::vector<ArrayDecl> hoisted;
  const bool found = splice(f.body, t.call_id, false, [&](const Stmt&, bool in_loop) {
    if (in_loop && !callee.local_arrays.empty())
      fail("cannot inline '" + callee.name + "' inside a loop: it declares local arrays");
    Block body = callee.body;
    rename_block(body, names, ids);
    for (ArrayDecl a : callee.local_arrays) {
      a.name = prefix + a.name;
      hoisted.push_back(std::move(a));
    }
    return body;
  });
  if (!found) fail("call '" + t.call_id + "' not found");
  for (auto& a : hoisted) f.local_arrays.push_back(std::move(a));
  prune_unreachable(d);
}

void do_apply(Design& d, const RepartitionArray& t) {
  ArrayDecl* a = d.find_array(t.array);
  if (!a) fail("no global array '" + t.array + "'");
  check_partition(t.partition, t.array);
  a->partition = t.partition;
}

void do_apply(Design& d, const ClosedFormRewrite& t) {
  Function& f = target_function(d, t.function);
  const LoopStmt* l = find_loop(f.body, t.loop_id);
  if (!l) fail("function '" + f.name + "' has no loop '" + t.loop_id + "'");
  if (!l->closed_form) fail("loop '" + t.loop_id + "' has no closed_form annotation");
  splice(f.body, t.loop_id, false, [](const Stmt& s, bool) { return *s.as<LoopStmt>()->closed_form; });
}

}  // namespace

Design apply(const Design& d, const Transform& t) {
  Design out = d;
  std::visit([&](const auto& x) { do_apply(out, x); }, t);
  try {
    validate(out);
  } catch (const ValidationError& e) {
    throw TransformError(describe(t) + " produced an invalid design: " + e.what());
  }
  return out;
}

Design apply_all(const Design& d, std::span<const Transform> ts) {
  Design out = d;
  for (const auto& t : ts) out = forge::apply(out, t);
  return out;
}

bool is_pragma_only(const Transform& t) {
  return std::holds_alternative<ApplyPragmas>(t) || std::holds_alternative<RepartitionArray>(t);
}

std::string to_string(VariantStatus s) {
  switch (s) {
    case VariantStatus::Untested: return "untested";
    case VariantStatus::Correct: return "correct";
    case VariantStatus::Failed: return "failed";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

json to_json(const Transform& t) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ApplyPragmas>) {
          json loops = json::object(), arrays = json::object(), calls = json::object();
          for (const auto& [id, lp] : x.config.loops) {
            json e = json::object();
            if (lp.pipeline_ii) e["pipeline_ii"] = *lp.pipeline_ii;
            if (lp.unroll) e["unroll"] = *lp.unroll;
            loops[id] = e;
          }
          for (const auto& [n, p] : x.config.arrays) arrays[n] = forge::to_json(p);
          for (const auto& [id, inl] : x.config.calls) calls[id] = json{{"inline", inl}};
          return {{"transform", "ApplyPragmas"},
                  {"target_function", x.target_function},
                  {"replace", x.replace},
                  {"config", {{"loops", loops}, {"arrays", arrays}, {"calls", calls}}}};
        } else if constexpr (std::is_same_v<T, LoopFuse>) {
          return {{"transform", "LoopFuse"}, {"function", x.function}, {"loop_a", x.loop_a}, {"loop_b", x.loop_b}};
        } else if constexpr (std::is_same_v<T, LoopReorder>) {
          return {{"transform", "LoopReorder"}, {"function", x.function}, {"loop_outer", x.loop_outer},
                  {"loop_inner", x.loop_inner}};
        } else if constexpr (std::is_same_v<T, InlineCall>) {
          return {{"transform", "InlineCall"}, {"function", x.function}, {"call_id", x.call_id}};
        } else if constexpr (std::is_same_v<T, RepartitionArray>) {
          return {{"transform", "RepartitionArray"}, {"array", x.array}, {"partition", forge::to_json(x.partition)}};
        } else {
          return {{"transform", "ClosedFormRewrite"}, {"function", x.function}, {"loop_id", x.loop_id}};
        }
      },
      t);
}

namespace {

std::string str(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw ParseError("transform", std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::optional<std::int64_t> opt_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw ParseError("transform", std::string("'") + key + "' must be an integer");
  return it->get<std::int64_t>();
}

}  // namespace

Transform transform_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("transform", "expected an object");
  const std::string kind = str(j, "transform");
  if (kind == "ApplyPragmas") {
    ApplyPragmas t;
    t.target_function = str(j, "target_function");
    if (auto it = j.find("replace"); it != j.end()) {
      if (!it->is_boolean()) throw ParseError("transform.replace", "expected a boolean");
      t.replace = it->get<bool>();
    }
    const json cfg = j.value("config", json::object());
    if (!cfg.is_object()) throw ParseError("transform.config", "expected an object");
    if (auto lit = cfg.find("loops"); lit != cfg.end()) {
      if (!lit->is_object()) throw ParseError("transform.config.loops", "expected an object");
      for (const auto& [id, e] : lit->items()) {
        if (!e.is_object()) throw ParseError("transform.config.loops." + id, "expected an object");
        t.config.loops[id] = LoopPragma{opt_int(e, "pipeline_ii"), opt_int(e, "unroll")};
      }
    }
    if (auto ait = cfg.find("arrays"); ait != cfg.end()) {
      if (!ait->is_object()) throw ParseError("transform.config.arrays", "expected an object");
      for (const auto& [n, e] : ait->items())
        t.config.arrays[n] = partition_from_json(e, "transform.config.arrays." + n);
    }
    if (auto cit = cfg.find("calls"); cit != cfg.end()) {
      if (!cit->is_object()) throw ParseError("transform.config.calls", "expected an object");
      for (const auto& [id, e] : cit->items()) {
        const json& v = e.is_object() ? e.value("inline", json()) : e;
        if (!v.is_boolean()) throw ParseError("transform.config.calls." + id, "expected inline boolean");
        t.config.calls[id] = v.get<bool>();
      }
    }
    return t;
  }
  if (kind == "LoopFuse") return LoopFuse{str(j, "function"), str(j, "loop_a"), str(j, "loop_b")};
  if (kind == "LoopReorder") return LoopReorder{str(j, "function"), str(j, "loop_outer"), str(j, "loop_inner")};
  if (kind == "InlineCall") return InlineCall{str(j, "function"), str(j, "call_id")};
  if (kind == "RepartitionArray") {
    auto it = j.find("partition");
    if (it == j.end()) throw ParseError("transform", "missing 'partition'");
    return RepartitionArray{str(j, "array"), partition_from_json(*it, "transform.partition")};
  }
  if (kind == "ClosedFormRewrite") return ClosedFormRewrite{str(j, "function"), str(j, "loop_id")};
  throw ParseError("transform", "unknown transform kind '" + kind + "'");
}

json to_json(std::span<const Transform> ts) {
  json out = json::array();
  for (const auto& t : ts) out.push_back(to_json(t));
  return out;
}

std::vector<Transform> transforms_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("transforms", "expected an array");
  std::vector<Transform> out;
  for (const auto& e : j) out.push_back(transform_from_json(e));
  return out;
}

std::string describe(const Transform& t) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ApplyPragmas>) {
          return "ApplyPragmas(" + x.target_function + ")";
        } else if constexpr (std::is_same_v<T, LoopFuse>) {
          return "LoopFuse(" + x.function + ": " + x.loop_a + ", " + x.loop_b + ")";
        } else if constexpr (std::is_same_v<T, LoopReorder>) {
          return "LoopReorder(" + x.function + ": " + x.loop_outer + " <-> " + x.loop_inner + ")";
        } else if constexpr (std::is_same_v<T, InlineCall>) {
          return "InlineCall(" + x.function + ": " + x.call_id + ")";
        } else if constexpr (std::is_same_v<T, RepartitionArray>) {
          return "RepartitionArray(" + x.array + ")";
        } else {
          return "ClosedFormRewrite(" + x.function + ": " + x.loop_id + ")";
        }
      },
      t);
}

// ---------------------------------------------------------------------------
// Equivalence

EquivalenceChecker::EquivalenceChecker(const Design& original) : original_(original) {
  try {
    for (const auto& tv : original.test_vectors) reference_.push_back(interpret(original, tv));
  } catch (const Error& e) {
    reference_error_ = e.what();
  }
}

EquivalenceResult EquivalenceChecker::check(const Design& candidate) const {
  if (!reference_error_.empty()) return {false, "original design fails to interpret: " + reference_error_};
  const Function* a = original_.find_function(original_.top);
  const Function* b = candidate.find_function(candidate.top);
  if (!b || a->params != b->params) return {false, "top signature differs"};
  for (std::size_t i = 0; i < original_.test_vectors.size(); ++i) {
    Outputs got;
    try {
      got = interpret(candidate, original_.test_vectors[i]);
    } catch (const Error& e) {
      return {false, "test vector " + std::to_string(i) + ": candidate failed: " + e.what()};
    }
    for (const auto& [name, want] : reference_[i]) {
      auto it = got.find(name);
      if (it == got.end())
        return {false, "test vector " + std::to_string(i) + ": output '" + name + "' missing"};
      const auto& have = it->second.data;
      for (std::size_t k = 0; k < std::max(want.data.size(), have.size()); ++k) {
        if (k >= want.data.size() || k >= have.size() || want.data[k] != have[k]) {
          auto show = [k](const std::vector<std::int64_t>& v) {
            return k < v.size() ? std::to_string(v[k]) : std::string("<none>");
          };
          return {false, "test vector " + std::to_string(i) + ": " + name + "[" + std::to_string(k) +
                             "] expected " + show(want.data) + ", got " + show(have)};
        }
      }
    }
  }
  return {true, ""};
}

EquivalenceResult check_equivalence(const Design& original, const Design& candidate) {
  return EquivalenceChecker(original).check(candidate);
}

}  // namespace forge

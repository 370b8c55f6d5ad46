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

#include "forge/design_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "forge/call_graph.hpp"
#include "forge/errors.hpp"

namespace forge {

namespace {

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path, std::string("missing field '") + key + "'");
  return *it;
}

std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  return j;
}

std::int64_t int_field(const json& obj, const char* key, const std::string& path) {
  return as_int(field(obj, key, path), path + "." + key);
}

std::int64_t int_field_or(const json& obj, const char* key, const std::string& path,
                          std::int64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return as_int(*it, path + "." + key);
}

std::string string_field(const json& obj, const char* key, const std::string& path) {
  return as_string(field(obj, key, path), path + "." + key);
}

std::optional<std::int64_t> opt_int(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return as_int(*it, path + "." + key);
}

OpClass op_class_from(const std::string& s, const std::string& path) {
  if (s == "add") return OpClass::Add;
  if (s == "mul") return OpClass::Mul;
  if (s == "div") return OpClass::Div;
  if (s == "logic") return OpClass::Logic;
  throw ParseError(path, "unknown op_class '" + s + "'");
}

ArrayDecl array_from_json(const json& j, const std::string& path) {
  ArrayDecl a;
  a.name = string_field(j, "name", path);
  a.length = int_field(j, "length", path);
  a.base_ports = int_field_or(j, "base_ports", path, 2);
  a.storage_area = int_field_or(j, "storage_area", path, 0);
  if (auto it = j.find("partition"); it != j.end() && !it->is_null())
    a.partition = partition_from_json(*it, path + ".partition");
  return a;
}

json to_json(const ArrayDecl& a) {
  json j{{"name", a.name}, {"length", a.length}, {"base_ports", a.base_ports},
         {"storage_area", a.storage_area}};
  if (a.partition) j["partition"] = to_json(*a.partition);
  return j;
}

Block block_from_json(const json& j, const std::string& path);

Stmt stmt_from_json(const json& j, const std::string& path) {
  const std::string kind = string_field(j, "kind", path);
  const std::string id = string_field(j, "id", path);
  if (kind == "Loop") {
    LoopStmt l;
    l.id = id;
    l.trip_count = int_field(j, "trip_count", path);
    l.carried_dep_latency = int_field_or(j, "carried_dep_latency", path, 0);
    if (auto it = j.find("reducible"); it != j.end()) {
      if (!it->is_boolean()) throw ParseError(path + ".reducible", "expected a boolean");
      l.reducible = it->get<bool>();
    }
    if (auto it = j.find("closed_form"); it != j.end() && !it->is_null())
      l.closed_form = block_from_json(field(*it, "body", path + ".closed_form"),
                                      path + ".closed_form.body");
    l.body = block_from_json(field(j, "body", path), path + ".body");
    if (auto it = j.find("pragmas"); it != j.end() && !it->is_null()) {
      l.pipeline_ii = opt_int(*it, "pipeline_ii", path + ".pragmas");
      l.unroll = opt_int(*it, "unroll", path + ".pragmas");
    }
    return Stmt{std::move(l)};
  }
  if (kind == "Compute") {
    ComputeStmt c;
    c.id = id;
    c.op_class = op_class_from(string_field(j, "op_class", path), path + ".op_class");
    c.count = int_field(j, "count", path);
    if (auto it = j.find("effect"); it != j.end() && !it->is_null()) {
      try {
        c.effect = parse_effect(as_string(*it, path + ".effect"));
      } catch (const ParseError& e) {
        throw ParseError(path + ".effect", e.what());
      }
    }
    return Stmt{std::move(c)};
  }
  if (kind == "Access") {
    AccessStmt a;
    a.id = id;
    a.array = string_field(j, "array", path);
    a.reads_per_iter = int_field_or(j, "reads_per_iter", path, 0);
    a.writes_per_iter = int_field_or(j, "writes_per_iter", path, 0);
    return Stmt{std::move(a)};
  }
  if (kind == "Call") {
    CallStmt c;
    c.id = id;
    c.callee = string_field(j, "callee", path);
    c.relation_tag = j.contains("relation_tag") ? string_field(j, "relation_tag", path) : "";
    if (auto it = j.find("args"); it != j.end()) {
      as_array(*it, path + ".args");
      for (std::size_t i = 0; i < it->size(); ++i)
        c.args.push_back(as_string((*it)[i], path + ".args[" + std::to_string(i) + "]"));
    }
    if (auto it = j.find("inline"); it != j.end()) {
      if (!it->is_boolean()) throw ParseError(path + ".inline", "expected a boolean");
      c.inline_pragma = it->get<bool>();
    }
    return Stmt{std::move(c)};
  }
  if (kind == "ParallelRegion") {
    ParallelStmt p;
    p.id = id;
    const json& branches = as_array(field(j, "branches", path), path + ".branches");
    for (std::size_t i = 0; i < branches.size(); ++i)
      p.branches.push_back(block_from_json(branches[i], path + ".branches[" + std::to_string(i) + "]"));
    return Stmt{std::move(p)};
  }
  throw ParseError(path + ".kind", "unknown statement kind '" + kind + "'");
}

Block block_from_json(const json& j, const std::string& path) {
  as_array(j, path);
  Block b;
  b.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    b.push_back(stmt_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return b;
}

json stmt_to_json(const Stmt& s) {
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LoopStmt>) {
          json j{{"kind", "Loop"}, {"id", n.id}, {"trip_count", n.trip_count},
                 {"carried_dep_latency", n.carried_dep_latency}, {"reducible", n.reducible},
                 {"body", to_json(n.body)}};
          if (n.closed_form) j["closed_form"] = json{{"body", to_json(*n.closed_form)}};
          if (n.pipeline_ii || n.unroll) {
            json p = json::object();
            if (n.pipeline_ii) p["pipeline_ii"] = *n.pipeline_ii;
            if (n.unroll) p["unroll"] = *n.unroll;
            j["pragmas"] = p;
          }
          return j;
        } else if constexpr (std::is_same_v<T, ComputeStmt>) {
          json j{{"kind", "Compute"}, {"id", n.id}, {"op_class", to_string(n.op_class)},
                 {"count", n.count}};
          if (n.effect) j["effect"] = to_string(*n.effect);
          return j;
        } else if constexpr (std::is_same_v<T, AccessStmt>) {
          return json{{"kind", "Access"}, {"id", n.id}, {"array", n.array},
                      {"reads_per_iter", n.reads_per_iter}, {"writes_per_iter", n.writes_per_iter}};
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          json j{{"kind", "Call"}, {"id", n.id}, {"callee", n.callee},
                 {"relation_tag", n.relation_tag}, {"args", n.args}};
          if (n.inline_pragma) j["inline"] = true;
          return j;
        } else {
          json branches = json::array();
          for (const Block& b : n.branches) branches.push_back(to_json(b));
          return json{{"kind", "ParallelRegion"}, {"id", n.id}, {"branches", branches}};
        }
      },
      s.node);
}

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_col(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json to_json(const Value& v) {
  if (v.scalar) return v.data.empty() ? json(0) : json(v.data.front());
  return json(v.data);
}

Value value_from_json(const json& j, const std::string& path) {
  Value v;
  if (j.is_number_integer()) {
    v.scalar = true;
    v.data = {j.get<std::int64_t>()};
    return v;
  }
  if (!j.is_array()) throw ParseError(path, "expected an integer or an array of integers");
  for (std::size_t i = 0; i < j.size(); ++i)
    v.data.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

json to_json(const Partition& p) { return json{{"mode", to_string(p.mode)}, {"factor", p.factor}}; }

Partition partition_from_json(const json& j, const std::string& path) {
  Partition p;
  const std::string mode = string_field(j, "mode", path);
  if (mode == "cyclic") p.mode = PartitionMode::Cyclic;
  else if (mode == "block") p.mode = PartitionMode::Block;
  else if (mode == "complete") p.mode = PartitionMode::Complete;
  else throw ParseError(path + ".mode", "unknown partition mode '" + mode + "'");
  p.factor = int_field_or(j, "factor", path, p.mode == PartitionMode::Complete ? 0 : 2);
  return p;
}

json to_json(const Block& b) {
  json out = json::array();
  for (const Stmt& s : b) out.push_back(stmt_to_json(s));
  return out;
}

Design design_from_json(const json& j) {
  const std::string root = "$";
  if (!j.is_object()) throw ParseError(root, "design must be an object");
  const std::int64_t version = int_field(j, "ir_version", root);
  if (version != kIrVersion)
    throw ParseError(root + ".ir_version", "unsupported ir_version " + std::to_string(version));
  Design d;
  d.name = string_field(j, "name", root);
  d.top = string_field(j, "top", root);
  if (auto it = j.find("arrays"); it != j.end()) {
    as_array(*it, root + ".arrays");
    for (std::size_t i = 0; i < it->size(); ++i)
      d.arrays.push_back(array_from_json((*it)[i], root + ".arrays[" + std::to_string(i) + "]"));
  }
  const json& fns = as_array(field(j, "functions", root), root + ".functions");
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const std::string path = root + ".functions[" + std::to_string(i) + "]";
    const json& fj = fns[i];
    Function f;
    f.name = string_field(fj, "name", path);
    if (auto it = fj.find("params"); it != fj.end()) {
      as_array(*it, path + ".params");
      for (std::size_t k = 0; k < it->size(); ++k) {
        const std::string pp = path + ".params[" + std::to_string(k) + "]";
        Param p;
        p.name = string_field((*it)[k], "name", pp);
        const std::string kind = string_field((*it)[k], "kind", pp);
        if (kind == "scalar") p.kind = ParamKind::Scalar;
        else if (kind == "array") p.kind = ParamKind::Array;
        else throw ParseError(pp + ".kind", "expected 'scalar' or 'array'");
        f.params.push_back(std::move(p));
      }
    }
    if (auto it = fj.find("local_arrays"); it != fj.end()) {
      as_array(*it, path + ".local_arrays");
      for (std::size_t k = 0; k < it->size(); ++k)
        f.local_arrays.push_back(
            array_from_json((*it)[k], path + ".local_arrays[" + std::to_string(k) + "]"));
    }
    f.body = block_from_json(field(fj, "body", path), path + ".body");
    d.functions.push_back(std::move(f));
  }
  if (auto it = j.find("test_vectors"); it != j.end()) {
    as_array(*it, root + ".test_vectors");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = root + ".test_vectors[" + std::to_string(i) + "]";
      TestVector tv;
      for (const char* key : {"inputs", "expected_outputs"}) {
        const json& m = field((*it)[i], key, path);
        if (!m.is_object()) throw ParseError(path + "." + key, "expected an object");
        auto& target = std::string(key) == "inputs" ? tv.inputs : tv.expected_outputs;
        for (auto kv = m.begin(); kv != m.end(); ++kv)
          target[kv.key()] = value_from_json(kv.value(), path + "." + key + "." + kv.key());
      }
      d.test_vectors.push_back(std::move(tv));
    }
  }
  return d;
}

json to_json(const Design& d) {
  json arrays = json::array();
  for (const auto& a : d.arrays) arrays.push_back(to_json(a));
  json fns = json::array();
  for (const auto& f : d.functions) {
    json params = json::array();
    for (const auto& p : f.params)
      params.push_back({{"name", p.name}, {"kind", p.kind == ParamKind::Scalar ? "scalar" : "array"}});
    json locals = json::array();
    for (const auto& a : f.local_arrays) locals.push_back(to_json(a));
    fns.push_back({{"name", f.name}, {"params", params}, {"local_arrays", locals}, {"body", to_json(f.body)}});
  }
  json tvs = json::array();
  for (const auto& tv : d.test_vectors) {
    json in = json::object(), out = json::object();
    for (const auto& [k, v] : tv.inputs) in[k] = to_json(v);
    for (const auto& [k, v] : tv.expected_outputs) out[k] = to_json(v);
    tvs.push_back({{"inputs", in}, {"expected_outputs", out}});
  }
  return json{{"ir_version", kIrVersion}, {"name", d.name},     {"top", d.top},
              {"arrays", arrays},         {"functions", fns}, {"test_vectors", tvs}};
}

std::string serialize(const Design& d) { return to_json(d).dump(); }

Design load_design(std::string_view text) {
  Design d = design_from_json(parse_json_text(text));
  validate(d);
  return d;
}

Design load_design_file(const std::filesystem::path& path) { return load_design(read_file(path)); }

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_array_decl(const ArrayDecl& a, const std::string& where) {
  if (a.length < 1) throw ValidationError(where + ": array '" + a.name + "' length must be >= 1");
  if (a.base_ports < 1) throw ValidationError(where + ": array '" + a.name + "' base_ports must be >= 1");
  if (a.storage_area < 0) throw ValidationError(where + ": array '" + a.name + "' storage_area must be >= 0");
  if (a.partition && a.partition->mode != PartitionMode::Complete && a.partition->factor < 2)
    throw ValidationError(where + ": array '" + a.name + "' partition factor must be >= 2 unless complete");
}

class FunctionValidator {
 public:
  FunctionValidator(const Design& d, const Function& f) : d_(d), f_(f) {}

  void run() {
    std::set<std::string> storage;
    for (const auto& p : f_.params)
      if (!storage.insert(p.name).second)
        fail("duplicate parameter '" + p.name + "'");
    for (const auto& a : f_.local_arrays) {
      check_array_decl(a, "function '" + f_.name + "'");
      if (!storage.insert(a.name).second) fail("duplicate local name '" + a.name + "'");
    }
    block(f_.body);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("function '" + f_.name + "': " + msg);
  }

  bool is_storage(const std::string& n) const {
    for (const auto& p : f_.params)
      if (p.name == n) return true;
    return f_.find_local(n) || d_.find_array(n);
  }

  bool in_scope_loop(const std::string& n) const {
    return std::find(loop_scope_.begin(), loop_scope_.end(), n) != loop_scope_.end();
  }

  void check_id(const std::string& id) {
    if (id.empty()) fail("empty statement id");
    if (!ids_.insert(id).second) fail("duplicate statement id '" + id + "'");
  }

  void check_expr(const ExprPtr& e, const std::string& sid) {
    if (!e) return;
    if (e->kind == Expr::Kind::Ref) {
      if (in_scope_loop(e->name)) {
        if (e->lhs) fail("statement '" + sid + "' indexes loop variable '" + e->name + "'");
      } else if (!is_storage(e->name)) {
        fail("statement '" + sid + "' references unresolved identifier '" + e->name + "'");
      }
    }
    check_expr(e->lhs, sid);
    check_expr(e->rhs, sid);
  }

  void block(const Block& b) {
    for (const Stmt& s : b) stmt(s);
  }

  void stmt(const Stmt& s) {
    check_id(s.id());
    if (const auto* l = s.as<LoopStmt>()) {
      if (is_storage(l->id)) fail("loop id '" + l->id + "' shadows a storage name");
      if (l->trip_count < 1) fail("loop '" + l->id + "' trip_count must be >= 1");
      if (l->carried_dep_latency < 0) fail("loop '" + l->id + "' carried_dep_latency must be >= 0");
      if (l->closed_form && !l->reducible)
        fail("loop '" + l->id + "' has closed_form but is not flagged reducible");
      if (l->pipeline_ii && *l->pipeline_ii < 1) fail("loop '" + l->id + "' pipeline II must be >= 1");
      if (l->unroll && (*l->unroll < 1 || l->trip_count % *l->unroll != 0))
        fail("loop '" + l->id + "' unroll factor must divide trip_count");
      if (l->closed_form) block(*l->closed_form);  // replaces the loop: outer scope
      loop_scope_.push_back(l->id);
      block(l->body);
      loop_scope_.pop_back();
    } else if (const auto* c = s.as<ComputeStmt>()) {
      if (c->count < 1) fail("compute '" + c->id + "' count must be >= 1");
      if (c->effect) {
        if (!is_storage(c->effect->target))
          fail("compute '" + c->id + "' assigns to non-storage '" + c->effect->target + "'");
        check_expr(c->effect->target_index, c->id);
        check_expr(c->effect->value, c->id);
      }
    } else if (const auto* a = s.as<AccessStmt>()) {
      if (!is_storage(a->array)) fail("access '" + a->id + "' references unknown array '" + a->array + "'");
      if (a->reads_per_iter < 0 || a->writes_per_iter < 0)
        fail("access '" + a->id + "' counts must be >= 0");
    } else if (const auto* c = s.as<CallStmt>()) {
      const Function* callee = d_.find_function(c->callee);
      if (!callee) fail("call '" + c->id + "' targets missing function '" + c->callee + "'");
      if (callee->params.size() != c->args.size())
        fail("call '" + c->id + "' passes " + std::to_string(c->args.size()) + " args, '" +
             c->callee + "' takes " + std::to_string(callee->params.size()));
      for (const auto& arg : c->args)
        if (!is_storage(arg)) fail("call '" + c->id + "' argument '" + arg + "' does not resolve");
    } else if (const auto* p = s.as<ParallelStmt>()) {
      if (p->branches.size() < 2) fail("parallel region '" + p->id + "' needs at least 2 branches");
      for (const Block& br : p->branches) block(br);
    }
  }

  const Design& d_;
  const Function& f_;
  std::set<std::string> ids_;
  std::vector<std::string> loop_scope_;
};

void check_value_shape(const Design& d, const Function& top, const std::string& name, const Value& v,
                       const std::string& where) {
  for (const auto& p : top.params) {
    if (p.name != name) continue;
    if ((p.kind == ParamKind::Scalar) != v.scalar)
      throw ValidationError(where + ": '" + name + "' shape does not match top parameter kind");
    return;
  }
  if (const ArrayDecl* a = d.find_array(name)) {
    if (v.scalar || static_cast<std::int64_t>(v.data.size()) != a->length)
      throw ValidationError(where + ": '" + name + "' must be an array of length " +
                            std::to_string(a->length));
    return;
  }
  throw ValidationError(where + ": '" + name + "' is neither a top parameter nor a global array");
}

}  // namespace

void validate(const Design& d) {
  std::set<std::string> names;
  for (const auto& f : d.functions)
    if (!names.insert(f.name).second) throw ValidationError("duplicate function name '" + f.name + "'");
  if (!d.find_function(d.top)) throw ValidationError("top function '" + d.top + "' does not exist");
  std::set<std::string> arrays;
  for (const auto& a : d.arrays) {
    check_array_decl(a, "global");
    if (!arrays.insert(a.name).second) throw ValidationError("duplicate global array '" + a.name + "'");
  }
  for (const auto& f : d.functions) FunctionValidator(d, f).run();

  // acyclicity and reachability
  (void)extract_call_graph(d);
  const auto reachable = reachable_functions(d);
  if (reachable.size() != d.functions.size()) {
    const std::set<std::string> r(reachable.begin(), reachable.end());
    for (const auto& f : d.functions)
      if (!r.count(f.name)) throw ValidationError("function '" + f.name + "' is unreachable from top");
  }

  const Function& top = d.function(d.top);
  for (std::size_t i = 0; i < d.test_vectors.size(); ++i) {
    const auto& tv = d.test_vectors[i];
    const std::string where = "test_vectors[" + std::to_string(i) + "]";
    for (const auto& p : top.params)
      if (!tv.inputs.count(p.name))
        throw ValidationError(where + ": missing input for top parameter '" + p.name + "'");
    for (const auto& [k, v] : tv.inputs) check_value_shape(d, top, k, v, where + ".inputs");
    for (const auto& [k, v] : tv.expected_outputs) {
      check_value_shape(d, top, k, v, where + ".expected_outputs");
      auto in = tv.inputs.find(k);
      if (in != tv.inputs.end() && in->second.data.size() != v.data.size())
        throw ValidationError(where + ": output '" + k + "' length differs from its input");
    }
  }
}

}  // namespace forge

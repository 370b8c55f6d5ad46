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

#include "forge/cost_model.hpp"

#include <limits>
#include <map>
#include <memory>
#include <set>

#include "forge/errors.hpp"

namespace forge {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Per-iteration view of a loop body: memory pressure per array and the
// longest sequential sub-schedule that blocks re-issue.
struct BodyProfile {
  std::map<const ArrayDecl*, std::int64_t> accesses;
  std::int64_t occupancy = 0;
};

class CostModel {
 public:
  // With unbounded_ports every memory access is served in its own cycle;
  // used to size pipeline registers independently of partitioning.
  CostModel(const Design& d, const CostParams& p, bool unbounded_ports = false)
      : d_(d), p_(p), unbounded_ports_(unbounded_ports) {}

  std::int64_t function_latency(const std::string& name) {
    if (auto it = latency_memo_.find(name); it != latency_memo_.end()) return it->second;
    const Function& f = d_.function(name);
    const std::int64_t lat = block_latency(f, f.body);
    latency_memo_[name] = lat;
    return lat;
  }

  std::int64_t own_area(const Function& f) {
    std::int64_t area = block_area(f, f.body, 1);
    for (const auto& a : f.local_arrays) area += a.storage_area + partition_overhead(a);
    return area;
  }

  std::int64_t partition_overhead(const ArrayDecl& a) const {
    return a.partition ? p_.partition_area_per_way * a.partition->ways(a.length) : 0;
  }

  std::int64_t effective_ii(const Function& f, const LoopStmt& l) {
    const std::int64_t u = l.unroll_factor();
    const BodyProfile prof = profile(f, l.body);
    std::int64_t ii = std::max<std::int64_t>(l.pipeline_ii.value_or(1), l.carried_dep_latency * u);
    for (const auto& [arr, acc] : prof.accesses)
      ii = std::max(ii, ceil_div(acc * u, ports(*arr)));
    return std::max(ii, prof.occupancy * u);
  }

  // Names a function references that resolve to global arrays.
  void referenced_globals(const Function& f, std::set<const ArrayDecl*>& out) {
    auto note = [&](const std::string& n) {
      if (f.find_local(n)) return;
      for (const auto& p : f.params)
        if (p.name == n) return;
      if (const ArrayDecl* a = d_.find_array(n)) out.insert(a);
    };
    walk(f.body, [&](const Stmt& s) {
      if (const auto* a = s.as<AccessStmt>()) note(a->array);
      if (const auto* c = s.as<ComputeStmt>(); c && c->effect) for_each_name(*c->effect, note);
      if (const auto* c = s.as<CallStmt>()) for (const auto& arg : c->args) note(arg);
    });
  }

 private:
  std::int64_t ports(const ArrayDecl& a) const {
    return unbounded_ports_ ? std::numeric_limits<std::int32_t>::max() : available_ports(a, p_);
  }

  CostModel& ideal() {
    if (unbounded_ports_) return *this;
    if (!ideal_) ideal_ = std::make_unique<CostModel>(d_, p_, true);
    return *ideal_;
  }

  const ArrayDecl* resolve_array(const Function& f, const std::string& name) {
    if (const ArrayDecl* a = f.find_local(name)) return a;
    for (const auto& prm : f.params) {
      if (prm.name == name) {
        // The backing array depends on the call site; model a plain
        // dual-port memory, keyed per parameter.
        auto& slot = param_arrays_[&f][name];
        if (!slot) {
          slot = std::make_unique<ArrayDecl>();
          slot->name = name;
        }
        return slot.get();
      }
    }
    if (const ArrayDecl* a = d_.find_array(name)) return a;
    throw ValidationError("function '" + f.name + "' references unknown array '" + name + "'");
  }

  void gather(const Function& f, const Block& b, std::int64_t mult, BodyProfile& prof) {
    for (const Stmt& s : b) {
      if (const auto* a = s.as<AccessStmt>()) {
        if (a->accesses() > 0) prof.accesses[resolve_array(f, a->array)] += a->accesses() * mult;
      } else if (const auto* l = s.as<LoopStmt>()) {
        if (l->fully_unrolled()) {
          gather(f, l->body, mult * l->trip_count, prof);
        } else {
          prof.occupancy = std::max(prof.occupancy, mult * loop_latency(f, *l));
        }
      } else if (const auto* c = s.as<CallStmt>()) {
        prof.occupancy = std::max(prof.occupancy, mult * function_latency(c->callee));
      } else if (const auto* par = s.as<ParallelStmt>()) {
        for (const Block& br : par->branches) gather(f, br, mult, prof);
      }
    }
  }

  BodyProfile profile(const Function& f, const Block& body) {
    BodyProfile prof;
    gather(f, body, 1, prof);
    return prof;
  }

  // Latency of one unrolled iteration of the loop body.
  std::int64_t unrolled_depth(const Function& f, const LoopStmt& l) {
    const std::int64_t u = l.unroll_factor();
    const std::int64_t body = block_latency(f, l.body);
    std::int64_t stall = 0;
    if (u > 1) {
      const BodyProfile prof = profile(f, l.body);
      for (const auto& [arr, acc] : prof.accesses)
        stall = std::max(stall, std::max<std::int64_t>(0, acc * u - ports(*arr)) *
                                    p_.port_conflict_cycles);
    }
    const std::int64_t chain = (u - 1) * l.carried_dep_latency;
    return body + std::max(stall, chain);
  }

  std::int64_t loop_latency(const Function& f, const LoopStmt& l) {
    const std::int64_t iters = l.trip_count / l.unroll_factor();
    const std::int64_t depth = unrolled_depth(f, l);
    if (l.pipeline_ii) return depth + (iters - 1) * effective_ii(f, l);
    return iters * depth;
  }

  std::int64_t stmt_latency(const Function& f, const Stmt& s) {
    if (const auto* c = s.as<ComputeStmt>()) return p_.latency_of(c->op_class) * c->count;
    if (const auto* a = s.as<AccessStmt>()) return a->accesses() > 0 ? p_.access_latency : 0;
    if (const auto* c = s.as<CallStmt>()) return function_latency(c->callee);
    if (const auto* l = s.as<LoopStmt>()) return loop_latency(f, *l);
    if (const auto* par = s.as<ParallelStmt>()) {
      std::int64_t m = 0;
      for (const Block& br : par->branches) m = std::max(m, block_latency(f, br));
      return m;
    }
    return 0;
  }

  std::int64_t block_latency(const Function& f, const Block& b) {
    std::int64_t sum = 0;
    for (const Stmt& s : b) sum += stmt_latency(f, s);
    return sum;
  }

  std::int64_t block_area(const Function& f, const Block& b, std::int64_t rep) {
    std::int64_t area = 0;
    for (const Stmt& s : b) {
      if (const auto* c = s.as<ComputeStmt>()) {
        area += p_.area_of(c->op_class) * c->count * rep;
      } else if (const auto* l = s.as<LoopStmt>()) {
        area += block_area(f, l->body, rep * l->unroll_factor());
        if (l->pipeline_ii) area += p_.pipeline_reg_area_per_stage * ideal().unrolled_depth(f, *l) * rep;
      } else if (const auto* par = s.as<ParallelStmt>()) {
        for (const Block& br : par->branches) area += block_area(f, br, rep);
      }
    }
    return area;
  }

  const Design& d_;
  const CostParams& p_;
  bool unbounded_ports_ = false;
  std::unique_ptr<CostModel> ideal_;
  std::map<std::string, std::int64_t> latency_memo_;
  std::map<const Function*, std::map<std::string, std::unique_ptr<ArrayDecl>>> param_arrays_;
};

}  // namespace

nlohmann::json to_json(const CostParams& p) {
  auto classes = [](const std::array<std::int64_t, 4>& v) {
    return nlohmann::json{{"add", v[0]}, {"mul", v[1]}, {"div", v[2]}, {"logic", v[3]}};
  };
  return {{"version", kCostParamsVersion},
          {"op_latency", classes(p.op_latency)},
          {"op_area", classes(p.op_area)},
          {"pipeline_reg_area_per_stage", p.pipeline_reg_area_per_stage},
          {"partition_area_per_way", p.partition_area_per_way},
          {"port_multiplier_per_partition_way", p.port_multiplier_per_partition_way},
          {"port_conflict_cycles", p.port_conflict_cycles},
          {"access_latency", p.access_latency}};
}

CostParams cost_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("cost_params", "expected an object");
  if (j.contains("version") && j.at("version") != kCostParamsVersion)
    throw ParseError("cost_params.version", "unsupported cost parameter version");
  CostParams p;
  auto read = [&](const nlohmann::json& obj, const char* key, std::int64_t& out, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_integer() || it->get<std::int64_t>() <= 0)
      throw ParseError(path + "." + key, "expected a positive integer");
    out = it->get<std::int64_t>();
  };
  static constexpr const char* kClasses[] = {"add", "mul", "div", "logic"};
  for (const char* table : {"op_latency", "op_area"}) {
    auto it = j.find(table);
    if (it == j.end()) continue;
    auto& dst = std::string(table) == "op_latency" ? p.op_latency : p.op_area;
    for (std::size_t i = 0; i < 4; ++i) read(*it, kClasses[i], dst[i], std::string("cost_params.") + table);
  }
  read(j, "pipeline_reg_area_per_stage", p.pipeline_reg_area_per_stage, "cost_params");
  read(j, "partition_area_per_way", p.partition_area_per_way, "cost_params");
  read(j, "port_multiplier_per_partition_way", p.port_multiplier_per_partition_way, "cost_params");
  read(j, "port_conflict_cycles", p.port_conflict_cycles, "cost_params");
  read(j, "access_latency", p.access_latency, "cost_params");
  return p;
}

nlohmann::json to_json(const Metrics& m) { return {{"latency", m.latency}, {"area", m.area}}; }

Metrics metrics_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("latency") || !j.contains("area") || !j.at("latency").is_number_integer() ||
      !j.at("area").is_number_integer())
    throw ParseError("metrics", "expected {\"latency\": int, \"area\": int}");
  return {j.at("latency").get<std::int64_t>(), j.at("area").get<std::int64_t>()};
}

std::int64_t available_ports(const ArrayDecl& a, const CostParams& p) {
  const std::int64_t ways = a.partition ? a.partition->ways(a.length) : 1;
  return a.base_ports * (1 + p.port_multiplier_per_partition_way * (ways - 1));
}

std::int64_t effective_ii(const Design& d, const Function& f, const LoopStmt& loop, const CostParams& p) {
  return CostModel(d, p).effective_ii(f, loop);
}

Metrics estimate(const Design& d, const CostParams& p) {
  CostModel m(d, p);
  Metrics out;
  out.latency = m.function_latency(d.top);
  for (const auto& name : reachable_functions(d)) out.area += m.own_area(d.function(name));
  for (const auto& a : d.arrays) out.area += a.storage_area + m.partition_overhead(a);
  return out;
}

Metrics estimate_function(const Design& d, const std::string& function, const CostParams& p) {
  CostModel m(d, p);
  Metrics out;
  out.latency = m.function_latency(function);
  std::set<const ArrayDecl*> globals;
  for (const auto& name : subtree_functions(d, function)) {
    const Function& f = d.function(name);
    out.area += m.own_area(f);
    m.referenced_globals(f, globals);
  }
  for (const ArrayDecl* a : globals) out.area += m.partition_overhead(*a);
  return out;
}

}  // namespace forge

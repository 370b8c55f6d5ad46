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

#include "forge/stage1.hpp"

#include <algorithm>
#include <future>
#include <set>

#include <spdlog/spdlog.h>

#include "forge/design_io.hpp"
#include "forge/errors.hpp"

namespace forge {

using nlohmann::json;

json to_json(const OptimizerPolicy& p) {
  if (p.kind == OptimizerPolicy::Kind::Builtin) return {{"kind", "builtin"}, {"seed", p.seed}};
  return {{"kind", "external"}, {"command", p.command.str()}};
}

OptimizerPolicy optimizer_policy_from_json(const json& j) {
  OptimizerPolicy p;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "builtin") return p;
    if (s.starts_with("cmd:")) {
      p.kind = OptimizerPolicy::Kind::External;
      p.command = CommandSpec::parse(s.substr(4));
      if (p.command.empty()) throw ParseError("optimizer_policy", "cmd: needs a command");
      return p;
    }
    throw ParseError("optimizer_policy", "expected 'builtin' or 'cmd:<path>'");
  }
  if (!j.is_object()) throw ParseError("optimizer_policy", "expected a string or an object");
  const auto kind = j.value("kind", std::string("builtin"));
  if (kind == "builtin") {
    p.seed = j.value("seed", std::uint64_t{0});
  } else if (kind == "external") {
    p.kind = OptimizerPolicy::Kind::External;
    p.command = CommandSpec::parse(j.value("command", std::string()));
    if (p.command.empty()) throw ParseError("optimizer_policy.command", "external policy needs a command");
  } else {
    throw ParseError("optimizer_policy.kind", "expected 'builtin' or 'external'");
  }
  return p;
}

const Variant* VariantSet::find(int index) const {
  for (const auto& v : variants)
    if (v.index == index) return &v;
  return nullptr;
}

json to_json(const Variant& v) {
  json j{{"function", v.function},
         {"index", v.index},
         {"transforms", to_json(std::span<const Transform>(v.transforms))},
         {"status", to_string(v.status)}};
  if (v.metrics) j["metrics"] = to_json(*v.metrics);
  return j;
}

Variant variant_from_json(const json& j) {
  Variant v;
  v.function = j.at("function").get<std::string>();
  v.index = j.at("index").get<int>();
  v.transforms = transforms_from_json(j.at("transforms"));
  const auto status = j.at("status").get<std::string>();
  if (status == "correct") v.status = VariantStatus::Correct;
  else if (status == "failed") v.status = VariantStatus::Failed;
  else if (status == "untested") v.status = VariantStatus::Untested;
  else throw ParseError("variant.status", "unknown status '" + status + "'");
  if (j.contains("metrics")) v.metrics = metrics_from_json(j.at("metrics"));
  if (v.metrics.has_value() != (v.status == VariantStatus::Correct))
    throw ParseError("variant", "metrics must be present exactly when status is correct");
  return v;
}

json to_json(const VariantSet& s) {
  json vs = json::array();
  for (const auto& v : s.variants) vs.push_back(to_json(v));
  return {{"function", s.function}, {"baseline_metrics", to_json(s.baseline_metrics)}, {"variants", vs}};
}

VariantSet variant_set_from_json(const json& j) {
  VariantSet s;
  s.function = j.at("function").get<std::string>();
  s.baseline_metrics = metrics_from_json(j.at("baseline_metrics"));
  for (const auto& v : j.at("variants")) s.variants.push_back(variant_from_json(v));
  return s;
}

namespace {

bool contains_loop(const Block& b) {
  bool found = false;
  walk(b, [&](const Stmt& s) { found = found || s.as<LoopStmt>() != nullptr; });
  return found;
}

void collect_loops(const Block& b, bool nested, std::vector<const LoopStmt*>& outer,
                   std::vector<const LoopStmt*>& inner) {
  for (const Stmt& s : b) {
    if (const auto* l = s.as<LoopStmt>()) {
      if (!nested) outer.push_back(l);
      if (!contains_loop(l->body)) inner.push_back(l);
      collect_loops(l->body, true, outer, inner);
    } else if (const auto* p = s.as<ParallelStmt>()) {
      for (const Block& br : p->branches) collect_loops(br, nested, outer, inner);
    }
  }
}

Variant make_variant(const Function& f, int index, std::vector<Transform> ts) {
  Variant v;
  v.function = f.name;
  v.index = index;
  v.transforms = std::move(ts);
  return v;
}

std::vector<Transform> pragma_transform(const Function& f, PragmaConfig cfg) {
  if (cfg.empty()) return {};
  return {ApplyPragmas{f.name, std::move(cfg), false}};
}

PragmaConfig pipeline_all(const Function& f, std::int64_t ii) {
  PragmaConfig cfg;
  walk(f.body, [&](const Stmt& s) {
    if (const auto* l = s.as<LoopStmt>()) cfg.loops[l->id].pipeline_ii = ii;
  });
  return cfg;
}

// v6: each step is kept only if it applies cleanly on top of the previous ones.
std::vector<Transform> alternate_variant(const Function& f, const Design& d) {
  std::vector<Transform> out;
  Design cur = d;
  auto attempt = [&](Transform t) {
    try {
      cur = forge::apply(cur, t);
      out.push_back(std::move(t));
    } catch (const TransformError& e) {
      spdlog::debug("v6 of {}: skipping {}: {}", f.name, describe(t), e.what());
    }
  };
  const std::string arr = most_contended_array(d, f);
  if (!arr.empty()) {
    PragmaConfig cfg;
    cfg.arrays[arr] = Partition{PartitionMode::Complete, 0};
    attempt(ApplyPragmas{f.name, cfg, false});
  }
  std::vector<std::string> calls;
  walk(f.body, [&](const Stmt& s) {
    if (s.as<CallStmt>()) calls.push_back(s.id());
  });
  for (const auto& id : calls) attempt(InlineCall{f.name, id});
  std::vector<std::string> reducible;
  walk(cur.function(f.name).body, [&](const Stmt& s) {
    if (const auto* l = s.as<LoopStmt>(); l && l->closed_form) reducible.push_back(l->id);
  });
  for (const auto& id : reducible) {
    // an enclosing rewrite may already have removed it
    if (find_loop(cur.function(f.name).body, id)) attempt(ClosedFormRewrite{f.name, id});
  }
  return out;
}

std::vector<Variant> external_variants(const Function& f, const Design& d, const OptimizerPolicy& policy) {
  const json request{{"function", f.name}, {"design", to_json(d)}};
  const ProcessResult r = run_process(policy.command, request.dump() + "\n", policy.timeout);
  if (r.timed_out) throw AdapterError("optimizer timed out");
  if (r.exit_code != 0) throw AdapterError("optimizer exited with status " + std::to_string(r.exit_code));
  const auto nl = r.out.find('\n');
  const json reply = parse_json_text(r.out.substr(0, nl));
  if (!reply.is_object() || !reply.contains("variants") || !reply.at("variants").is_array())
    throw ProtocolError("optimizer reply needs a 'variants' array");
  std::vector<Variant> out{make_variant(f, 0, {})};
  for (const auto& proposal : reply.at("variants")) {
    if (static_cast<int>(out.size()) == kMaxVariants) {
      spdlog::warn("optimizer for {} proposed more than {} variants; extra ignored", f.name, kMaxVariants - 1);
      break;
    }
    out.push_back(make_variant(f, static_cast<int>(out.size()), transforms_from_json(proposal)));
  }
  return out;
}

}  // namespace

std::vector<const LoopStmt*> outermost_loops(const Function& f) {
  std::vector<const LoopStmt*> outer, inner;
  collect_loops(f.body, false, outer, inner);
  return outer;
}

std::vector<const LoopStmt*> innermost_loops(const Function& f) {
  std::vector<const LoopStmt*> outer, inner;
  collect_loops(f.body, false, outer, inner);
  return inner;
}

std::string most_contended_array(const Design& d, const Function& f) {
  std::map<std::string, std::int64_t> accesses;
  walk(f.body, [&](const Stmt& s) {
    if (const auto* a = s.as<AccessStmt>()) accesses[a->array] += a->accesses();
  });
  std::string best;
  std::int64_t best_acc = 0, best_ports = 1;
  auto consider = [&](const ArrayDecl& a) {
    auto it = accesses.find(a.name);
    if (it == accesses.end() || it->second == 0 || a.length < 2) return;
    if (a.partition && a.partition->mode == PartitionMode::Complete) return;
    // it->second / a.base_ports > best_acc / best_ports
    if (best.empty() || it->second * best_ports > best_acc * a.base_ports) {
      best = a.name;
      best_acc = it->second;
      best_ports = a.base_ports;
    }
  };
  for (const auto& a : d.arrays)
    if (!f.find_local(a.name)) consider(a);
  for (const auto& a : f.local_arrays) consider(a);
  return best;
}

std::vector<Variant> builtin_variants(const Function& f, const Design& d) {
  std::vector<Variant> out;
  out.push_back(make_variant(f, 0, {}));

  PragmaConfig v1;
  for (const LoopStmt* l : outermost_loops(f)) v1.loops[l->id].pipeline_ii = 4;
  out.push_back(make_variant(f, 1, pragma_transform(f, v1)));
  out.push_back(make_variant(f, 2, pragma_transform(f, pipeline_all(f, 1))));
  out.push_back(make_variant(f, 3, pragma_transform(f, pipeline_all(f, 2))));

  PragmaConfig v4 = pipeline_all(f, 1);
  PragmaConfig v5 = v4;
  for (const LoopStmt* l : innermost_loops(f)) {
    if (l->trip_count <= 4) v4.loops[l->id].unroll = l->trip_count;
    else if (l->trip_count % 2 == 0) v4.loops[l->id].unroll = 2;
    v5.loops[l->id].unroll = l->trip_count;
  }
  out.push_back(make_variant(f, 4, pragma_transform(f, v4)));
  out.push_back(make_variant(f, 5, pragma_transform(f, v5)));
  out.push_back(make_variant(f, 6, alternate_variant(f, d)));
  return out;
}

std::vector<Variant> generate_variants(const Function& f, const Design& d, const OptimizerPolicy& policy) {
  if (policy.kind == OptimizerPolicy::Kind::External) {
    try {
      return external_variants(f, d, policy);
    } catch (const Error& e) {
      spdlog::warn("optimizer for {} failed ({}); using builtin variants", f.name, e.what());
    }
  }
  return builtin_variants(f, d);
}

VariantSet search_and_evaluate(const std::string& function, const Design& d, const OptimizerPolicy& policy,
                               const Evaluator& evaluator) {
  const Function& f = d.function(function);
  VariantSet set;
  set.function = function;
  EquivalenceChecker checker(d);
  std::vector<Design> kept;
  for (Variant& v : generate_variants(f, d, policy)) {
    Design candidate;
    try {
      candidate = apply_all(d, v.transforms);
    } catch (const TransformError& e) {
      spdlog::debug("{} v{} discarded: {}", function, v.index, e.what());
      continue;
    }
    if (!candidate.find_function(function)) {
      spdlog::debug("{} v{} discarded: function removed", function, v.index);
      continue;
    }
    if (auto eq = checker.check(candidate); !eq) {
      spdlog::debug("{} v{} discarded: {}", function, v.index, eq.report);
      continue;
    }
    if (std::find(kept.begin(), kept.end(), candidate) != kept.end()) continue;
    v.metrics = evaluator.evaluate_function(candidate, function);
    v.status = VariantStatus::Correct;
    kept.push_back(std::move(candidate));
    set.variants.push_back(std::move(v));
  }
  if (set.variants.empty() || set.variants.front().index != 0)
    throw Error("baseline variant of '" + function + "' failed its own equivalence check");
  set.baseline_metrics = *set.variants.front().metrics;
  return set;
}

std::vector<std::string> ilp_leaves(const Design& d) {
  std::vector<std::string> out;
  walk(d.function(d.top).body, [&](const Stmt& s) {
    if (const auto* c = s.as<CallStmt>(); c && std::find(out.begin(), out.end(), c->callee) == out.end())
      out.push_back(c->callee);
  });
  if (out.empty()) out.push_back(d.top);
  return out;
}

std::vector<VariantSet> run_stage1(const Design& d, const std::vector<std::string>& functions,
                                   const OptimizerPolicy& policy, const Evaluator& evaluator) {
  std::vector<std::future<VariantSet>> jobs;
  jobs.reserve(functions.size());
  for (const auto& fn : functions)
    jobs.push_back(std::async(std::launch::async,
                              [&d, &policy, &evaluator, fn] { return search_and_evaluate(fn, d, policy, evaluator); }));
  std::vector<VariantSet> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace forge

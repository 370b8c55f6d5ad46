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

#include "forge/stage2.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <optional>
#include <set>

#include <spdlog/spdlog.h>

#include "forge/cost_model.hpp"
#include "forge/design_io.hpp"
#include "forge/errors.hpp"
#include "forge/rng.hpp"

namespace forge {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 4> kPathNames{"pragma_composition", "code_restructuring",
                                               "memory_optimization", "compute_optimization"};

}  // namespace

std::string to_string(Path p) { return kPathNames[static_cast<std::size_t>(p)]; }

std::string to_string(AcceptRule r) { return r == AcceptRule::ParetoAdd ? "pareto-add" : "strict-improve"; }

json to_json(const ExplorerConfig& c) {
  json w;
  for (std::size_t i = 0; i < kPaths.size(); ++i) w[kPathNames[i]] = c.path_weights[i];
  json j{{"kind", c.kind == ExplorerConfig::Kind::Builtin ? "builtin" : "external"},
         {"seed", c.seed},
         {"max_steps", c.max_steps},
         {"accept_rule", to_string(c.accept_rule)},
         {"path_weights", w}};
  if (c.kind == ExplorerConfig::Kind::External) j["command"] = c.command.str();
  return j;
}

ExplorerConfig explorer_config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("explorer", "expected an object");
  ExplorerConfig c;
  const auto kind = j.value("kind", std::string("builtin"));
  if (kind == "external") {
    c.kind = ExplorerConfig::Kind::External;
    c.command = CommandSpec::parse(j.value("command", std::string()));
    if (c.command.empty()) throw ParseError("explorer.command", "external explorer needs a command");
  } else if (kind != "builtin") {
    throw ParseError("explorer.kind", "expected 'builtin' or 'external'");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw ParseError("explorer.seed", "expected an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("max_steps")) {
    if (!j.at("max_steps").is_number_integer() || j.at("max_steps").get<std::int64_t>() < 0)
      throw ParseError("explorer.max_steps", "expected a non-negative integer");
    c.max_steps = j.at("max_steps").get<int>();
  }
  const auto rule = j.value("accept_rule", std::string("pareto-add"));
  if (rule == "strict-improve") c.accept_rule = AcceptRule::StrictImprove;
  else if (rule != "pareto-add") throw ParseError("explorer.accept_rule", "expected 'pareto-add' or 'strict-improve'");
  if (j.contains("path_weights")) {
    const json& w = j.at("path_weights");
    if (!w.is_object()) throw ParseError("explorer.path_weights", "expected an object");
    for (const auto& [k, v] : w.items()) {
      auto it = std::find(kPathNames.begin(), kPathNames.end(), k);
      if (it == kPathNames.end()) throw ParseError("explorer.path_weights." + k, "unknown path");
      if (!v.is_number() || v.get<double>() < 0)
        throw ParseError("explorer.path_weights." + k, "expected a non-negative number");
      c.path_weights[it - kPathNames.begin()] = v.get<double>();
    }
    if (std::all_of(c.path_weights.begin(), c.path_weights.end(), [](double x) { return x <= 0; }))
      throw ParseError("explorer.path_weights", "at least one weight must be positive");
  }
  return c;
}

json to_json(const ExplorationRecord& r) {
  return {{"design_ref", r.design_ref},
          {"transforms_applied", to_json(std::span<const Transform>(r.transforms_applied))},
          {"latency", r.latency},
          {"area", r.area},
          {"agent_index", r.agent_index},
          {"step", r.step},
          {"seeded_from", r.seeded_from},
          {"path", r.path}};
}

ExplorationRecord exploration_record_from_json(const json& j) {
  ExplorationRecord r;
  r.design_ref = j.at("design_ref").get<std::string>();
  r.transforms_applied = transforms_from_json(j.at("transforms_applied"));
  r.latency = j.at("latency").get<std::int64_t>();
  r.area = j.at("area").get<std::int64_t>();
  r.agent_index = j.at("agent_index").get<int>();
  r.step = j.at("step").get<int>();
  r.seeded_from = j.at("seeded_from").get<int>();
  r.path = j.value("path", std::string());
  return r;
}

std::string design_ref(const Design& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize(d)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Design instantiate(const Design& d, const IlpSolution& s, const std::vector<VariantSet>& sets) {
  Design out = d;
  for (const auto& vs : sets) {
    auto it = s.choice.find(vs.function);
    if (it == s.choice.end()) throw Error("solution has no choice for '" + vs.function + "'");
    const Variant* v = vs.find(it->second);
    if (!v) throw Error("variant " + std::to_string(it->second) + " of '" + vs.function + "' was discarded");
    out = apply_all(out, v->transforms);
  }
  if (auto eq = check_equivalence(d, out); !eq)
    throw Error("instantiated design for solution rank " + std::to_string(s.rank) + " is not equivalent: " +
                eq.report);
  return out;
}

Design reconstruct(const Design& original, const std::vector<VariantSet>& sets, const IlpSolution& seed,
                   const ExplorationRecord& r) {
  return apply_all(instantiate(original, seed, sets), r.transforms_applied);
}

namespace {

using Batch = std::vector<Transform>;

std::vector<const Function*> reachable(const Design& d) {
  std::vector<const Function*> out;
  for (const auto& name : reachable_functions(d)) out.push_back(&d.function(name));
  return out;
}

std::vector<std::int64_t> divisors(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t k = 2; k <= n; ++k)
    if (n % k == 0) out.push_back(k);
  return out;
}

class BuiltinProposer {
 public:
  BuiltinProposer(const std::vector<VariantSet>& sets, Rng& rng) : sets_(sets), rng_(rng) {}

  std::optional<Batch> propose(Path p, const Design& cur) {
    switch (p) {
      case Path::PragmaComposition: return pragma(cur);
      case Path::CodeRestructuring: return restructure(cur);
      case Path::MemoryOptimization: return memory(cur);
      case Path::ComputeOptimization: return compute(cur);
    }
    return std::nullopt;
  }

 private:
  std::optional<Batch> pragma(const Design& cur) {
    std::vector<const VariantSet*> swappable;
    for (const auto& vs : sets_)
      if (vs.variants.size() > 1 && cur.find_function(vs.function)) swappable.push_back(&vs);
    if (!swappable.empty() && rng_.coin()) {
      const VariantSet& vs = *rng_.pick(swappable);
      const Variant& v = rng_.pick(vs.variants);
      ApplyPragmas block{vs.function, {}, true};
      for (const auto& t : v.transforms) {
        if (const auto* ap = std::get_if<ApplyPragmas>(&t); ap && ap->target_function == vs.function) {
          for (const auto& [k, x] : ap->config.loops) block.config.loops[k] = x;
          for (const auto& [k, x] : ap->config.arrays) block.config.arrays[k] = x;
          for (const auto& [k, x] : ap->config.calls) block.config.calls[k] = x;
        }
      }
      return Batch{block};
    }
    std::vector<std::pair<const Function*, const LoopStmt*>> loops;
    for (const Function* f : reachable(cur))
      walk(f->body, [&](const Stmt& s) {
        if (const auto* l = s.as<LoopStmt>()) loops.emplace_back(f, l);
      });
    if (loops.empty()) return std::nullopt;
    const auto [f, l] = rng_.pick(loops);
    LoopPragma lp;
    if (rng_.coin()) {
      static constexpr std::int64_t kIIs[] = {0, 1, 2, 4};
      lp.pipeline_ii = kIIs[rng_.below(4)];
    } else {
      auto ds = divisors(l->trip_count);
      ds.insert(ds.begin(), 0);
      lp.unroll = rng_.pick(ds);
    }
    PragmaConfig cfg;
    cfg.loops[l->id] = lp;
    return Batch{ApplyPragmas{f->name, cfg, false}};
  }

  std::optional<Batch> restructure(const Design& cur) {
    Batch sites;
    for (const Function* f : reachable(cur)) {
      auto scan = [&](auto&& self, const Block& b) -> void {
        for (std::size_t i = 0; i < b.size(); ++i) {
          if (const auto* la = b[i].as<LoopStmt>()) {
            for (std::size_t j = i + 1; j < b.size(); ++j)
              if (const auto* lb = b[j].as<LoopStmt>(); lb && lb->trip_count == la->trip_count)
                sites.push_back(LoopFuse{f->name, la->id, lb->id});
            if (la->body.size() == 1 && la->body[0].as<LoopStmt>() && la->carried_dep_latency == 0 &&
                la->body[0].as<LoopStmt>()->carried_dep_latency == 0)
              sites.push_back(LoopReorder{f->name, la->id, la->body[0].id()});
            self(self, la->body);
          } else if (const auto* c = b[i].as<CallStmt>()) {
            sites.push_back(InlineCall{f->name, c->id});
          } else if (const auto* p = b[i].as<ParallelStmt>()) {
            for (const Block& br : p->branches) self(self, br);
          }
        }
      };
      scan(scan, f->body);
    }
    if (sites.empty()) return std::nullopt;
    return Batch{rng_.pick(sites)};
  }

  std::optional<Batch> memory(const Design& cur) {
    std::map<std::string, std::set<std::string>> users;
    for (const Function* f : reachable(cur))
      walk(f->body, [&](const Stmt& s) {
        if (const auto* a = s.as<AccessStmt>(); a && a->accesses() > 0 && !f->find_local(a->array) &&
                                                 cur.find_array(a->array))
          users[a->array].insert(f->name);
      });
    std::vector<const ArrayDecl*> shared, single;
    for (const auto& a : cur.arrays) {
      auto it = users.find(a.name);
      if (it == users.end() || a.length < 2) continue;
      if (a.partition && a.partition->ways(a.length) >= a.length) continue;
      (it->second.size() > 1 ? shared : single).push_back(&a);
    }
    const auto& pool = shared.empty() ? single : shared;
    if (pool.empty()) return std::nullopt;
    const ArrayDecl& a = *rng_.pick(pool);
    const std::int64_t ways = a.partition ? a.partition->ways(a.length) : 1;
    std::vector<Partition> options;
    for (std::int64_t f = std::max<std::int64_t>(2, ways * 2); f < a.length && options.size() < 2; f *= 2)
      options.push_back({PartitionMode::Cyclic, f});
    options.push_back({PartitionMode::Complete, 0});
    return Batch{RepartitionArray{a.name, rng_.pick(options)}};
  }

  std::optional<Batch> compute(const Design& cur) {
    Batch sites;
    for (const Function* f : reachable(cur))
      walk(f->body, [&](const Stmt& s) {
        if (const auto* l = s.as<LoopStmt>(); l && l->closed_form)
          sites.push_back(ClosedFormRewrite{f->name, l->id});
      });
    if (sites.empty()) return std::nullopt;
    return Batch{rng_.pick(sites)};
  }

  const std::vector<VariantSet>& sets_;
  Rng& rng_;
};

json history_json(const std::vector<ExplorationRecord>& rs) {
  json h = json::array();
  for (const auto& r : rs) h.push_back(to_json(r));
  return h;
}

class ExternalExplorer {
 public:
  ExternalExplorer(const ExplorerConfig& cfg, std::uint64_t seed) : timeout_(cfg.timeout) {
    CommandSpec cmd = cfg.command;
    for (auto& a : cmd.argv)
      if (a == "{seed}") a = std::to_string(seed);
    proc_.emplace(cmd);
  }
  ~ExternalExplorer() {
    try {
      proc_->close_stdin();
      proc_->finish();
    } catch (...) {
    }
  }

  // nullopt when the agent is done.
  std::optional<Batch> next(const Design& cur, const Metrics& m, std::int64_t budget,
                            const std::vector<ExplorationRecord>& history) {
    const json msg{{"design", to_json(cur)}, {"metrics", to_json(m)}, {"budget", budget},
                   {"history", history_json(history)}};
    proc_->write_line(msg.dump());
    auto line = proc_->read_line(timeout_);
    if (!line) throw ProtocolError("explorer closed its output");
    json reply;
    try {
      reply = parse_json_text(*line);
    } catch (const ParseError& e) {
      throw ProtocolError(std::string("malformed explorer message: ") + e.what());
    }
    if (!reply.is_object()) throw ProtocolError("explorer message must be an object");
    if (reply.contains("done")) {
      if (reply.at("done") != true) throw ProtocolError("'done' must be true");
      return std::nullopt;
    }
    if (!reply.contains("transforms") || !reply.at("transforms").is_array())
      throw ProtocolError("explorer message needs 'transforms' or 'done'");
    try {
      return transforms_from_json(reply.at("transforms"));
    } catch (const Error& e) {
      throw ProtocolError(std::string("bad transform from explorer: ") + e.what());
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("bad transform from explorer: ") + e.what());
    }
  }

 private:
  std::chrono::milliseconds timeout_;
  std::optional<LineProcess> proc_;
};

}  // namespace

std::vector<ExplorationRecord> targeted_refinement(const AgentContext& ctx, const ExplorerConfig& cfg,
                                                   std::uint64_t seed) {
  const Design base = instantiate(ctx.original, ctx.solution, ctx.variant_sets);
  const EquivalenceChecker checker(ctx.original);
  const Metrics base_metrics = ctx.evaluator.evaluate(base);

  std::vector<ExplorationRecord> records;
  auto record = [&](const Design& d, const Batch& applied, const Metrics& m, int step, std::string path) {
    records.push_back({design_ref(d), applied, m.latency, m.area, ctx.agent_index, step, ctx.solution.rank,
                       std::move(path)});
  };
  if (base_metrics.area <= ctx.budget) record(base, {}, base_metrics, 0, "instantiate");
  else
    spdlog::warn("agent {}: instantiated design of rank {} has area {} over budget {}", ctx.agent_index,
                 ctx.solution.rank, base_metrics.area, ctx.budget);

  Rng rng(seed);
  BuiltinProposer builtin(ctx.variant_sets, rng);
  std::unique_ptr<ExternalExplorer> external;
  if (cfg.kind == ExplorerConfig::Kind::External) {
    try {
      external = std::make_unique<ExternalExplorer>(cfg, seed);
    } catch (const Error& e) {
      spdlog::warn("agent {}: cannot start explorer ({}); using builtin proposers", ctx.agent_index, e.what());
    }
  }

  Design cur = base;
  Metrics cur_metrics = base_metrics;
  Batch applied;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    std::optional<Batch> batch;
    std::string path;
    if (external) {
      try {
        batch = external->next(cur, cur_metrics, ctx.budget, records);
        if (!batch) break;
        path = "external";
      } catch (const AdapterError& e) {
        spdlog::warn("agent {}: explorer failed at step {} ({}); continuing with builtin proposers",
                     ctx.agent_index, step, e.what());
        external.reset();
      }
    }
    if (!external) {
      auto weights = cfg.path_weights;
      while (!batch && std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0; })) {
        const std::size_t i = rng.weighted(weights);
        batch = builtin.propose(kPaths[i], cur);
        path = kPathNames[i];
        weights[i] = 0;
      }
      if (!batch) break;
    }
    Design candidate;
    try {
      candidate = apply_all(cur, *batch);
    } catch (const TransformError& e) {
      spdlog::debug("agent {} step {}: {}", ctx.agent_index, step, e.what());
      continue;
    }
    if (candidate == cur) continue;
    if (auto eq = checker.check(candidate); !eq) {
      spdlog::debug("agent {} step {}: rejected, {}", ctx.agent_index, step, eq.report);
      continue;
    }
    const Metrics m = ctx.evaluator.evaluate(candidate);
    if (m.area > ctx.budget) continue;
    const bool improves = m.latency < cur_metrics.latency;
    if (cfg.accept_rule == AcceptRule::StrictImprove && !improves) continue;
    Batch next_applied = applied;
    next_applied.insert(next_applied.end(), batch->begin(), batch->end());
    record(candidate, next_applied, m, step, path);
    if (improves || (cfg.accept_rule == AcceptRule::ParetoAdd && m.latency == cur_metrics.latency)) {
      cur = std::move(candidate);
      cur_metrics = m;
      applied = std::move(next_applied);
    }
  }
  return records;
}

std::vector<std::vector<ExplorationRecord>> run_stage2(const Design& original,
                                                       const std::vector<VariantSet>& sets,
                                                       const std::vector<IlpSolution>& solutions,
                                                       std::int64_t budget, const ExplorerConfig& cfg,
                                                       const Evaluator& evaluator, int agents_n) {
  if (solutions.empty()) throw InfeasibleError("no ILP solution to seed exploration agents");
  if (agents_n < 1) throw Error("agents_n must be >= 1");
  std::vector<std::future<std::vector<ExplorationRecord>>> jobs;
  for (int i = 1; i <= agents_n; ++i) {
    const IlpSolution& s = solutions[(i - 1) % solutions.size()];
    jobs.push_back(std::async(std::launch::async, [&, i, &s = s] {
      AgentContext ctx{original, sets, s, budget, evaluator, i};
      return targeted_refinement(ctx, cfg, cfg.seed + static_cast<std::uint64_t>(i));
    }));
  }
  std::vector<std::vector<ExplorationRecord>> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

ExplorationRecord select_final(const std::vector<ExplorationRecord>& records, std::int64_t budget) {
  if (records.empty()) throw InfeasibleError("no exploration records to select from");
  const ExplorationRecord* best = nullptr;
  auto key = [](const ExplorationRecord& r) { return std::tuple(r.latency, r.area, r.agent_index, r.step); };
  for (const auto& r : records)
    if (r.area <= budget && (!best || key(r) < key(*best))) best = &r;
  if (!best) throw InfeasibleError("no exploration record fits the area budget " + std::to_string(budget));
  return *best;
}

}  // namespace forge

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

#include <gtest/gtest.h>

#include <fstream>

#include "forge/call_graph.hpp"
#include "forge/design_io.hpp"
#include "forge/errors.hpp"
#include "forge/evaluator.hpp"
#include "forge/stage1.hpp"
#include "forge/stage2.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

using namespace std::chrono_literals;
using testing::adapter;
using testing::load_fixture;

// Stage-1 output and ILP solutions for a fixture under an ILP-level budget.
struct Prepared {
  Design design;
  std::vector<VariantSet> sets;
  LatencyModel model;
  std::int64_t fixed_area = 0;  // design area outside the ILP leaves
  std::vector<IlpSolution> solutions;
};

Prepared prepare(const std::string& name, std::int64_t run_budget, int n = 4) {
  Prepared p;
  p.design = load_fixture(name);
  const BuiltinEvaluator ev;
  p.sets = run_stage1(p.design, ilp_leaves(p.design), {}, ev);
  p.model = build_latency_model(extract_call_graph(p.design), p.design);
  std::int64_t leaf_area = 0;
  for (const auto& s : p.sets) leaf_area += s.baseline_metrics.area;
  p.fixed_area = estimate(p.design).area - leaf_area;
  p.solutions = solve_top_n({p.sets, p.model, run_budget - p.fixed_area}, n).solutions;
  return p;
}

IlpSolution all_v0(const std::vector<VariantSet>& sets) {
  IlpSolution s;
  s.rank = 1;
  for (const auto& vs : sets) s.choice[vs.function] = 0;
  return s;
}

ExplorerConfig builtin_cfg(int steps, std::uint64_t seed = 1) {
  ExplorerConfig c;
  c.seed = seed;
  c.max_steps = steps;
  return c;
}

// Checks the recorded-design invariants and returns the reconstructed designs.
void expect_valid_records(const Prepared& p, const IlpSolution& seed, const std::vector<ExplorationRecord>& rs,
                          std::int64_t budget) {
  const BuiltinEvaluator ev;
  for (const auto& r : rs) {
    SCOPED_TRACE("agent " + std::to_string(r.agent_index) + " step " + std::to_string(r.step));
    const Design d = reconstruct(p.design, p.sets, seed, r);
    EXPECT_EQ(design_ref(d), r.design_ref);
    EXPECT_LE(r.area, budget);
    EXPECT_EQ(ev.evaluate(d), (Metrics{r.latency, r.area}));
    EXPECT_TRUE(check_equivalence(p.design, d));
  }
}

TEST(Instantiate, AllBaselineIsOriginal) {
  const Prepared p = prepare("syn5", 100000);
  EXPECT_EQ(instantiate(p.design, all_v0(p.sets), p.sets), p.design);
}

// Pragma-only choices compose additively; alternates that partition a shared
// array can only make the sum of leaf areas overestimate the whole design.
TEST(Instantiate, AreaCompositionOnSyn5) {
  const Prepared p = prepare("syn5", 100000);
  Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    IlpSolution s = all_v0(p.sets);
    std::int64_t sum = p.fixed_area;
    bool alternate = false;
    for (const auto& vs : p.sets) {
      const Variant& v = rng.pick(vs.variants);
      s.choice[vs.function] = v.index;
      sum += v.metrics->area;
      alternate = alternate || v.index == 6;
    }
    const std::int64_t area = estimate(instantiate(p.design, s, p.sets)).area;
    if (alternate) {
      EXPECT_LE(area, sum);
    } else {
      EXPECT_EQ(area, sum);
    }
  }
}

TEST(Instantiate, DiscardedVariantIsAnError) {
  const Prepared p = prepare("minimal", 100);
  IlpSolution s = all_v0(p.sets);
  s.choice["main"] = 3;
  EXPECT_THROW(instantiate(p.design, s, p.sets), Error);
}

TEST(TargetedRefinement, ZeroStepsGivesInstantiatedRecord) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  const AgentContext ctx{p.design, p.sets, p.solutions[0], 900, ev, 1};
  const auto rs = targeted_refinement(ctx, builtin_cfg(0), 2);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].step, 0);
  EXPECT_EQ(rs[0].path, "instantiate");
  EXPECT_TRUE(rs[0].transforms_applied.empty());
  EXPECT_EQ(rs[0].design_ref, design_ref(instantiate(p.design, p.solutions[0], p.sets)));
}

TEST(TargetedRefinement, MemoryPathImprovesSharedArray) {
  // Pipelining every loop leaves the shared PTS array port-bound.
  const Prepared p = prepare("kmeans", 100000);
  const BuiltinEvaluator ev;
  IlpSolution base = all_v0(p.sets);
  for (const auto& vs : p.sets) {
    ASSERT_NE(vs.find(2), nullptr) << vs.function;
    base.choice[vs.function] = 2;
  }
  const std::int64_t inst = ev.evaluate(instantiate(p.design, base, p.sets)).latency;
  ExplorerConfig cfg = builtin_cfg(10);
  cfg.path_weights = {0, 0, 1, 0};
  const auto rs = targeted_refinement({p.design, p.sets, base, 100000, ev, 1}, cfg, 3);
  std::int64_t best = inst;
  for (const auto& r : rs) {
    if (r.path == "memory_optimization") best = std::min(best, r.latency);
  }
  EXPECT_LT(best, inst);
  expect_valid_records(p, base, rs, 100000);
}

TEST(TargetedRefinement, BudgetAtInstantiatedAreaIsNeverExceeded) {
  const Prepared p = prepare("kmeans", 100000);
  const BuiltinEvaluator ev;
  const IlpSolution base = all_v0(p.sets);
  const std::int64_t budget = ev.evaluate(instantiate(p.design, base, p.sets)).area;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rs = targeted_refinement({p.design, p.sets, base, budget, ev, 1}, builtin_cfg(25), seed);
    ASSERT_FALSE(rs.empty());
    for (const auto& r : rs) EXPECT_LE(r.area, budget);
  }
}

TEST(TargetedRefinement, StrictImproveRecordsOnlyImprovements) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  ExplorerConfig cfg = builtin_cfg(25);
  cfg.accept_rule = AcceptRule::StrictImprove;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto rs = targeted_refinement({p.design, p.sets, p.solutions[0], 900, ev, 1}, cfg, seed);
    for (std::size_t i = 1; i < rs.size(); ++i) EXPECT_LT(rs[i].latency, rs[i - 1].latency);
  }
}

TEST(TargetedRefinement, RecordsAreValidOnEveryFixture) {
  const BuiltinEvaluator ev;
  const std::map<std::string, std::int64_t> budgets{{"minimal", 20}, {"syn5", 900},  {"syn6", 900},
                                                    {"nw", 600},     {"aes", 800},   {"kmeans", 900},
                                                    {"streamcluster", 1100}};
  for (const auto& [name, budget] : budgets) {
    SCOPED_TRACE(name);
    const Prepared p = prepare(name, budget);
    ASSERT_FALSE(p.solutions.empty());
    for (const auto& s : p.solutions) {
      const auto rs = targeted_refinement({p.design, p.sets, s, budget, ev, 1}, builtin_cfg(25), 40 + s.rank);
      expect_valid_records(p, s, rs, budget);
    }
  }
}

TEST(RunStage2, ReplayIsBitIdentical) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  auto run = [&] {
    json out = json::array();
    for (const auto& agent : run_stage2(p.design, p.sets, p.solutions, 900, builtin_cfg(25, 7), ev, 4))
      for (const auto& r : agent) out.push_back(to_json(r));
    return out.dump();
  };
  EXPECT_EQ(run(), run());
}

TEST(RunStage2, AgentsAreNestedPrefixes) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  const auto two = run_stage2(p.design, p.sets, p.solutions, 900, builtin_cfg(25, 7), ev, 2);
  const auto four = run_stage2(p.design, p.sets, p.solutions, 900, builtin_cfg(25, 7), ev, 4);
  ASSERT_EQ(four.size(), 4u);
  for (std::size_t i = 0; i < two.size(); ++i) {
    ASSERT_EQ(two[i].size(), four[i].size());
    for (std::size_t k = 0; k < two[i].size(); ++k) EXPECT_EQ(to_json(two[i][k]), to_json(four[i][k]));
  }
}

TEST(SelectFinal, Examples) {
  ExplorationRecord a{"a", {}, 50, 10, 1, 0, 1, "instantiate"};
  ExplorationRecord b{"b", {}, 40, 12, 1, 1, 1, "memory_optimization"};
  EXPECT_EQ(select_final({a}, 10).design_ref, "a");
  EXPECT_EQ(select_final({a, b}, 12).design_ref, "b");
  EXPECT_EQ(select_final({a, b}, 11).design_ref, "a");
  EXPECT_THROW(select_final({a, b}, 9), InfeasibleError);
  EXPECT_THROW(select_final({}, 9), InfeasibleError);
  ExplorationRecord c{"c", {}, 40, 12, 2, 0, 2, "instantiate"};
  ExplorationRecord d{"d", {}, 40, 11, 3, 5, 3, "pragma_composition"};
  EXPECT_EQ(select_final({c, b}, 12).design_ref, "b");  // lower agent index
  EXPECT_EQ(select_final({c, b, d}, 12).design_ref, "d");  // smaller area
}

TEST(SelectFinal, MatchesExhaustiveScanOverFourAgents) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  std::vector<ExplorationRecord> all;
  for (const auto& agent : run_stage2(p.design, p.sets, p.solutions, 900, builtin_cfg(25, 3), ev, 4))
    all.insert(all.end(), agent.begin(), agent.end());
  const ExplorationRecord* best = nullptr;
  for (const auto& r : all) {
    if (r.area > 900) continue;
    if (!best || std::tie(r.latency, r.area, r.agent_index, r.step) <
                     std::tie(best->latency, best->area, best->agent_index, best->step))
      best = &r;
  }
  ASSERT_NE(best, nullptr);
  EXPECT_EQ(to_json(select_final(all, 900)), to_json(*best));
}

TEST(DesignRef, SixteenHexDigits) {
  const std::string ref = design_ref(load_fixture("minimal"));
  EXPECT_EQ(ref.size(), 16u);
  EXPECT_EQ(ref.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_NE(ref, design_ref(load_fixture("nw")));
}

TEST(ExplorerConfig, JsonRoundTripAndErrors) {
  ExplorerConfig c;
  c.seed = 9;
  c.max_steps = 3;
  c.accept_rule = AcceptRule::StrictImprove;
  c.path_weights = {0.5, 0, 2, 1};
  EXPECT_EQ(to_json(explorer_config_from_json(to_json(c))), to_json(c));
  EXPECT_THROW(explorer_config_from_json(json{{"kind", "external"}}), ParseError);
  EXPECT_THROW(explorer_config_from_json(json{{"accept_rule", "greedy"}}), ParseError);
  EXPECT_THROW(explorer_config_from_json(json{{"path_weights", {{"teleport", 1}}}}), ParseError);
  EXPECT_THROW(explorer_config_from_json(json{{"path_weights", {{"pragma_composition", 0}, {"code_restructuring", 0},
                                                                {"memory_optimization", 0},
                                                                {"compute_optimization", 0}}}}),
               ParseError);
}

// JSON-lines explorer protocol against a scripted agent.
ExplorerConfig external_cfg(const std::string& command) {
  ExplorerConfig c;
  c.kind = ExplorerConfig::Kind::External;
  c.seed = 100;
  c.max_steps = 25;
  c.command = CommandSpec::parse(command);
  c.timeout = 20s;
  return c;
}

std::vector<json> read_log(const std::filesystem::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

TEST(ExternalExplorer, ScriptedSessionFollowsProtocol) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  const auto dir = testing::scratch_dir("explorer_session");
  const auto log = dir / "log.jsonl";
  const auto cfg = external_cfg(adapter("explorer_scripted.py") + " {seed} " + log.string());
  const auto rs = targeted_refinement({p.design, p.sets, p.solutions[0], 900, ev, 1}, cfg, 101);
  const auto msgs = read_log(log);
  // F, O and E each have a loop; the fourth message is answered with done.
  ASSERT_EQ(msgs.size(), 4u);
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    EXPECT_EQ(msgs[i]["seed"], "101");
    EXPECT_EQ(msgs[i]["keys"], (json{"budget", "design", "history", "metrics"}));
    EXPECT_EQ(msgs[i]["budget"], 900);
  }
  EXPECT_EQ(msgs[0]["history"], 1);  // the instantiated record
  for (const auto& r : rs) EXPECT_TRUE(r.path == "instantiate" || r.path == "external") << r.path;
  expect_valid_records(p, p.solutions[0], rs, 900);
}

TEST(ExternalExplorer, TranscriptIsReproducible) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  auto session = [&](const std::string& tag) {
    const auto log = testing::scratch_dir(tag) / "log.jsonl";
    const auto cfg = external_cfg(adapter("explorer_scripted.py") + " {seed} " + log.string());
    json rs = json::array();
    for (const auto& r : targeted_refinement({p.design, p.sets, p.solutions[0], 900, ev, 1}, cfg, 101))
      rs.push_back(to_json(r));
    return std::pair(read_file(log), rs.dump());
  };
  EXPECT_EQ(session("transcript_a"), session("transcript_b"));
}

TEST(ExternalExplorer, MalformedReplyDegradesToBuiltin) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  for (const char* script : {"explorer_malformed.sh", "explorer_exit.sh"}) {
    SCOPED_TRACE(script);
    const auto rs = targeted_refinement({p.design, p.sets, p.solutions[0], 900, ev, 1},
                                        external_cfg(adapter(script)), 101);
    ASSERT_FALSE(rs.empty());
    bool builtin_step = false;
    for (const auto& r : rs) builtin_step = builtin_step || (r.path != "instantiate" && r.path != "external");
    EXPECT_TRUE(builtin_step);
    expect_valid_records(p, p.solutions[0], rs, 900);
  }
}

TEST(ExternalExplorer, MissingProgramDegradesToBuiltin) {
  const Prepared p = prepare("syn5", 900);
  const BuiltinEvaluator ev;
  const auto rs =
      targeted_refinement({p.design, p.sets, p.solutions[0], 900, ev, 1}, external_cfg("/nonexistent/agent"), 5);
  EXPECT_GT(rs.size(), 1u);
}

}  // namespace
}  // namespace forge

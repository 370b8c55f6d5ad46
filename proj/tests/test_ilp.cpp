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

#include "forge/call_graph.hpp"
#include "forge/cost_model.hpp"
#include "forge/errors.hpp"
#include "forge/ilp.hpp"
#include "forge/stage1.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

using testing::fixture_names;
using testing::load_fixture;
using testing::random_problem;

LatencyModel model_of(const std::string& fixture) {
  const Design d = load_fixture(fixture);
  return build_latency_model(extract_call_graph(d), d);
}

VariantSet make_set(const std::string& fn, std::vector<Metrics> ms) {
  VariantSet s;
  s.function = fn;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    Variant v;
    v.function = fn;
    v.index = static_cast<int>(i);
    v.status = VariantStatus::Correct;
    v.metrics = ms[i];
    s.variants.push_back(v);
  }
  s.baseline_metrics = ms.front();
  return s;
}

void expect_same(const IlpResult& a, const IlpResult& b) {
  EXPECT_EQ(a.infeasible, b.infeasible);
  EXPECT_EQ(a.min_area, b.min_area);
  EXPECT_EQ(a.solutions, b.solutions);
}

TEST(LatencyModel, FixtureStructures) {
  EXPECT_EQ(to_string(model_of("nw").root), "(L_FM + L_TB + L_RS)");
  EXPECT_EQ(to_string(model_of("syn6").root), "5x[(max(L_F, L_O) + 2*L_E)]");
  EXPECT_EQ(to_string(model_of("aes").root), "(L_INIT + L_KE + 11*L_ARK + 10*L_SB + 10*L_SR + 9*L_MC)");
  EXPECT_EQ(to_string(model_of("syn5").root), "5x[max((L_F + L_O), 2*L_F, (L_E + L_F))]");
  EXPECT_EQ(to_string(model_of("minimal").root), "L_main");
}

TEST(LatencyModel, Deterministic) {
  for (const auto& name : fixture_names()) EXPECT_EQ(model_of(name), model_of(name)) << name;
}

TEST(LatencyModel, MismatchedGraphIsRejected) {
  const Design nw = load_fixture("nw");
  EXPECT_THROW(build_latency_model(extract_call_graph(load_fixture("aes")), nw), ValidationError);
}

// With baseline leaf latencies the model reproduces the whole-design estimate
// on every fixture (their top functions hold only calls and control).
TEST(LatencyModel, AgreesWithEstimateAtBaseline) {
  for (const auto& name : fixture_names()) {
    const Design d = load_fixture(name);
    std::map<std::string, std::int64_t> lat;
    for (const auto& f : ilp_leaves(d)) lat[f] = estimate_function(d, f).latency;
    EXPECT_EQ(eval_model(model_of(name), lat), estimate(d).latency) << name;
  }
}

TEST(EvalModel, Examples) {
  EXPECT_EQ(eval_model({ModelNode::leaf("X")}, {{"X", 7}}), 7);
  EXPECT_EQ(eval_model(model_of("syn5"), {{"F", 10}, {"O", 5}, {"E", 8}}), 100);
  EXPECT_EQ(eval_model(model_of("syn6"), {{"F", 4}, {"O", 9}, {"E", 3}}), 75);
  EXPECT_THROW(eval_model(model_of("syn6"), {{"F", 4}, {"O", 9}}), Error);
}

TEST(EvalModel, RationalScaleRoundsUpOnce) {
  const LatencyModel m{ModelNode::sum({ModelNode::scale(Rational::of(1, 2), ModelNode::leaf("A")),
                                       ModelNode::scale(Rational::of(1, 2), ModelNode::leaf("B"))})};
  EXPECT_EQ(eval_model(m, {{"A", 1}, {"B", 1}}), 1);
  EXPECT_EQ(eval_model(m, {{"A", 1}, {"B", 2}}), 2);
  EXPECT_EQ(Rational::of(6, 4), Rational::of(3, 2));
}

TEST(EvalModel, JsonRoundTrip) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const ModelNode n = testing::random_model(rng, {"a", "b", "c", "d"});
    EXPECT_EQ(model_node_from_json(to_json(n)), n);
  }
}

TEST(EvalModelProperty, MonotoneInEveryLeaf) {
  Rng rng(6);
  const std::vector<std::string> leaves{"a", "b", "c", "d", "e"};
  for (int i = 0; i < 300; ++i) {
    const LatencyModel m{testing::random_model(rng, leaves)};
    std::map<std::string, std::int64_t> lat;
    for (const auto& l : leaves) lat[l] = rng.range(0, 50);
    const auto base = eval_model(m, lat);
    auto bumped = lat;
    bumped[rng.pick(leaves)] += rng.range(1, 20);
    EXPECT_GE(eval_model(m, bumped), base) << to_string(m.root);
  }
}

TEST(SolveTopN, SingleFunctionExample) {
  IlpProblem p{{make_set("f", {{10, 5}, {4, 8}})}, {ModelNode::leaf("f")}, 8};
  const IlpResult r = solve_top_n(p, 2);
  ASSERT_EQ(r.solutions.size(), 2u);
  EXPECT_EQ(r.solutions[0].choice.at("f"), 1);
  EXPECT_EQ(r.solutions[0].predicted_latency, 4);
  EXPECT_EQ(r.solutions[0].rank, 1);
  EXPECT_EQ(r.solutions[1].choice.at("f"), 0);
  EXPECT_EQ(r.solutions[1].predicted_latency, 10);
  EXPECT_EQ(r.solutions[1].rank, 2);
}

TEST(SolveTopN, BudgetExcludesFastestPair) {
  IlpProblem p{{make_set("a", {{10, 2}, {3, 9}}), make_set("b", {{8, 2}, {2, 9}})},
               {ModelNode::sum({ModelNode::leaf("a"), ModelNode::leaf("b")})},
               12};
  const IlpResult r = solve_top_n(p, 4);
  expect_same(r, brute_force_oracle(p, 4));
  ASSERT_EQ(r.solutions.size(), 3u);
  EXPECT_EQ(r.solutions[0].predicted_latency, 11);  // a1 + b0
  for (const auto& s : r.solutions) EXPECT_LE(s.total_area, 12);
}

TEST(SolveTopN, InfeasibleReportsMinimumArea) {
  IlpProblem p{{make_set("a", {{10, 5}, {3, 9}}), make_set("b", {{8, 4}})},
               {ModelNode::sum({ModelNode::leaf("a"), ModelNode::leaf("b")})},
               8};
  const IlpResult r = solve_top_n(p, 3);
  EXPECT_TRUE(r.infeasible);
  EXPECT_TRUE(r.solutions.empty());
  EXPECT_EQ(r.min_area, 9);
  EXPECT_NE(r.report.find('9'), std::string::npos) << r.report;
}

TEST(SolveTopN, Errors) {
  IlpProblem empty{{}, {ModelNode::leaf("a")}, 10};
  EXPECT_THROW(solve_top_n(empty, 1), Error);
  EXPECT_THROW(brute_force_oracle(empty, 1), Error);
  IlpProblem p{{make_set("a", {{1, 1}})}, {ModelNode::leaf("a")}, 10};
  EXPECT_THROW(solve_top_n(p, 0), Error);
}

TEST(BruteForceOracle, GuardRefusesHugeSpaces) {
  IlpProblem p;
  std::vector<ModelNode> leaves;
  for (int i = 0; i < 8; ++i) {
    const std::string fn = "f" + std::to_string(i);
    p.variant_sets.push_back(make_set(fn, std::vector<Metrics>(7, Metrics{1, 1})));
    leaves.push_back(ModelNode::leaf(fn));
  }
  p.model.root = ModelNode::sum(leaves);
  p.area_budget = 100;
  EXPECT_THROW(brute_force_oracle(p, 1), Error);  // 7^8 > 10^6
  EXPECT_EQ(solve_top_n(p, 1).solutions.size(), 1u);
}

TEST(IlpProperty, MatchesOracleOnRandomInstances) {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const IlpProblem p = random_problem(rng);
    const int n = static_cast<int>(rng.range(1, 5));
    SCOPED_TRACE("instance " + std::to_string(i) + ": " + to_string(p.model.root));
    expect_same(solve_top_n(p, n), brute_force_oracle(p, n));
  }
}

TEST(IlpProperty, SolutionsRespectBudgetAndPartition) {
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const IlpProblem p = random_problem(rng);
    const IlpResult r = solve_top_n(p, 5);
    for (std::size_t k = 0; k < r.solutions.size(); ++k) {
      const auto& s = r.solutions[k];
      EXPECT_EQ(s.rank, static_cast<int>(k) + 1);
      EXPECT_LE(s.total_area, p.area_budget);
      ASSERT_EQ(s.choice.size(), p.variant_sets.size());
      std::int64_t area = 0;
      std::map<std::string, std::int64_t> lat;
      for (const auto& vs : p.variant_sets) {
        const Variant* v = vs.find(s.choice.at(vs.function));
        ASSERT_NE(v, nullptr);
        area += v->metrics->area;
        lat[vs.function] = v->metrics->latency;
      }
      EXPECT_EQ(area, s.total_area);
      EXPECT_EQ(eval_model(p.model, lat), s.predicted_latency);
      if (k > 0) {
        EXPECT_LE(r.solutions[k - 1].predicted_latency, s.predicted_latency);
      }
    }
  }
}

TEST(IlpProperty, RelaxingBudgetNeverRaisesBestLatency) {
  Rng rng(100);
  for (int i = 0; i < 200; ++i) {
    IlpProblem p = random_problem(rng);
    const IlpResult tight = solve_top_n(p, 1);
    p.area_budget += rng.range(1, 20);
    const IlpResult loose = solve_top_n(p, 1);
    if (tight.infeasible) continue;
    ASSERT_FALSE(loose.infeasible);
    EXPECT_LE(loose.solutions[0].predicted_latency, tight.solutions[0].predicted_latency);
  }
}

TEST(IlpJson, SolutionRoundTrip) {
  IlpSolution s{{{"F", 2}, {"O", 0}}, 120, 44, 3};
  EXPECT_EQ(ilp_solution_from_json(to_json(s)), s);
}

}  // namespace
}  // namespace forge

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

#include "forge/design_io.hpp"
#include "forge/errors.hpp"
#include "forge/transforms.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

using testing::fixture_names;
using testing::load_fixture;

// Two trip-4 loops; the second reads a[3], which the first loop writes on its
// last iteration, so fusing them changes the result.
Design two_loops(int trip_b = 4) {
  const json j = {
      {"ir_version", 1},
      {"name", "fuse"},
      {"top", "main"},
      {"arrays",
       {{{"name", "a"}, {"length", 4}, {"base_ports", 2}, {"storage_area", 8}},
        {{"name", "s"}, {"length", 1}, {"base_ports", 2}, {"storage_area", 0}}}},
      {"functions",
       {{{"name", "main"},
         {"params", json::array()},
         {"local_arrays", json::array()},
         {"body",
          {{{"kind", "Loop"},
            {"id", "la"},
            {"trip_count", 4},
            {"body",
             {{{"kind", "Compute"}, {"id", "ca"}, {"op_class", "add"}, {"count", 1}, {"effect", "a[la] = a[la] + 1"}}}}},
           {{"kind", "Loop"},
            {"id", "lb"},
            {"trip_count", trip_b},
            {"body",
             {{{"kind", "Compute"}, {"id", "cb"}, {"op_class", "mul"}, {"count", 1}, {"effect", "s = s * 3 + a[3]"}}}}}}}}}},
      {"test_vectors", {{{"inputs", {{"a", {1, 2, 3, 4}}}}, {"expected_outputs", json::object()}}}}};
  return load_design(j.dump());
}

std::size_t stmt_count(const Block& b) {
  std::size_t n = 0;
  walk(b, [&](const Stmt&) { ++n; });
  return n;
}

TEST(Transforms, ApplyPragmasSetsDirective) {
  const Design d = load_fixture("syn5");
  PragmaConfig cfg;
  cfg.loops["f1"] = LoopPragma{1, std::nullopt};
  const Design out = forge::apply(d, ApplyPragmas{"F", cfg, false});
  EXPECT_EQ(find_loop(out.function("F").body, "f1")->pipeline_ii, 1);
  EXPECT_FALSE(find_loop(d.function("F").body, "f1")->pipeline_ii.has_value()) << "input mutated";
  EXPECT_TRUE(check_equivalence(d, out));
}

TEST(Transforms, ZeroClearsDirective) {
  const Design d = load_fixture("syn5");
  PragmaConfig set, clear;
  set.loops["f1"] = LoopPragma{2, 4};
  clear.loops["f1"] = LoopPragma{0, 0};
  const Design out = forge::apply(forge::apply(d, ApplyPragmas{"F", set, false}), ApplyPragmas{"F", clear, false});
  EXPECT_EQ(out, d);
}

TEST(Transforms, UnrollMustDivideTripCount) {
  PragmaConfig cfg;
  cfg.loops["f1"] = LoopPragma{std::nullopt, 3};
  EXPECT_THROW(forge::apply(load_fixture("syn5"), ApplyPragmas{"F", cfg, false}), TransformError);
}

TEST(Transforms, FuseKeepsStatementCount) {
  const Design d = two_loops();
  const Design out = forge::apply(d, LoopFuse{"main", "la", "lb"});
  const Block& body = out.function("main").body;
  ASSERT_EQ(body.size(), 1u);
  EXPECT_EQ(body[0].as<LoopStmt>()->body.size(), 2u);
  EXPECT_EQ(stmt_count(body), stmt_count(d.function("main").body) - 1);
}

TEST(Transforms, FuseRejectsUnequalTripCounts) {
  EXPECT_THROW(forge::apply(two_loops(8), LoopFuse{"main", "la", "lb"}), TransformError);
}

TEST(Transforms, DependentFuseIsCaughtByEquivalence) {
  const Design d = two_loops();
  const auto verdict = check_equivalence(d, forge::apply(d, LoopFuse{"main", "la", "lb"}));
  EXPECT_FALSE(verdict);
  EXPECT_FALSE(verdict.report.empty());
}

TEST(Transforms, ClosedFormRewritePreservesOutputs) {
  const Design d = load_fixture("syn5");
  const Design out = forge::apply(d, ClosedFormRewrite{"E", "e1"});
  EXPECT_EQ(find_loop(out.function("E").body, "e1"), nullptr);
  EXPECT_TRUE(check_equivalence(d, out));
}

TEST(Transforms, ClosedFormRewriteNeedsAnnotation) {
  EXPECT_THROW(forge::apply(load_fixture("syn5"), ClosedFormRewrite{"E", "e2"}), TransformError);
}

TEST(Transforms, ReorderPerfectNest) {
  const Design d = load_fixture("nw");
  const Design out = forge::apply(d, LoopReorder{"FM", "i", "j"});
  const auto* outer = out.function("FM").body[0].as<LoopStmt>();
  ASSERT_NE(outer, nullptr);
  EXPECT_EQ(outer->id, "j");
  EXPECT_TRUE(check_equivalence(d, out));
}

TEST(Transforms, ReorderRejectsCarriedDependence) {
  Design d = load_fixture("nw");
  find_loop(d.function("FM").body, "j")->carried_dep_latency = 1;
  EXPECT_THROW(forge::apply(d, LoopReorder{"FM", "i", "j"}), TransformError);
}

TEST(Transforms, InlineCallPreservesOutputsAndPrunesCallee) {
  const Design d = load_fixture("nw");
  const Design out = forge::apply(d, InlineCall{"main", "c1"});
  EXPECT_EQ(out.find_function("FM"), nullptr);
  EXPECT_TRUE(check_equivalence(d, out));
}

TEST(Transforms, InlineSharedCalleeKeepsOtherCallers) {
  const Design d = load_fixture("syn5");
  const Design out = forge::apply(d, InlineCall{"main", "c1"});
  EXPECT_NE(out.find_function("F"), nullptr);
  EXPECT_TRUE(check_equivalence(d, out));
}

TEST(Transforms, MissingTargetsFail) {
  const Design d = load_fixture("syn5");
  EXPECT_THROW(forge::apply(d, InlineCall{"main", "nope"}), TransformError);
  EXPECT_THROW(forge::apply(d, RepartitionArray{"nope", {}}), TransformError);
  EXPECT_THROW(forge::apply(d, LoopFuse{"ghost", "a", "b"}), TransformError);
}

TEST(Transforms, JsonRoundTrip) {
  PragmaConfig cfg;
  cfg.loops["l"] = LoopPragma{1, 2};
  cfg.arrays["A"] = Partition{PartitionMode::Cyclic, 4};
  cfg.calls["c"] = true;
  const std::vector<Transform> ts{ApplyPragmas{"F", cfg, true},
                                  LoopFuse{"F", "a", "b"},
                                  LoopReorder{"F", "o", "i"},
                                  InlineCall{"main", "c1"},
                                  RepartitionArray{"A", Partition{PartitionMode::Complete, 2}},
                                  ClosedFormRewrite{"E", "e1"}};
  EXPECT_EQ(transforms_from_json(to_json(std::span<const Transform>(ts))), ts);
  EXPECT_THROW(transform_from_json(json{{"transform", "Teleport"}}), ParseError);
}

// Directive-only transforms never change interpreter outputs.
TEST(TransformProperty, PragmaOnlyTransformsPreserveSemantics) {
  Rng rng(7);
  int applied = 0;
  for (const auto& name : fixture_names()) {
    const Design d = load_fixture(name);
    const EquivalenceChecker checker(d);
    for (int trial = 0; trial < 40; ++trial) {
      Design cur = d;
      for (int k = 0; k < 3; ++k) {
        Transform t;
        if (rng.coin() && !d.arrays.empty()) {
          const auto& a = rng.pick(d.arrays);
          t = RepartitionArray{a.name, rng.coin() ? Partition{PartitionMode::Complete, 2}
                                                  : Partition{PartitionMode::Cyclic, rng.range(2, 8)}};
        } else {
          const auto& f = rng.pick(cur.functions);
          std::vector<const LoopStmt*> loops;
          walk(f.body, [&](const Stmt& s) {
            if (const auto* l = s.as<LoopStmt>()) loops.push_back(l);
          });
          if (loops.empty()) continue;
          const LoopStmt* l = rng.pick(loops);
          PragmaConfig cfg;
          cfg.loops[l->id] = LoopPragma{rng.range(0, 4), rng.coin() ? l->trip_count : 1};
          t = ApplyPragmas{f.name, cfg, rng.coin()};
        }
        ASSERT_TRUE(is_pragma_only(t));
        cur = forge::apply(cur, t);
        ++applied;
      }
      const auto verdict = checker.check(cur);
      EXPECT_TRUE(verdict) << name << ": " << verdict.report;
    }
  }
  EXPECT_GT(applied, 500);
}

TEST(Equivalence, ReflexiveAndSymmetric) {
  for (const auto& name : fixture_names()) {
    const Design d = load_fixture(name);
    EXPECT_TRUE(check_equivalence(d, d)) << name;
  }
  // Symmetry on a semantic change: perturbing either side is detected the same way.
  Rng rng(11);
  const Design d = load_fixture("kmeans");
  for (int i = 0; i < 10; ++i) {
    auto fault = testing::inject_fault(d, rng);
    ASSERT_TRUE(fault);
    Design faulty = fault->design;
    faulty.test_vectors = d.test_vectors;
    EXPECT_EQ(check_equivalence(d, faulty).correct, check_equivalence(faulty, d).correct) << fault->description;
  }
}

TEST(Equivalence, DetectsInjectedFaults) {
  Rng rng(3);
  for (const auto& name : fixture_names()) {
    const Design d = load_fixture(name);
    for (int i = 0; i < 5; ++i) {
      auto fault = testing::inject_fault(d, rng);
      ASSERT_TRUE(fault) << name;
      EXPECT_FALSE(check_equivalence(d, fault->design)) << name << ": " << fault->description;
    }
  }
}

}  // namespace
}  // namespace forge

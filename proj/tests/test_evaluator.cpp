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

#include <cstdlib>
#include <fstream>
#include <future>

#include "forge/errors.hpp"
#include "forge/evaluator.hpp"
#include "test_support.hpp"

namespace forge {
namespace {

using namespace std::chrono_literals;
using testing::adapter;
using testing::load_fixture;

CommandSpec cmd(const std::string& script) { return CommandSpec::parse(adapter(script)); }

TEST(EvaluateExternal, EchoAdapterPassesThrough) {
  EXPECT_EQ(evaluate_external(load_fixture("minimal"), cmd("metrics_echo.sh"), 10s), (Metrics{5, 7}));
}

TEST(EvaluateExternal, NonzeroExitIsAdapterFailure) {
  try {
    evaluate_external(load_fixture("minimal"), cmd("metrics_fail.sh"), 10s);
    FAIL() << "expected AdapterError";
  } catch (const ProtocolError&) {
    FAIL() << "nonzero exit must not be reported as a protocol error";
  } catch (const AdapterError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos) << e.what();
  }
}

TEST(EvaluateExternal, NonNumericLatencyIsProtocolError) {
  EXPECT_THROW(evaluate_external(load_fixture("minimal"), cmd("metrics_nonnumeric.sh"), 10s), ProtocolError);
}

TEST(EvaluateExternal, LatencyRangeUsesRoundedUpMidpoint) {
  EXPECT_EQ(evaluate_external(load_fixture("minimal"), cmd("metrics_range.sh"), 10s), (Metrics{12, 9}));
}

TEST(EvaluateExternal, TimeoutKillsAdapter) {
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(evaluate_external(load_fixture("minimal"), cmd("metrics_slow.sh"), 300ms), AdapterError);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 10s);
}

TEST(EvaluateExternal, AdapterSeesTheDesign) {
  // 1 Compute, 0 loops in the minimal fixture.
  EXPECT_EQ(evaluate_external(load_fixture("minimal"), cmd("metrics_count.py"), 10s), (Metrics{1, 0}));
}

TEST(EvaluateExternal, MissingCommandIsAdapterFailure) {
  EXPECT_THROW(evaluate_external(load_fixture("minimal"), CommandSpec::parse("/nonexistent/adapter"), 10s),
               AdapterError);
}

TEST(ParseMetricsReply, Shapes) {
  EXPECT_EQ(parse_metrics_reply("{\"latency\": 3, \"area\": 4}\ntrailing"), (Metrics{3, 4}));
  EXPECT_EQ(parse_metrics_reply("{\"latency\": {\"min\": 4, \"max\": 4}, \"area\": 1}"), (Metrics{4, 1}));
  EXPECT_THROW(parse_metrics_reply(""), ParseError);
  EXPECT_THROW(parse_metrics_reply("{\"latency\": 3}"), ParseError);
  EXPECT_THROW(parse_metrics_reply("{\"latency\": 3.5, \"area\": 1}"), ParseError);
  EXPECT_THROW(parse_metrics_reply("{\"latency\": {\"min\": 5, \"max\": 4}, \"area\": 1}"), ParseError);
  EXPECT_THROW(parse_metrics_reply("{\"latency\": -1, \"area\": 1}"), ParseError);
}

TEST(ExternalEvaluator, SemaphoreBoundsConcurrentAdapters) {
  const auto dir = testing::scratch_dir("concurrency");
  ExternalEvaluator ev(CommandSpec::parse(adapter("metrics_concurrency.py") + " " + dir.string()), 30s, 2);
  const Design d = load_fixture("minimal");
  std::vector<std::future<Metrics>> jobs;
  for (int i = 0; i < 6; ++i) jobs.push_back(std::async(std::launch::async, [&] { return ev.evaluate(d); }));
  for (auto& j : jobs) EXPECT_EQ(j.get(), (Metrics{1, 1}));
  std::ifstream log(dir / "log");
  int seen = 0, calls = 0, peak = 0;
  while (log >> seen) {
    ++calls;
    peak = std::max(peak, seen);
  }
  EXPECT_EQ(calls, 6);
  EXPECT_LE(peak, 2);
}

TEST(ExternalEvaluator, EvaluatesFunctionSubdesign) {
  ExternalEvaluator ev(cmd("metrics_count.py"), 30s);
  // nw RS: one loop with one Compute that carries an effect.
  const Metrics m = ev.evaluate_function(load_fixture("nw"), "RS");
  EXPECT_EQ(m.area, 1);
  EXPECT_GE(m.latency, 1);
}

TEST(FunctionSubdesign, RestrictsToSubtree) {
  const Design sub = function_subdesign(load_fixture("nw"), "RS");
  EXPECT_EQ(sub.top, "RS");
  ASSERT_EQ(sub.functions.size(), 1u);
  EXPECT_TRUE(sub.test_vectors.empty());
}

TEST(MakeEvaluator, Specs) {
  EXPECT_EQ(make_evaluator("builtin")->name(), "builtin");
  EXPECT_EQ(make_evaluator("")->name(), "builtin");
  const auto ext = make_evaluator("cmd:" + adapter("metrics_echo.sh"), {}, 10s);
  EXPECT_EQ(ext->evaluate(load_fixture("minimal")), (Metrics{5, 7}));
  EXPECT_THROW(make_evaluator("vitis"), ParseError);
  EXPECT_THROW(make_evaluator("cmd:"), ParseError);
}

TEST(AdapterTimeout, ReadsEnvironment) {
  ::setenv("FORGE_ADAPTER_TIMEOUT", "3", 1);
  EXPECT_EQ(adapter_timeout_from_env(), 3000ms);
  ::setenv("FORGE_ADAPTER_TIMEOUT", "soon", 1);
  EXPECT_EQ(adapter_timeout_from_env(), std::chrono::milliseconds(kDefaultAdapterTimeout));
  ::unsetenv("FORGE_ADAPTER_TIMEOUT");
  EXPECT_EQ(adapter_timeout_from_env(), std::chrono::milliseconds(kDefaultAdapterTimeout));
}

}  // namespace
}  // namespace forge

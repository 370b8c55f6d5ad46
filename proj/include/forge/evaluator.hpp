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

#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include "forge/cost_model.hpp"
#include "forge/ir.hpp"
#include "forge/metrics.hpp"
#include "forge/subprocess.hpp"

namespace forge {

inline constexpr std::chrono::seconds kDefaultAdapterTimeout{600};
inline constexpr int kDefaultAdapterConcurrency = 4;

// FORGE_ADAPTER_TIMEOUT (seconds) when set and valid, else the default.
std::chrono::milliseconds adapter_timeout_from_env();

// Parses {"latency": int | {"min": int, "max": int}, "area": int}. A latency
// range is reduced to its midpoint, rounded up.
Metrics parse_metrics_reply(std::string_view text);

// Sends the design on stdin, reads one metrics line from stdout.
// Throws AdapterError on nonzero exit or timeout, ProtocolError on a bad reply.
Metrics evaluate_external(const Design& d, const CommandSpec& cmd,
                          std::chrono::milliseconds timeout = kDefaultAdapterTimeout);

// The design restricted to `function`'s call subtree with that function as
// top and no test vectors.
Design function_subdesign(const Design& d, const std::string& function);

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Metrics evaluate(const Design& d) const = 0;
  virtual Metrics evaluate_function(const Design& d, const std::string& function) const = 0;
  virtual std::string name() const = 0;
};

class BuiltinEvaluator final : public Evaluator {
 public:
  explicit BuiltinEvaluator(CostParams params = {}) : params_(params) {}
  Metrics evaluate(const Design& d) const override { return estimate(d, params_); }
  Metrics evaluate_function(const Design& d, const std::string& fn) const override {
    return estimate_function(d, fn, params_);
  }
  std::string name() const override { return "builtin"; }
  const CostParams& params() const { return params_; }

 private:
  CostParams params_;
};

class ExternalEvaluator final : public Evaluator {
 public:
  ExternalEvaluator(CommandSpec cmd, std::chrono::milliseconds timeout,
                    int max_concurrent = kDefaultAdapterConcurrency);
  Metrics evaluate(const Design& d) const override;
  Metrics evaluate_function(const Design& d, const std::string& fn) const override;
  std::string name() const override { return "cmd:" + cmd_.str(); }

 private:
  CommandSpec cmd_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<std::counting_semaphore<256>> slots_;
};

// "builtin" or "cmd:<command line>".
std::unique_ptr<Evaluator> make_evaluator(std::string_view spec, const CostParams& params = {},
                                          std::chrono::milliseconds timeout = adapter_timeout_from_env());

}  // namespace forge

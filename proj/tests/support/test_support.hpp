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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/harness.hpp"
#include "forge/ilp.hpp"
#include "forge/ir.hpp"
#include "forge/rng.hpp"

namespace forge::testing {

std::filesystem::path fixture_path(const std::string& name);
Design load_fixture(const std::string& name);
const std::vector<std::string>& fixture_names();
// Fixtures that have a global array accessed from more than one function.
std::vector<std::string> shared_array_fixtures();

// Shipped config with output redirected under `out_dir`.
RunConfig fixture_config(const std::string& name, const std::filesystem::path& out_dir);

std::string adapter(const std::string& script);  // absolute path of tests/adapters/<script>
std::filesystem::path scratch_dir(const std::string& tag);

struct Fault {
  Design design;
  std::string description;
};

// Deletes or perturbs (adds a nonzero constant to) one effectful Compute in a
// reachable function.
std::optional<Fault> inject_fault(const Design& d, Rng& rng);

ModelNode random_model(Rng& rng, const std::vector<std::string>& leaves);
IlpProblem random_problem(Rng& rng, int max_functions = 5, int max_variants = 7);

// Builders for small hand-written designs.
namespace ir {
using nlohmann::json;
inline json compute(const std::string& id, const std::string& effect, const std::string& op = "add") {
  json j{{"kind", "Compute"}, {"id", id}, {"op_class", op}, {"count", 1}};
  if (!effect.empty()) j["effect"] = effect;
  return j;
}
inline json access(const std::string& id, const std::string& array, int reads, int writes = 0) {
  return {{"kind", "Access"}, {"id", id}, {"array", array}, {"reads_per_iter", reads}, {"writes_per_iter", writes}};
}
inline json loop(const std::string& id, int trip, json body, int dep = 0) {
  return {{"kind", "Loop"}, {"id", id}, {"trip_count", trip}, {"carried_dep_latency", dep}, {"body", std::move(body)}};
}
inline json call(const std::string& id, const std::string& callee) {
  return {{"kind", "Call"}, {"id", id}, {"callee", callee}};
}
inline json fn(const std::string& name, json body, json params = json::array()) {
  return {{"name", name}, {"params", std::move(params)}, {"local_arrays", json::array()}, {"body", std::move(body)}};
}
inline json arr(const std::string& name, int length, int ports = 2) {
  return {{"name", name}, {"length", length}, {"base_ports", ports}, {"storage_area", 0}};
}
inline json design(json arrays, json functions, json vectors = json::array()) {
  return {{"ir_version", 1}, {"name", "t"}, {"top", "main"}, {"arrays", std::move(arrays)},
          {"functions", std::move(functions)}, {"test_vectors", std::move(vectors)}};
}
}  // namespace ir

}  // namespace forge::testing

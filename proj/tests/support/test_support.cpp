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

#include "test_support.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "forge/design_io.hpp"

namespace forge::testing {

namespace fs = std::filesystem;

fs::path fixture_path(const std::string& name) { return fs::path(FORGE_FIXTURE_DIR) / (name + ".json"); }

Design load_fixture(const std::string& name) { return load_design_file(fixture_path(name)); }

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{"minimal", "syn5", "syn6", "nw", "aes", "kmeans", "streamcluster"};
  return names;
}

std::vector<std::string> shared_array_fixtures() {
  std::vector<std::string> out;
  for (const auto& name : fixture_names()) {
    const Design d = load_fixture(name);
    std::map<std::string, std::set<std::string>> users;
    for (const auto& f : d.functions)
      walk(f.body, [&](const Stmt& s) {
        if (const auto* a = s.as<AccessStmt>(); a && d.find_array(a->array)) users[a->array].insert(f.name);
      });
    if (std::any_of(users.begin(), users.end(), [](const auto& kv) { return kv.second.size() > 1; }))
      out.push_back(name);
  }
  return out;
}

RunConfig fixture_config(const std::string& name, const fs::path& out_dir) {
  RunConfig c = load_run_config(fs::path(FORGE_FIXTURE_DIR) / "configs" / (name + ".json"));
  c.output_dir = out_dir;
  return c;
}

std::string adapter(const std::string& script) { return (fs::path(FORGE_TEST_ADAPTER_DIR) / script).string(); }

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::path(FORGE_TEST_SCRATCH_DIR) / tag;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

namespace {

// Blocks whose statements execute (closed_form bodies excluded).
void executable_blocks(Block& b, std::vector<Block*>& out) {
  out.push_back(&b);
  for (Stmt& s : b) {
    if (auto* l = s.as<LoopStmt>()) executable_blocks(l->body, out);
    if (auto* p = s.as<ParallelStmt>())
      for (Block& br : p->branches) executable_blocks(br, out);
  }
}

}  // namespace

std::optional<Fault> inject_fault(const Design& d, Rng& rng) {
  Fault f{d, {}};
  std::vector<std::pair<Block*, std::size_t>> sites;
  std::vector<std::string> fn_of_site;
  for (const auto& name : reachable_functions(f.design)) {
    std::vector<Block*> blocks;
    executable_blocks(f.design.function(name).body, blocks);
    for (Block* b : blocks)
      for (std::size_t i = 0; i < b->size(); ++i)
        if (const auto* c = (*b)[i].as<ComputeStmt>(); c && c->effect) {
          sites.emplace_back(b, i);
          fn_of_site.push_back(name);
        }
  }
  if (sites.empty()) return std::nullopt;
  const std::size_t pick = rng.below(sites.size());
  auto [block, idx] = sites[pick];
  const std::string id = (*block)[idx].id();
  if (rng.coin()) {
    block->erase(block->begin() + static_cast<std::ptrdiff_t>(idx));
    f.description = "delete " + fn_of_site[pick] + "/" + id;
  } else {
    auto* c = (*block)[idx].as<ComputeStmt>();
    const std::int64_t k = rng.range(1, 9);
    c->effect->value = Expr::binary('+', c->effect->value, Expr::constant(k));
    f.description = "perturb " + fn_of_site[pick] + "/" + id + " by +" + std::to_string(k);
  }
  return f;
}

ModelNode random_model(Rng& rng, const std::vector<std::string>& leaves) {
  auto wrap = [&](ModelNode n) {
    switch (rng.below(6)) {
      case 0: return ModelNode::loop_mul(rng.range(2, 10), std::move(n));
      case 1: return ModelNode::scale(Rational::of(rng.range(1, 12), rng.range(1, 4)), std::move(n));
      default: return n;
    }
  };
  auto build = [&](auto&& self, std::vector<std::string> group) -> ModelNode {
    if (group.size() == 1) {
      ModelNode leaf = ModelNode::leaf(group[0]);
      // occasionally reuse the leaf, as repeated calls do
      if (rng.below(4) == 0) leaf = ModelNode::sum({leaf, wrap(ModelNode::leaf(group[0]))});
      return wrap(std::move(leaf));
    }
    const std::size_t parts = 2 + rng.below(std::min<std::size_t>(group.size() - 1, 2));
    std::vector<std::vector<std::string>> split(parts);
    for (std::size_t i = 0; i < group.size(); ++i) split[i < parts ? i : rng.below(parts)].push_back(group[i]);
    std::vector<ModelNode> kids;
    for (auto& s : split) kids.push_back(self(self, s));
    return wrap(rng.coin() ? ModelNode::sum(std::move(kids)) : ModelNode::max(std::move(kids)));
  };
  std::vector<std::string> shuffled = leaves;
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  return build(build, shuffled);
}

IlpProblem random_problem(Rng& rng, int max_functions, int max_variants) {
  IlpProblem p;
  const int k = static_cast<int>(rng.range(1, max_functions));
  std::vector<std::string> names;
  std::int64_t min_area = 0, max_area = 0;
  for (int i = 0; i < k; ++i) {
    VariantSet vs;
    vs.function = "f" + std::to_string(i);
    names.push_back(vs.function);
    const int m = static_cast<int>(rng.range(1, max_variants));
    // surviving indices: 0 plus a random subset of 1..6
    std::vector<int> idx{0};
    for (int j = 1; j < 7 && static_cast<int>(idx.size()) < m; ++j)
      if (rng.below(7 - j) < static_cast<std::uint64_t>(m - static_cast<int>(idx.size()))) idx.push_back(j);
    std::int64_t lo = INT64_MAX, hi = 0;
    for (int j : idx) {
      Variant v;
      v.function = vs.function;
      v.index = j;
      v.status = VariantStatus::Correct;
      // small ranges so ties in latency and area actually occur
      v.metrics = Metrics{rng.range(1, 40), rng.range(0, 30)};
      lo = std::min(lo, v.metrics->area);
      hi = std::max(hi, v.metrics->area);
      vs.variants.push_back(std::move(v));
    }
    vs.baseline_metrics = *vs.variants.front().metrics;
    min_area += lo;
    max_area += hi;
    p.variant_sets.push_back(std::move(vs));
  }
  p.model.root = random_model(rng, names);
  // mostly binding budgets, sometimes infeasible or slack
  p.area_budget = rng.range(std::max<std::int64_t>(0, min_area - 5), max_area + 5);
  return p;
}

}  // namespace forge::testing

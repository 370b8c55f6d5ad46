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

#include "forge/ilp.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

#include "forge/errors.hpp"

namespace forge {

using nlohmann::json;

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw Error("latency model arithmetic overflow");
  return static_cast<std::int64_t>(v);
}

Rational reduce(i128 n, i128 d) {
  if (d == 0) throw Error("rational with zero denominator");
  if (d < 0) n = -n, d = -d;
  i128 a = n < 0 ? -n : n, b = d;
  while (b != 0) a = std::exchange(b, a % b);
  if (a > 1) n /= a, d /= a;
  return {narrow(n), narrow(d)};
}

}  // namespace

Rational Rational::of(std::int64_t n, std::int64_t d) { return reduce(n, d); }

std::int64_t Rational::ceil() const {
  std::int64_t q = num / den;
  if (num % den != 0 && num > 0) ++q;
  return q;
}

Rational operator+(Rational a, Rational b) {
  return reduce(i128(a.num) * b.den + i128(b.num) * a.den, i128(a.den) * b.den);
}

Rational operator*(Rational a, Rational b) { return reduce(i128(a.num) * b.num, i128(a.den) * b.den); }

bool operator<(Rational a, Rational b) { return i128(a.num) * b.den < i128(b.num) * a.den; }

std::string to_string(Rational r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

ModelNode ModelNode::leaf(std::string f) {
  ModelNode n;
  n.function = std::move(f);
  return n;
}

ModelNode ModelNode::sum(std::vector<ModelNode> c) {
  ModelNode n;
  n.kind = Kind::Sum;
  n.children = std::move(c);
  return n;
}

ModelNode ModelNode::max(std::vector<ModelNode> c) {
  ModelNode n;
  n.kind = Kind::Max;
  n.children = std::move(c);
  return n;
}

ModelNode ModelNode::scale(Rational k, ModelNode c) {
  if (k.num <= 0) throw Error("Scale constant must be positive");
  ModelNode n;
  n.kind = Kind::Scale;
  n.constant = k;
  n.children.push_back(std::move(c));
  return n;
}

ModelNode ModelNode::loop_mul(std::int64_t count, ModelNode c) {
  if (count <= 0) throw Error("LoopMul count must be positive");
  ModelNode n;
  n.kind = Kind::LoopMul;
  n.count = count;
  n.children.push_back(std::move(c));
  return n;
}

std::string to_string(const ModelNode& n) {
  auto joined = [&](const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < n.children.size(); ++i) s += (i ? sep : "") + to_string(n.children[i]);
    return s;
  };
  switch (n.kind) {
    case ModelNode::Kind::Leaf: return "L_" + n.function;
    case ModelNode::Kind::Sum: return "(" + joined(" + ") + ")";
    case ModelNode::Kind::Max: return "max(" + joined(", ") + ")";
    case ModelNode::Kind::Scale: return to_string(n.constant) + "*" + to_string(n.children.at(0));
    case ModelNode::Kind::LoopMul: return std::to_string(n.count) + "x[" + to_string(n.children.at(0)) + "]";
  }
  return {};
}

json to_json(const ModelNode& n) {
  json kids = json::array();
  for (const auto& c : n.children) kids.push_back(to_json(c));
  switch (n.kind) {
    case ModelNode::Kind::Leaf: return {{"node", "Leaf"}, {"function", n.function}};
    case ModelNode::Kind::Sum: return {{"node", "Sum"}, {"children", kids}};
    case ModelNode::Kind::Max: return {{"node", "Max"}, {"children", kids}};
    case ModelNode::Kind::Scale:
      return {{"node", "Scale"}, {"num", n.constant.num}, {"den", n.constant.den}, {"child", kids.at(0)}};
    case ModelNode::Kind::LoopMul: return {{"node", "LoopMul"}, {"count", n.count}, {"child", kids.at(0)}};
  }
  return {};
}

ModelNode model_node_from_json(const json& j) {
  const auto kind = j.at("node").get<std::string>();
  if (kind == "Leaf") return ModelNode::leaf(j.at("function").get<std::string>());
  if (kind == "Sum" || kind == "Max") {
    std::vector<ModelNode> kids;
    for (const auto& c : j.at("children")) kids.push_back(model_node_from_json(c));
    return kind == "Sum" ? ModelNode::sum(std::move(kids)) : ModelNode::max(std::move(kids));
  }
  if (kind == "Scale")
    return ModelNode::scale(Rational::of(j.at("num").get<std::int64_t>(), j.value("den", std::int64_t{1})),
                            model_node_from_json(j.at("child")));
  if (kind == "LoopMul")
    return ModelNode::loop_mul(j.at("count").get<std::int64_t>(), model_node_from_json(j.at("child")));
  throw ParseError("model.node", "unknown node kind '" + kind + "'");
}

std::vector<std::string> leaf_functions(const ModelNode& n) {
  std::vector<std::string> out;
  auto rec = [&](auto&& self, const ModelNode& m) -> void {
    if (m.kind == ModelNode::Kind::Leaf) {
      if (std::find(out.begin(), out.end(), m.function) == out.end()) out.push_back(m.function);
      return;
    }
    for (const auto& c : m.children) self(self, c);
  };
  rec(rec, n);
  return out;
}

namespace {

std::optional<ModelNode> raw_model(const Block& b);

std::optional<ModelNode> raw_model(const Stmt& s) {
  if (const auto* c = s.as<CallStmt>()) return ModelNode::leaf(c->callee);
  if (const auto* l = s.as<LoopStmt>()) {
    auto body = raw_model(l->body);
    if (!body) return std::nullopt;
    return ModelNode::loop_mul(l->trip_count, std::move(*body));
  }
  if (const auto* p = s.as<ParallelStmt>()) {
    std::vector<ModelNode> branches;
    for (const Block& br : p->branches)
      if (auto m = raw_model(br)) branches.push_back(std::move(*m));
    if (branches.empty()) return std::nullopt;
    if (branches.size() == 1) return std::move(branches.front());
    return ModelNode::max(std::move(branches));
  }
  return std::nullopt;
}

std::optional<ModelNode> raw_model(const Block& b) {
  std::vector<ModelNode> parts;
  for (const Stmt& s : b)
    if (auto m = raw_model(s)) parts.push_back(std::move(*m));
  if (parts.empty()) return std::nullopt;
  if (parts.size() == 1) return std::move(parts.front());
  return ModelNode::sum(std::move(parts));
}

// Σ of items; linear items (leaf, coefficient) are merged at their first
// position.
struct Form {
  struct Item {
    std::optional<ModelNode> nonlinear;
    std::string leaf;
    Rational coeff;
  };
  std::vector<Item> items;

  bool linear() const {
    return std::all_of(items.begin(), items.end(), [](const Item& i) { return !i.nonlinear; });
  }
  void add_linear(const std::string& f, Rational c) {
    for (auto& it : items)
      if (!it.nonlinear && it.leaf == f) {
        it.coeff = it.coeff + c;
        return;
      }
    items.push_back({std::nullopt, f, c});
  }
  void add(Form other) {
    for (auto& it : other.items) {
      if (it.nonlinear) items.push_back(std::move(it));
      else add_linear(it.leaf, it.coeff);
    }
  }
  void scale(Rational k) {
    for (auto& it : items) it.coeff = it.coeff * k;
  }
  ModelNode node() const {
    std::vector<ModelNode> terms;
    for (const auto& it : items) {
      if (it.nonlinear) terms.push_back(*it.nonlinear);
      else if (it.coeff == Rational::of(1)) terms.push_back(ModelNode::leaf(it.leaf));
      else terms.push_back(ModelNode::scale(it.coeff, ModelNode::leaf(it.leaf)));
    }
    if (terms.size() == 1) return std::move(terms.front());
    return ModelNode::sum(std::move(terms));
  }
};

Form normalize(const ModelNode& n) {
  Form f;
  switch (n.kind) {
    case ModelNode::Kind::Leaf:
      f.add_linear(n.function, Rational::of(1));
      break;
    case ModelNode::Kind::Sum:
      for (const auto& c : n.children) f.add(normalize(c));
      break;
    case ModelNode::Kind::Max: {
      std::vector<ModelNode> kids;
      for (const auto& c : n.children) kids.push_back(normalize(c).node());
      f.items.push_back({ModelNode::max(std::move(kids)), {}, Rational::of(1)});
      break;
    }
    case ModelNode::Kind::Scale:
    case ModelNode::Kind::LoopMul: {
      const Rational k = n.kind == ModelNode::Kind::Scale ? n.constant : Rational::of(n.count);
      Form inner = normalize(n.children.at(0));
      if (inner.linear()) {
        inner.scale(k);
        return inner;
      }
      ModelNode kid = inner.node();
      f.items.push_back({n.kind == ModelNode::Kind::Scale ? ModelNode::scale(k, std::move(kid))
                                                          : ModelNode::loop_mul(n.count, std::move(kid)),
                         {}, Rational::of(1)});
      break;
    }
  }
  return f;
}

}  // namespace

LatencyModel build_latency_model(const CallGraph& g, const Design& d) {
  const Function& top = d.function(d.top);
  const std::vector<std::string> leaves = ilp_leaves(d);
  std::set<std::string> from_graph;
  for (const auto* e : g.edges_from(d.top)) from_graph.insert(e->callee);
  const bool top_only = leaves.size() == 1 && leaves.front() == d.top;
  if (top_only ? !from_graph.empty() : from_graph != std::set<std::string>(leaves.begin(), leaves.end()))
    throw ValidationError("call graph does not match design '" + d.name + "'");
  if (std::find(g.nodes.begin(), g.nodes.end(), d.top) == g.nodes.end())
    throw ValidationError("call graph has no node for top '" + d.top + "'");
  auto raw = raw_model(top.body);
  if (!raw) return {ModelNode::leaf(d.top)};
  return {normalize(*raw).node()};
}

Rational eval_model_exact(const ModelNode& n, const std::map<std::string, std::int64_t>& latencies) {
  switch (n.kind) {
    case ModelNode::Kind::Leaf: {
      auto it = latencies.find(n.function);
      if (it == latencies.end()) throw Error("latency model leaf '" + n.function + "' is unbound");
      return Rational::of(it->second);
    }
    case ModelNode::Kind::Sum: {
      Rational acc = Rational::of(0);
      for (const auto& c : n.children) acc = acc + eval_model_exact(c, latencies);
      return acc;
    }
    case ModelNode::Kind::Max: {
      Rational acc = Rational::of(0);
      for (const auto& c : n.children) acc = std::max(acc, eval_model_exact(c, latencies));
      return acc;
    }
    case ModelNode::Kind::Scale: return n.constant * eval_model_exact(n.children.at(0), latencies);
    case ModelNode::Kind::LoopMul: return Rational::of(n.count) * eval_model_exact(n.children.at(0), latencies);
  }
  return {};
}

std::int64_t eval_model(const LatencyModel& m, const std::map<std::string, std::int64_t>& latencies) {
  return eval_model_exact(m.root, latencies).ceil();
}

json to_json(const IlpSolution& s) {
  return {{"rank", s.rank}, {"choice", s.choice}, {"predicted_latency", s.predicted_latency},
          {"total_area", s.total_area}};
}

IlpSolution ilp_solution_from_json(const json& j) {
  IlpSolution s;
  s.rank = j.at("rank").get<int>();
  s.choice = j.at("choice").get<std::map<std::string, int>>();
  s.predicted_latency = j.at("predicted_latency").get<std::int64_t>();
  s.total_area = j.at("total_area").get<std::int64_t>();
  return s;
}

json to_json(const IlpResult& r) {
  json sols = json::array();
  for (const auto& s : r.solutions) sols.push_back(to_json(s));
  json j{{"solutions", sols}, {"infeasible", r.infeasible}, {"min_area", r.min_area}};
  if (r.infeasible) j["report"] = r.report;
  return j;
}

namespace {

struct Option {
  int index;
  std::int64_t latency, area;
};

// Problem with model leaves rebound to variant-set slots.
struct Compiled {
  struct Node {
    ModelNode::Kind kind;
    int slot = -1;
    Rational k = Rational::of(1);
    std::vector<Node> kids;
  };
  Node root;
  std::vector<std::string> functions;
  std::vector<std::vector<Option>> options;
  std::int64_t budget = 0;

  Rational eval(const Node& n, const std::vector<std::int64_t>& lat) const {
    switch (n.kind) {
      case ModelNode::Kind::Leaf: return Rational::of(lat[n.slot]);
      case ModelNode::Kind::Sum: {
        Rational acc = Rational::of(0);
        for (const auto& c : n.kids) acc = acc + eval(c, lat);
        return acc;
      }
      case ModelNode::Kind::Max: {
        Rational acc = Rational::of(0);
        for (const auto& c : n.kids) acc = std::max(acc, eval(c, lat));
        return acc;
      }
      default: return n.k * eval(n.kids.at(0), lat);
    }
  }
};

Compiled compile(const IlpProblem& p) {
  if (p.variant_sets.empty()) throw Error("ILP problem has no variant sets");
  Compiled c;
  c.budget = p.area_budget;
  for (const auto& vs : p.variant_sets) {
    if (vs.variants.empty()) throw Error("variant set of '" + vs.function + "' is empty");
    if (std::find(c.functions.begin(), c.functions.end(), vs.function) != c.functions.end())
      throw Error("duplicate variant set for '" + vs.function + "'");
    c.functions.push_back(vs.function);
    std::vector<Option> opts;
    for (const auto& v : vs.variants) {
      if (!v.metrics) throw Error("variant " + std::to_string(v.index) + " of '" + vs.function + "' has no metrics");
      opts.push_back({v.index, v.metrics->latency, v.metrics->area});
    }
    std::sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) { return a.index < b.index; });
    c.options.push_back(std::move(opts));
  }
  auto rec = [&](auto&& self, const ModelNode& n) -> Compiled::Node {
    Compiled::Node out;
    out.kind = n.kind;
    if (n.kind == ModelNode::Kind::Leaf) {
      auto it = std::find(c.functions.begin(), c.functions.end(), n.function);
      if (it == c.functions.end()) throw Error("latency model leaf '" + n.function + "' has no variant set");
      out.slot = static_cast<int>(it - c.functions.begin());
    }
    if (n.kind == ModelNode::Kind::Scale) out.k = n.constant;
    if (n.kind == ModelNode::Kind::LoopMul) out.k = Rational::of(n.count);
    for (const auto& k : n.children) out.kids.push_back(self(self, k));
    return out;
  };
  c.root = rec(rec, p.model.root);
  return c;
}

std::int64_t min_total_area(const Compiled& c) {
  std::int64_t a = 0;
  for (const auto& opts : c.options)
    a += std::min_element(opts.begin(), opts.end(), [](auto& x, auto& y) { return x.area < y.area; })->area;
  return a;
}

IlpResult infeasible(std::int64_t min_area, std::int64_t budget) {
  IlpResult r;
  r.infeasible = true;
  r.min_area = min_area;
  r.report = "no assignment fits the area budget " + std::to_string(budget) + "; minimum achievable area is " +
             std::to_string(min_area);
  return r;
}

using Key = std::tuple<std::int64_t, std::int64_t, std::vector<int>>;  // latency, area, positions

IlpSolution to_solution(const Compiled& c, const Key& k, int rank) {
  IlpSolution s;
  s.predicted_latency = std::get<0>(k);
  s.total_area = std::get<1>(k);
  s.rank = rank;
  const auto& pos = std::get<2>(k);
  for (std::size_t i = 0; i < pos.size(); ++i) s.choice[c.functions[i]] = c.options[i][pos[i]].index;
  return s;
}

// Depth-first over functions in order, options in index order, so the first
// assignment reaching a given (latency, area) is also the lexicographically
// smallest one.
class BranchAndBound {
 public:
  BranchAndBound(const Compiled& c, const std::set<std::vector<int>>& cuts) : c_(c), cuts_(cuts) {
    const std::size_t k = c.options.size();
    min_lat_.resize(k);
    suffix_area_.assign(k + 1, 0);
    for (std::size_t i = k; i-- > 0;) {
      std::int64_t ma = INT64_MAX, ml = INT64_MAX;
      for (const auto& o : c.options[i]) ma = std::min(ma, o.area), ml = std::min(ml, o.latency);
      min_lat_[i] = ml;
      suffix_area_[i] = suffix_area_[i + 1] + ma;
    }
    lat_ = min_lat_;
    pos_.assign(k, 0);
  }

  std::optional<Key> run() {
    dfs(0, 0);
    return best_;
  }

 private:
  void dfs(std::size_t k, std::int64_t area) {
    if (k == pos_.size()) {
      if (cuts_.count(pos_)) return;
      Key key{c_.eval(c_.root, lat_).ceil(), area, pos_};
      if (!best_ || key < *best_) best_ = std::move(key);
      return;
    }
    const auto& opts = c_.options[k];
    for (std::size_t i = 0; i < opts.size(); ++i) {
      const std::int64_t a = area + opts[i].area;
      const std::int64_t area_lb = a + suffix_area_[k + 1];
      if (area_lb > c_.budget) continue;
      lat_[k] = opts[i].latency;
      pos_[k] = static_cast<int>(i);
      const std::int64_t lat_lb = c_.eval(c_.root, lat_).ceil();
      if (best_ && std::pair(lat_lb, area_lb) >= std::pair(std::get<0>(*best_), std::get<1>(*best_))) continue;
      dfs(k + 1, a);
    }
    lat_[k] = min_lat_[k];
    pos_[k] = 0;
  }

  const Compiled& c_;
  const std::set<std::vector<int>>& cuts_;
  std::vector<std::int64_t> min_lat_, suffix_area_, lat_;
  std::vector<int> pos_;
  std::optional<Key> best_;
};

}  // namespace

IlpResult solve_top_n(const IlpProblem& p, int n) {
  if (n < 1) throw Error("solve_top_n needs n >= 1");
  const Compiled c = compile(p);
  const std::int64_t min_area = min_total_area(c);
  if (min_area > c.budget) return infeasible(min_area, c.budget);
  IlpResult r;
  r.min_area = min_area;
  std::set<std::vector<int>> cuts;
  for (int rank = 1; rank <= n; ++rank) {
    auto best = BranchAndBound(c, cuts).run();
    if (!best) break;
    cuts.insert(std::get<2>(*best));
    r.solutions.push_back(to_solution(c, *best, rank));
  }
  return r;
}

IlpResult brute_force_oracle(const IlpProblem& p, int n) {
  if (n < 1) throw Error("brute_force_oracle needs n >= 1");
  const Compiled c = compile(p);
  std::int64_t space = 1;
  for (const auto& o : c.options) {
    space *= static_cast<std::int64_t>(o.size());
    if (space > kOracleGuard)
      throw Error("brute-force space exceeds the guard of " + std::to_string(kOracleGuard) + " assignments");
  }
  const std::int64_t min_area = min_total_area(c);
  std::vector<Key> feasible;
  std::vector<int> pos(c.options.size(), 0);
  for (std::int64_t it = 0; it < space; ++it) {
    std::map<std::string, std::int64_t> lat;
    std::int64_t area = 0;
    for (std::size_t k = 0; k < pos.size(); ++k) {
      lat[c.functions[k]] = c.options[k][pos[k]].latency;
      area += c.options[k][pos[k]].area;
    }
    if (area <= c.budget) feasible.emplace_back(eval_model(p.model, lat), area, pos);
    for (std::size_t k = pos.size(); k-- > 0;) {
      if (++pos[k] < static_cast<int>(c.options[k].size())) break;
      pos[k] = 0;
    }
  }
  if (feasible.empty()) return infeasible(min_area, c.budget);
  std::sort(feasible.begin(), feasible.end());
  IlpResult r;
  r.min_area = min_area;
  for (int i = 0; i < n && i < static_cast<int>(feasible.size()); ++i)
    r.solutions.push_back(to_solution(c, feasible[i], i + 1));
  return r;
}

}  // namespace forge

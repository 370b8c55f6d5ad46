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

#include "forge/call_graph.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "forge/errors.hpp"

namespace forge {

namespace {

struct Site {
  std::string callee;
  EdgeKind kind;
  std::int64_t multiplier;
};

void collect(const Block& b, std::int64_t mult, bool in_parallel, std::vector<Site>& out) {
  for (const Stmt& s : b) {
    if (const auto* l = s.as<LoopStmt>()) {
      collect(l->body, mult * l->trip_count, in_parallel, out);
    } else if (const auto* p = s.as<ParallelStmt>()) {
      for (const Block& br : p->branches) collect(br, mult, true, out);
    } else if (const auto* c = s.as<CallStmt>()) {
      out.push_back({c->callee, in_parallel ? EdgeKind::Parallel : EdgeKind::Sequential, mult});
    }
  }
}

}  // namespace

std::vector<const CallEdge*> CallGraph::edges_from(const std::string& caller) const {
  std::vector<const CallEdge*> out;
  for (const auto& e : edges)
    if (e.caller == caller) out.push_back(&e);
  return out;
}

std::string to_string(EdgeKind k) { return k == EdgeKind::Parallel ? "parallel" : "sequential"; }

CallGraph extract_call_graph(const Design& d) {
  CallGraph g;
  for (const auto& f : d.functions) {
    g.nodes.push_back(f.name);
    std::vector<Site> sites;
    collect(f.body, 1, false, sites);
    for (const Site& s : sites) {
      if (!d.find_function(s.callee))
        throw ValidationError("function '" + f.name + "' calls missing function '" + s.callee + "'");
      auto it = std::find_if(g.edges.begin(), g.edges.end(), [&](const CallEdge& e) {
        return e.caller == f.name && e.callee == s.callee && e.kind == s.kind;
      });
      if (it == g.edges.end()) {
        g.edges.push_back({f.name, s.callee, s.kind, s.multiplier});
      } else {
        it->loop_multiplier += s.multiplier;
      }
    }
  }

  // Cycle detection: colour DFS over caller -> callee.
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  for (const auto& n : g.nodes) mark[n] = Mark::White;
  std::vector<std::string> path;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    mark[n] = Mark::Grey;
    path.push_back(n);
    for (const CallEdge* e : g.edges_from(n)) {
      if (mark[e->callee] == Mark::Grey) {
        std::string cycle;
        auto start = std::find(path.begin(), path.end(), e->callee);
        for (auto it = start; it != path.end(); ++it) cycle += *it + " -> ";
        throw ValidationError("call graph cycle (recursion unsupported): " + cycle + e->callee);
      }
      if (mark[e->callee] == Mark::White) visit(e->callee);
    }
    path.pop_back();
    mark[n] = Mark::Black;
  };
  for (const auto& n : g.nodes)
    if (mark[n] == Mark::White) visit(n);
  return g;
}

}  // namespace forge

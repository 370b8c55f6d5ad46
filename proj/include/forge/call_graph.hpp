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

#include <cstdint>
#include <string>
#include <vector>

#include "forge/ir.hpp"

namespace forge {

enum class EdgeKind { Sequential, Parallel };

struct CallEdge {
  std::string caller;
  std::string callee;
  EdgeKind kind = EdgeKind::Sequential;
  // Invocations of callee per invocation of caller, summed over the call
  // sites of this kind (each site contributes the product of its enclosing
  // trip counts).
  std::int64_t loop_multiplier = 1;

  friend bool operator==(const CallEdge&, const CallEdge&) = default;
};

struct CallGraph {
  std::vector<std::string> nodes;  // declaration order
  std::vector<CallEdge> edges;     // caller order, then first call site

  std::vector<const CallEdge*> edges_from(const std::string& caller) const;
};

// Throws ValidationError on a missing callee or on recursion.
CallGraph extract_call_graph(const Design& d);

std::string to_string(EdgeKind k);

}  // namespace forge

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
#include <map>
#include <string>

#include "forge/ir.hpp"

namespace forge {

using Outputs = std::map<std::string, Value>;

struct InterpretLimits {
  // Statement executions before the run is aborted as non-terminating.
  std::int64_t max_steps = 50'000'000;
};

// Executes the top function on a test vector. Returns the final values of the
// names listed in tv.expected_outputs (all top parameters and global arrays
// when that list is empty). Pragmas and Access statements have no semantic
// effect. Throws InterpretError on out-of-bounds accesses, unbound names,
// division by zero, or exceeding the step limit.
Outputs interpret(const Design& d, const TestVector& tv, const InterpretLimits& limits = {});

}  // namespace forge

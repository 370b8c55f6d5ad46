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
#include <string>
#include <string_view>

#include <json.hpp>

#include "forge/ir.hpp"

namespace forge {

using json = nlohmann::json;

// Parses a design document and validates every invariant. Throws ParseError
// (syntax or schema shape, with location) or ValidationError.
Design load_design(std::string_view text);
Design load_design_file(const std::filesystem::path& path);

// Schema-shape parsing only; no cross-reference validation.
Design design_from_json(const json& j);
json to_json(const Design& d);
std::string serialize(const Design& d);

void validate(const Design& d);

json to_json(const Value& v);
Value value_from_json(const json& j, const std::string& path);
json to_json(const Partition& p);
Partition partition_from_json(const json& j, const std::string& path);
json to_json(const Block& b);

// Parses JSON text, reporting syntax errors as ParseError("line L, column C").
json parse_json_text(std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace forge

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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace forge {

// Integer expressions of the executable IR subset. Nodes are immutable and
// shared; copying an Expr tree is cheap.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Constant, Ref, Negate, Binary };

  Kind kind = Kind::Constant;
  std::int64_t value = 0;  // Constant
  std::string name;        // Ref: identifier (storage name or loop id)
  ExprPtr lhs;             // Ref: optional index; Negate: operand; Binary: left
  ExprPtr rhs;             // Binary: right
  char op = 0;             // Binary: one of + - * / % & | ^

  static ExprPtr constant(std::int64_t v);
  static ExprPtr ref(std::string name, ExprPtr index = nullptr);
  static ExprPtr negate(ExprPtr operand);
  static ExprPtr binary(char op, ExprPtr l, ExprPtr r);
};

bool equal(const ExprPtr& a, const ExprPtr& b);

// `dst = value` or `dst[index] = value`.
struct Effect {
  std::string target;
  ExprPtr target_index;  // may be null (element 0)
  ExprPtr value;

  friend bool operator==(const Effect& a, const Effect& b) {
    return a.target == b.target && equal(a.target_index, b.target_index) &&
           equal(a.value, b.value);
  }
};

// Parse errors throw ParseError with the column in the location.
ExprPtr parse_expr(std::string_view text);
Effect parse_effect(std::string_view text);

std::string to_string(const ExprPtr& e);
std::string to_string(const Effect& e);

using Renamer = std::function<std::string(const std::string&)>;
ExprPtr rename(const ExprPtr& e, const Renamer& f);
Effect rename(const Effect& e, const Renamer& f);

// Calls `f` for every identifier referenced (including the effect target).
void for_each_name(const ExprPtr& e, const std::function<void(const std::string&)>& f);
void for_each_name(const Effect& e, const std::function<void(const std::string&)>& f);

// Wrapping two's-complement arithmetic; throws InterpretError on x/0 and x%0.
std::int64_t apply_binary(char op, std::int64_t a, std::int64_t b);

}  // namespace forge

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

#include "forge/expr.hpp"

#include <cctype>

#include "forge/errors.hpp"

namespace forge {

ExprPtr Expr::constant(std::int64_t v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Constant;
  e->value = v;
  return e;
}

ExprPtr Expr::ref(std::string name, ExprPtr index) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Ref;
  e->name = std::move(name);
  e->lhs = std::move(index);
  return e;
}

ExprPtr Expr::negate(ExprPtr operand) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Negate;
  e->lhs = std::move(operand);
  return e;
}

ExprPtr Expr::binary(char op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Constant:
      return a->value == b->value;
    case Expr::Kind::Ref:
      return a->name == b->name && equal(a->lhs, b->lhs);
    case Expr::Kind::Negate:
      return equal(a->lhs, b->lhs);
    case Expr::Kind::Binary:
      return a->op == b->op && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
  return false;
}

namespace {

// Precedence climbing; levels low to high: | ^ & , + - , * / %
int precedence(char op) {
  switch (op) {
    case '|': return 1;
    case '^': return 2;
    case '&': return 3;
    case '+': case '-': return 4;
    case '*': case '/': case '%': return 5;
    default: return -1;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr expression(int min_prec = 1) {
    ExprPtr lhs = unary();
    for (;;) {
      skip_ws();
      if (at_end()) return lhs;
      const char op = text_[pos_];
      const int prec = precedence(op);
      if (prec < min_prec) return lhs;
      ++pos_;
      ExprPtr rhs = expression(prec + 1);
      lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
    }
  }

  Effect effect() {
    skip_ws();
    Effect out;
    out.target = identifier();
    skip_ws();
    if (peek('[')) {
      ++pos_;
      out.target_index = expression();
      expect(']');
    }
    expect('=');
    out.value = expression();
    finish();
    return out;
  }

  void finish() {
    skip_ws();
    if (!at_end()) fail("unexpected trailing input");
  }

 private:
  ExprPtr unary() {
    skip_ws();
    if (peek('-')) {
      ++pos_;
      return Expr::negate(unary());
    }
    if (peek('(')) {
      ++pos_;
      ExprPtr inner = expression();
      expect(')');
      return inner;
    }
    if (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) return number();
    std::string name = identifier();
    skip_ws();
    ExprPtr index;
    if (peek('[')) {
      ++pos_;
      index = expression();
      expect(']');
    }
    return Expr::ref(std::move(name), std::move(index));
  }

  ExprPtr number() {
    std::int64_t v = 0;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      const int digit = text_[pos_] - '0';
      if (v > (INT64_MAX - digit) / 10) fail("integer literal out of range");
      v = v * 10 + digit;
      ++pos_;
    }
    return Expr::constant(v);
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    if (at_end() || !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      fail("expected identifier");
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) const { return !at_end() && text_[pos_] == c; }
  bool at_end() const { return pos_ >= text_.size(); }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("column " + std::to_string(pos_ + 1), msg + " in '" + std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const ExprPtr& e, std::string& out, bool top) {
  switch (e->kind) {
    case Expr::Kind::Constant:
      if (e->value < 0) {
        // Only reachable for programmatically built trees.
        out += "(-" + std::to_string(-(e->value + 1)) + " - 1)";
      } else {
        out += std::to_string(e->value);
      }
      return;
    case Expr::Kind::Ref:
      out += e->name;
      if (e->lhs) {
        out += '[';
        print(e->lhs, out, true);
        out += ']';
      }
      return;
    case Expr::Kind::Negate:
      out += '-';
      print(e->lhs, out, false);
      return;
    case Expr::Kind::Binary:
      if (!top) out += '(';
      print(e->lhs, out, false);
      out += ' ';
      out += e->op;
      out += ' ';
      print(e->rhs, out, false);
      if (!top) out += ')';
      return;
  }
}

}  // namespace

ExprPtr parse_expr(std::string_view text) {
  Parser p(text);
  ExprPtr e = p.expression();
  p.finish();
  return e;
}

Effect parse_effect(std::string_view text) { return Parser(text).effect(); }

std::string to_string(const ExprPtr& e) {
  std::string out;
  print(e, out, true);
  return out;
}

std::string to_string(const Effect& e) {
  std::string out = e.target;
  if (e.target_index) out += "[" + to_string(e.target_index) + "]";
  out += " = ";
  out += to_string(e.value);
  return out;
}

ExprPtr rename(const ExprPtr& e, const Renamer& f) {
  if (!e) return nullptr;
  switch (e->kind) {
    case Expr::Kind::Constant:
      return e;
    case Expr::Kind::Ref:
      return Expr::ref(f(e->name), rename(e->lhs, f));
    case Expr::Kind::Negate:
      return Expr::negate(rename(e->lhs, f));
    case Expr::Kind::Binary:
      return Expr::binary(e->op, rename(e->lhs, f), rename(e->rhs, f));
  }
  return e;
}

Effect rename(const Effect& e, const Renamer& f) {
  return Effect{f(e.target), rename(e.target_index, f), rename(e.value, f)};
}

void for_each_name(const ExprPtr& e, const std::function<void(const std::string&)>& f) {
  if (!e) return;
  if (e->kind == Expr::Kind::Ref) f(e->name);
  for_each_name(e->lhs, f);
  for_each_name(e->rhs, f);
}

void for_each_name(const Effect& e, const std::function<void(const std::string&)>& f) {
  f(e.target);
  for_each_name(e.target_index, f);
  for_each_name(e.value, f);
}

std::int64_t apply_binary(char op, std::int64_t a, std::int64_t b) {
  const auto ua = static_cast<std::uint64_t>(a);
  const auto ub = static_cast<std::uint64_t>(b);
  switch (op) {
    case '+': return static_cast<std::int64_t>(ua + ub);
    case '-': return static_cast<std::int64_t>(ua - ub);
    case '*': return static_cast<std::int64_t>(ua * ub);
    case '/':
      if (b == 0) throw InterpretError("division by zero");
      if (a == INT64_MIN && b == -1) return INT64_MIN;
      return a / b;
    case '%':
      if (b == 0) throw InterpretError("modulo by zero");
      if (b == -1) return 0;
      return a % b;
    case '&': return a & b;
    case '|': return a | b;
    case '^': return a ^ b;
    default: throw InterpretError(std::string("unknown operator '") + op + "'");
  }
}

}  // namespace forge

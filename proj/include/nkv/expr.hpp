#pragma once

// A small total expression language for operator components and kernels:
// literals, declared variables, + - * / ^, unary minus and
// sin cos exp log sqrt abs.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nkv/error.hpp"

namespace nkv {

enum class Func { sin, cos, exp, log, sqrt, abs };

inline std::string_view to_string(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sqrt: return "sqrt";
    case Func::abs: return "abs";
  }
  return "?";
}

inline std::optional<Func> func_from_string(std::string_view name) {
  for (Func f : {Func::sin, Func::cos, Func::exp, Func::log, Func::sqrt, Func::abs})
    if (to_string(f) == name) return f;
  return std::nullopt;
}

struct ExprNode {
  enum class Kind { literal, variable, negate, binary, call };

  Kind kind = Kind::literal;
  double value = 0.0;    // literal
  std::string name;      // variable
  std::size_t slot = 0;  // variable: index into the expression's variable list
  char op = 0;           // binary: one of + - * / ^
  Func func = Func::sin;  // call
  std::shared_ptr<const ExprNode> lhs;  // negate / call argument / binary left
  std::shared_ptr<const ExprNode> rhs;  // binary right
};

using ExprPtr = std::shared_ptr<const ExprNode>;

namespace detail {

inline std::string format_literal(double v) {
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string print(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::literal: return format_literal(n.value);
    case ExprNode::Kind::variable: return n.name;
    case ExprNode::Kind::negate: return "(-" + print(*n.lhs) + ")";
    case ExprNode::Kind::binary: return "(" + print(*n.lhs) + " " + n.op + " " + print(*n.rhs) + ")";
    case ExprNode::Kind::call: return std::string(to_string(n.func)) + "(" + print(*n.lhs) + ")";
  }
  return "?";
}

inline void collect_variables(const ExprNode& n, std::set<std::string>& out) {
  if (n.kind == ExprNode::Kind::variable) out.insert(n.name);
  if (n.lhs) collect_variables(*n.lhs, out);
  if (n.rhs) collect_variables(*n.rhs, out);
}

inline bool same_tree(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::literal: return a.value == b.value;
    case ExprNode::Kind::variable: return a.name == b.name;
    case ExprNode::Kind::negate: return same_tree(*a.lhs, *b.lhs);
    case ExprNode::Kind::binary: return a.op == b.op && same_tree(*a.lhs, *b.lhs) && same_tree(*a.rhs, *b.rhs);
    case ExprNode::Kind::call: return a.func == b.func && same_tree(*a.lhs, *b.lhs);
  }
  return false;
}

inline double checked(double v, const ExprNode& node, const char* what) {
  if (!std::isfinite(v)) throw DomainError(print(node), what);
  return v;
}

inline double evaluate(const ExprNode& n, std::span<const double> slots) {
  switch (n.kind) {
    case ExprNode::Kind::literal: return n.value;
    case ExprNode::Kind::variable: return slots[n.slot];
    case ExprNode::Kind::negate: return -evaluate(*n.lhs, slots);
    case ExprNode::Kind::binary: {
      const double a = evaluate(*n.lhs, slots);
      const double b = evaluate(*n.rhs, slots);
      switch (n.op) {
        case '+': return checked(a + b, n, "overflow");
        case '-': return checked(a - b, n, "overflow");
        case '*': return checked(a * b, n, "overflow");
        case '/':
          if (b == 0.0) throw DomainError(print(n), "division by zero");
          return checked(a / b, n, "overflow");
        case '^': return checked(std::pow(a, b), n, "power outside the real domain");
      }
      break;
    }
    case ExprNode::Kind::call: {
      const double a = evaluate(*n.lhs, slots);
      switch (n.func) {
        case Func::sin: return std::sin(a);
        case Func::cos: return std::cos(a);
        case Func::exp: return checked(std::exp(a), n, "overflow");
        case Func::log:
          if (a <= 0.0) throw DomainError(print(n), "log of a nonpositive number");
          return std::log(a);
        case Func::sqrt:
          if (a < 0.0) throw DomainError(print(n), "sqrt of a negative number");
          return std::sqrt(a);
        case Func::abs: return std::abs(a);
      }
      break;
    }
  }
  throw DomainError(print(n), "malformed expression");
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

  ExprPtr parse() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(pos_, "empty expression");
    ExprPtr e = parse_sum();
    skip_space();
    if (pos_ < text_.size()) throw ParseError(pos_, std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  static ExprPtr binary(char op, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::binary;
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr parse_sum() {
    ExprPtr e = parse_product();
    for (;;) {
      if (accept('+')) e = binary('+', e, parse_product());
      else if (accept('-')) e = binary('-', e, parse_product());
      else return e;
    }
  }

  ExprPtr parse_product() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (accept('*')) e = binary('*', e, parse_unary());
      else if (accept('/')) e = binary('/', e, parse_unary());
      else return e;
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) {
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::negate;
      n->lhs = parse_unary();
      return n;
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  // ^ binds tighter than unary minus and is right-associative; its right
  // operand may carry a sign (2^-1).
  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (accept('^')) return binary('^', base, parse_unary());
    return base;
  }

  ExprPtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      if (!accept(')')) throw ParseError(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(pos_, std::string("unexpected '") + c + "'");
  }

  ExprPtr parse_number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    const auto used = static_cast<std::size_t>(end - rest.c_str());
    if (used == 0 || !std::isfinite(v)) throw ParseError(pos_, "malformed number");
    pos_ += used;
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::literal;
    n->value = v;
    return n;
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const auto f = func_from_string(name);
      if (!f) throw ParseError(start, "unknown function '" + name + "'");
      ++pos_;
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::call;
      n->func = *f;
      n->lhs = parse_sum();
      if (!accept(')')) throw ParseError(pos_, "expected ')' after function argument");
      return n;
    }
    const auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) throw UnknownVariableError(start, name);
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::variable;
    n->name = name;
    n->slot = static_cast<std::size_t>(it - vars_.begin());
    return n;
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// A parsed expression together with the ordered variable list its slots
/// refer to. Immutable and cheap to copy.
class Expr {
 public:
  Expr(ExprPtr root, std::vector<std::string> variables) : root_(std::move(root)), variables_(std::move(variables)) {}

  const ExprNode& root() const noexcept { return *root_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }

  /// Evaluate with slot values in the order of variables().
  double operator()(std::span<const double> slots) const {
    if (slots.size() < variables_.size()) throw PreconditionError("too few variable bindings");
    return detail::evaluate(*root_, slots);
  }

  std::string to_string() const { return detail::print(*root_); }

  /// Names the tree actually references.
  std::set<std::string> referenced() const {
    std::set<std::string> out;
    detail::collect_variables(*root_, out);
    return out;
  }

  friend bool structurally_equal(const Expr& a, const Expr& b) { return detail::same_tree(*a.root_, *b.root_); }

 private:
  ExprPtr root_;
  std::vector<std::string> variables_;
};

/// Variables are bound to slots in the given order.
inline Expr parse_expr(std::string_view text, const std::vector<std::string>& allowed_vars) {
  return Expr(detail::Parser(text, allowed_vars).parse(), allowed_vars);
}

inline Expr parse_expr(std::string_view text, const std::set<std::string>& allowed_vars) {
  return parse_expr(text, std::vector<std::string>(allowed_vars.begin(), allowed_vars.end()));
}

inline double eval_expr(const Expr& e, const std::map<std::string, double>& bindings) {
  for (const auto& name : e.referenced())
    if (!bindings.contains(name)) throw PreconditionError("variable '" + name + "' is not bound");
  std::vector<double> slots;
  slots.reserve(e.variables().size());
  for (const auto& name : e.variables()) {
    const auto it = bindings.find(name);
    slots.push_back(it == bindings.end() ? 0.0 : it->second);
  }
  return e(slots);
}

/// x1, ..., x<dim>
inline std::vector<std::string> coordinate_names(std::size_t dim) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

}  // namespace nkv

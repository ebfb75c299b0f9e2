#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "nkv/core.hpp"
#include "nkv/expr.hpp"

using namespace nkv;

TEST(Parse, TreeShapes) {
  const Expr add = parse_expr("x1 + 1", std::vector<std::string>{"x1"});
  ASSERT_EQ(add.root().kind, ExprNode::Kind::binary);
  EXPECT_EQ(add.root().op, '+');
  EXPECT_EQ(add.root().lhs->kind, ExprNode::Kind::variable);
  EXPECT_EQ(add.root().lhs->name, "x1");
  EXPECT_EQ(add.root().rhs->kind, ExprNode::Kind::literal);
  EXPECT_EQ(add.root().rhs->value, 1.0);

  const Expr call = parse_expr("cos(x1)", std::vector<std::string>{"x1"});
  ASSERT_EQ(call.root().kind, ExprNode::Kind::call);
  EXPECT_EQ(call.root().func, Func::cos);
  EXPECT_EQ(call.root().lhs->name, "x1");
}

TEST(Parse, Precedence) {
  const std::vector<std::string> none;
  EXPECT_EQ(eval_expr(parse_expr("2^3^2", none), {}), 512.0);
  EXPECT_EQ(eval_expr(parse_expr("-2^2", none), {}), -4.0);
  EXPECT_EQ(eval_expr(parse_expr("1 + 2 * 3", none), {}), 7.0);
  EXPECT_EQ(eval_expr(parse_expr("(1 + 2) * 3", none), {}), 9.0);
  EXPECT_EQ(eval_expr(parse_expr("8 / 4 / 2", none), {}), 1.0);
  EXPECT_EQ(eval_expr(parse_expr("10 - 4 - 3", none), {}), 3.0);
  EXPECT_EQ(eval_expr(parse_expr("2 * -3", none), {}), -6.0);
  EXPECT_DOUBLE_EQ(eval_expr(parse_expr("1.5e-1 + .25", none), {}), 0.4);
}

TEST(Parse, Errors) {
  const std::vector<std::string> vars{"x1"};
  EXPECT_THROW(parse_expr("", vars), ParseError);
  EXPECT_THROW(parse_expr("x1 +", vars), ParseError);
  EXPECT_THROW(parse_expr("(x1", vars), ParseError);
  EXPECT_THROW(parse_expr("x1 x1", vars), ParseError);
  EXPECT_THROW(parse_expr("tan(x1)", vars), ParseError);
  try {
    parse_expr("x1 + x9", vars);
    FAIL();
  } catch (const UnknownVariableError& e) {
    EXPECT_EQ(e.name(), "x9");
    EXPECT_EQ(e.position(), 5u);
  }
  try {
    parse_expr("x1 * $", vars);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(Eval, Examples) {
  const std::vector<std::string> vars{"x1"};
  EXPECT_EQ(eval_expr(parse_expr("x1 + 1", vars), {{"x1", 2.0}}), 3.0);
  EXPECT_NEAR(eval_expr(parse_expr("sin(x1)^2 + cos(x1)^2", vars), {{"x1", 0.77}}), 1.0, 1e-12);
  EXPECT_THROW(eval_expr(parse_expr("1/x1", vars), {{"x1", 0.0}}), DomainError);
  EXPECT_THROW(eval_expr(parse_expr("log(x1)", vars), {{"x1", -1.0}}), DomainError);
  EXPECT_THROW(eval_expr(parse_expr("sqrt(x1)", vars), {{"x1", -1.0}}), DomainError);
  EXPECT_THROW(eval_expr(parse_expr("x1 + 1", vars), {}), PreconditionError);
}

TEST(Eval, DomainErrorNamesNode) {
  try {
    eval_expr(parse_expr("2 + log(x1 - 1)", std::vector<std::string>{"x1"}), {{"x1", 0.5}});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(e.node().find("log"), std::string::npos);
  }
}

TEST(Eval, Functions) {
  const std::vector<std::string> vars{"x1", "x2"};
  const Expr e = parse_expr("exp(x1) * abs(x2) - sqrt(x1 + 3)", vars);
  EXPECT_DOUBLE_EQ(eval_expr(e, {{"x1", 1.0}, {"x2", -2.0}}), std::exp(1.0) * 2.0 - 2.0);
}

namespace {

std::string random_expr(UniformStream& rng, int depth) {
  const double u = rng.next();
  if (depth == 0 || u < 0.25) {
    const double v = rng.next();
    if (v < 0.4) return "x" + std::to_string(1 + static_cast<int>(rng.next() * 3));
    if (v < 0.7) return std::to_string(static_cast<int>(rng.next() * 100));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", 10 * rng.next());
    return buf;
  }
  if (u < 0.35) return "-" + random_expr(rng, depth - 1);
  if (u < 0.5) {
    static const char* fns[] = {"sin", "cos", "exp", "log", "sqrt", "abs"};
    return std::string(fns[static_cast<int>(rng.next() * 6)]) + "(" + random_expr(rng, depth - 1) + ")";
  }
  static const char ops[] = {'+', '-', '*', '/', '^'};
  const char op = ops[static_cast<int>(rng.next() * 5)];
  std::string a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
  if (rng.next() < 0.5) a = "(" + a + ")";
  if (rng.next() < 0.5) b = "(" + b + ")";
  return a + " " + op + " " + b;
}

}  // namespace

TEST(Print, RoundTripRandomExpressions) {
  UniformStream rng(2024);
  const std::vector<std::string> vars{"x1", "x2", "x3"};
  for (int i = 0; i < 500; ++i) {
    const std::string text = random_expr(rng, 5);
    const Expr e = parse_expr(text, vars);
    const Expr back = parse_expr(e.to_string(), vars);
    EXPECT_TRUE(structurally_equal(e, back)) << text << " -> " << e.to_string();
  }
}

TEST(Print, KeepsAssociativity) {
  const std::vector<std::string> none;
  for (const char* text : {"2^3^2", "(2^3)^2", "1 - (2 - 3)", "1 - 2 - 3", "8 / (4 / 2)", "-(2^2)", "(-2)^2"}) {
    const Expr e = parse_expr(text, none);
    EXPECT_EQ(eval_expr(parse_expr(e.to_string(), none), {}), eval_expr(e, {})) << text;
  }
}

TEST(Expr, ReferencedVariables) {
  const Expr e = parse_expr("x2 * 3", std::vector<std::string>{"x1", "x2"});
  EXPECT_EQ(e.referenced(), std::set<std::string>{"x2"});
  EXPECT_EQ(coordinate_names(3), (std::vector<std::string>{"x1", "x2", "x3"}));
}

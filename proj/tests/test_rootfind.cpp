#include <cmath>

#include <gtest/gtest.h>

#include "nkv/rootfind.hpp"
#include "nkv/schemes.hpp"
#include "oracles.hpp"

using namespace nkv;

namespace {

OperatorSpec sq_minus_two() {
  return OperatorSpec(
      1, [](const Vector& x) { return Vector{x[0] * x[0] - 2.0}; },
      [](const Vector& x, const Vector& h) { return Vector{2.0 * x[0] * h[0]}; });
}

IterationTrace run_contraction(const OperatorSpec& A, const Vector& x0, std::size_t max_n, double residual_tol) {
  StopRule stop;
  stop.max_n = max_n;
  stop.residual_tol = residual_tol;
  return run_outer(A, Scheme::contraction(), x0, PerturbationPlan::exact(), stop);
}

}  // namespace

TEST(Wrap, HeronIterates) {
  const auto A = wrap_root_problem(sq_minus_two(), GammaSpec::newton());
  const auto t = run_contraction(A, Vector{1.5}, 10, 1e-15);
  const auto ref = oracle::heron(1.5, t.steps());
  for (std::size_t n = 0; n <= t.steps(); ++n) EXPECT_NEAR(t.iterates[n][0], ref[n], 1e-13);
  EXPECT_NEAR(t.iterates[1][0], 1.4166667, 1e-7);
  EXPECT_NEAR(t.iterates[2][0], 1.4142157, 1e-7);
  std::size_t reached = 0;
  while (std::abs(t.iterates[reached][0] - std::sqrt(2.0)) > 1e-10) ++reached;
  EXPECT_LE(reached, 4u);
}

TEST(Wrap, ZeroMapIsIdentity) {
  const OperatorSpec zero(2, [](const Vector&) { return Vector{0, 0}; });
  const auto A = wrap_root_problem(zero, GammaSpec::damped(0.7));
  const Vector x{1.25, -3};
  EXPECT_EQ(A(x), x);
  // the Newton form needs P' invertible, which the zero map never has
  EXPECT_THROW(wrap_root_problem(zero, GammaSpec::newton())(x), SingularSystemError);
}

TEST(Wrap, DampedLinear) {
  const auto P = OperatorSpec::identity(1);
  const auto A = wrap_root_problem(P, GammaSpec::damped(0.5));
  const auto t = run_contraction(A, Vector{1}, 30, 0.0);
  for (std::size_t n = 0; n <= t.steps(); ++n) EXPECT_EQ(t.iterates[n][0], std::ldexp(1.0, -static_cast<int>(n)));
  EXPECT_DOUBLE_EQ(A.derivative(Vector{3}, Vector{1})[0], 0.5);
  EXPECT_THROW(wrap_root_problem(P, GammaSpec::damped(0.0)), PreconditionError);
}

TEST(Wrap, GammaVanishesAtZero) {
  // at a root of P both wrappers leave x unchanged
  const Vector root{std::sqrt(2.0)};
  for (const auto g : {GammaSpec::damped(0.3), GammaSpec::newton()}) {
    const auto A = wrap_root_problem(sq_minus_two(), g);
    EXPECT_NEAR(A(root)[0], root[0], 1e-15);
  }
}

TEST(Wrap, SingularDerivativeNamesThePoint) {
  const auto A = wrap_root_problem(sq_minus_two(), GammaSpec::newton());
  try {
    A(Vector{0});
    FAIL();
  } catch (const SingularSystemError& e) {
    EXPECT_NE(std::string(e.what()).find("x = (0)"), std::string::npos);
  }
}

TEST(Wrap, SystemMatchesClassicalNewton) {
  // P(x, y) = (x^2 + y^2 - 4, x - y)
  const OperatorSpec P(2, [](const Vector& v) { return Vector{v[0] * v[0] + v[1] * v[1] - 4.0, v[0] - v[1]}; });
  const auto A = wrap_root_problem(P, GammaSpec::newton());
  const auto t = run_contraction(A, Vector{1, 2}, 20, 1e-14);
  EXPECT_TRUE(t.converged());
  EXPECT_NEAR(t.last()[0], std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(t.last()[1], std::sqrt(2.0), 1e-12);
  EXPECT_LE(norm_of(P(t.last()), NormKind::sup), 10 * 1e-14);
}

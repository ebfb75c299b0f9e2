#include <cmath>

#include <gtest/gtest.h>

#include "nkv/estimate.hpp"
#include "oracles.hpp"

using namespace nkv;

namespace {

OperatorSpec cos_op() {
  return OperatorSpec(
      1, [](const Vector& x) { return Vector{std::cos(x[0])}; },
      [](const Vector& x, const Vector& h) { return Vector{-std::sin(x[0]) * h[0]}; });
}

}  // namespace

TEST(EstimateM, Examples) {
  const auto affine = OperatorSpec::affine(Matrix::Constant(1, 1, 0.5), Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(estimate_lipschitz_M(affine, BallDomain(Vector{3}, 2), 100, 1).value, 0.5, 1e-12);
  EXPECT_NEAR(estimate_lipschitz_M(OperatorSpec::identity(2), BallDomain(Vector{0, 0}, 1), 100, 1).value, 1.0, 1e-12);
  const BallDomain ball(Vector{0.74}, 0.3);
  const double exact = oracle::dense_max([](double x) { return std::abs(std::sin(x)); }, 0.44, 1.04);
  EXPECT_NEAR(exact, std::sin(1.04), 1e-9);
  const auto e = estimate_lipschitz_M(cos_op(), ball, 4000, 7);
  EXPECT_LE(e.value, exact + 1e-9);
  EXPECT_NEAR(e.value, exact, 2e-3);
  EXPECT_EQ(e.label, "empirical lower bound");
  EXPECT_DOUBLE_EQ(e.inflated(), 1.1 * e.value);
}

TEST(EstimateM, MonotoneInSamplesAndDeterministic) {
  const BallDomain ball(Vector{0.74}, 0.3);
  double prev = 0.0;
  for (std::size_t s : {10u, 20u, 50u, 100u, 500u, 2000u}) {
    const double v = estimate_lipschitz_M(cos_op(), ball, s, 42).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_EQ(estimate_lipschitz_M(cos_op(), ball, 300, 9).value, estimate_lipschitz_M(cos_op(), ball, 300, 9).value);
  EXPECT_THROW(estimate_lipschitz_M(cos_op(), ball, 5, 1), PreconditionError);
}

TEST(EstimateK, Examples) {
  const auto affine = OperatorSpec::affine(Matrix::Constant(2, 2, 0.25), Eigen::VectorXd::Ones(2));
  EXPECT_EQ(estimate_lipschitz_K(affine, BallDomain(Vector{0, 0}, 1), 100, 1).value, 0.0);
  const OperatorSpec half_square(
      1, [](const Vector& x) { return Vector{0.5 * x[0] * x[0]}; },
      [](const Vector& x, const Vector& h) { return Vector{x[0] * h[0]}; });
  EXPECT_NEAR(estimate_lipschitz_K(half_square, BallDomain(Vector{1}, 2), 100, 3).value, 1.0, 1e-10);
  const double exact = oracle::dense_max([](double x) { return std::abs(std::cos(x)); }, 0.44, 1.04);
  EXPECT_NEAR(exact, std::cos(0.44), 1e-12);
  const auto e = estimate_lipschitz_K(cos_op(), BallDomain(Vector{0.74}, 0.3), 4000, 7);
  EXPECT_LE(e.value, exact + 1e-9);
  EXPECT_NEAR(e.value, exact, 2e-3);
}

TEST(EstimateK, NeverAboveAnalyticConstant) {
  // A(x, y) = (sin x / 2, cos y / 3): K = 1/2 in the sup norm
  const OperatorSpec A(2, [](const Vector& v) { return Vector{0.5 * std::sin(v[0]), std::cos(v[1]) / 3}; },
                       [](const Vector& v, const Vector& h) {
                         return Vector{0.5 * std::cos(v[0]) * h[0], -std::sin(v[1]) / 3 * h[1]};
                       });
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_LE(estimate_lipschitz_K(A, BallDomain(Vector{0, 0}, 2), 500, seed).value, 0.5 + 1e-9);
    EXPECT_LE(estimate_lipschitz_M(A, BallDomain(Vector{0, 0}, 2), 500, seed).value, 0.5 + 1e-9);
  }
}

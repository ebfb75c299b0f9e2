#pragma once

// Sampled Lipschitz constants of A and A' over a ball. Sampling only ever
// sees a lower bound of the true constant, and results say so.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>

#include "nkv/core.hpp"
#include "nkv/error.hpp"

namespace nkv {

inline constexpr double default_safety_factor = 1.1;

struct LipschitzEstimate {
  double value = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string label = "empirical lower bound";

  /// Value handed to the majorant machinery: value * safety.
  double inflated(double safety = default_safety_factor) const { return value * safety; }
};

namespace detail {

inline Vector sample_in_ball(const BallDomain& ball, UniformStream& rng) {
  const std::size_t d = ball.center().dim();
  Eigen::VectorXd u(static_cast<Eigen::Index>(d));
  for (auto& c : u) c = rng.symmetric();
  const double n = norm_of(u, ball.norm());
  if (n > 1.0) u /= n;
  return Vector(Eigen::VectorXd(ball.center().coords() + ball.radius() * u));
}

// Pair i depends only on (seed, i): even i is two independent points, odd i
// a point and a close neighbour. More samples therefore never lower the max.
template <class Ratio>
LipschitzEstimate sample_pairs(const BallDomain& ball, std::size_t samples, std::uint64_t seed, double near_scale,
                               Ratio ratio) {
  if (samples < 10) throw PreconditionError("Lipschitz estimation needs at least 10 samples");
  UniformStream rng(seed);
  LipschitzEstimate out{0.0, samples, seed};
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector x = sample_in_ball(ball, rng);
    Vector y = x;
    if (i % 2 == 0) {
      y = sample_in_ball(ball, rng);
    } else {
      Eigen::VectorXd u(static_cast<Eigen::Index>(x.dim()));
      for (auto& c : u) c = rng.symmetric();
      const double n = norm_of(u, ball.norm());
      if (n == 0.0) continue;
      const Eigen::VectorXd step = near_scale * ball.radius() * u / n;
      y = Vector(Eigen::VectorXd(x.coords() + step));
      if (!ball.contains(y, 0.0)) y = Vector(Eigen::VectorXd(x.coords() - step));
      if (!ball.contains(y, 0.0)) continue;
    }
    const double dist = distance(x, y, ball.norm());
    if (dist == 0.0) continue;
    out.value = std::max(out.value, ratio(x, y) / dist);
  }
  return out;
}

}  // namespace detail

/// max over sampled pairs of ||A(x) - A(y)|| / ||x - y||, deterministic per seed.
inline LipschitzEstimate estimate_lipschitz_M(const OperatorSpec& A, const BallDomain& ball, std::size_t samples,
                                              std::uint64_t seed) {
  return detail::sample_pairs(ball, samples, seed, 1e-2, [&](const Vector& x, const Vector& y) {
    return distance(A(x), A(y), ball.norm());
  });
}

/// max over sampled pairs of ||A'(x) - A'(y)|| / ||x - y||.
inline LipschitzEstimate estimate_lipschitz_K(const OperatorSpec& A, const BallDomain& ball, std::size_t samples,
                                              std::uint64_t seed) {
  const std::size_t d = A.dim();
  return detail::sample_pairs(ball, samples, seed, 1e-3, [&](const Vector& x, const Vector& y) {
    return operator_norm_estimate(
        [&](const Vector& h) { return Vector(Eigen::VectorXd(A.derivative(x, h).coords() - A.derivative(y, h).coords())); },
        d, ball.norm(), d);
  });
}

}  // namespace nkv

#pragma once

// P(x) = 0 rewritten as the fixed-point problem x = x - Gamma(x, P(x)).

#include <sstream>
#include <string>
#include <string_view>

#include <Eigen/LU>

#include "nkv/core.hpp"
#include "nkv/error.hpp"

namespace nkv {

/// damped: Gamma(x, y) = alpha y.  newton: Gamma(x, y) = P'(x)^{-1} y.
/// Both vanish at y = 0.
struct GammaSpec {
  enum class Kind { damped, newton };

  Kind kind = Kind::newton;
  double alpha = 1.0;

  static GammaSpec damped(double alpha) { return {Kind::damped, alpha}; }
  static GammaSpec newton() { return {Kind::newton, 1.0}; }
};

inline std::string_view to_string(GammaSpec::Kind k) { return k == GammaSpec::Kind::damped ? "damped" : "newton"; }

namespace detail {

inline std::string format_point(const Vector& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < x.dim(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace detail

/// A(x) = x - Gamma(x, P(x)). Its fixed points are the zeros of P.
/// The damped form carries the derivative I - alpha P'(x); the Newton form
/// leaves A' to finite differences.
inline OperatorSpec wrap_root_problem(const OperatorSpec& P, const GammaSpec& g) {
  if (g.kind == GammaSpec::Kind::damped) {
    if (!(g.alpha > 0.0) || !std::isfinite(g.alpha)) throw PreconditionError("damping alpha must be positive");
    const double alpha = g.alpha;
    return OperatorSpec(
        P.dim(), [P, alpha](const Vector& x) { return x - alpha * P(x); },
        [P, alpha](const Vector& x, const Vector& h) { return h - alpha * P.derivative(x, h); });
  }
  return OperatorSpec(P.dim(), [P](const Vector& x) {
    const Vector y = P(x);
    const Matrix J = P.jacobian(x);
    Eigen::FullPivLU<Matrix> lu(J);
    if (!lu.isInvertible()) throw SingularSystemError("P'(x) is singular at x = " + detail::format_point(x));
    const Eigen::VectorXd z = lu.solve(y.coords());
    if (!z.allFinite()) throw SingularSystemError("P'(x) is singular at x = " + detail::format_point(x));
    return Vector(Eigen::VectorXd(x.coords() - z));
  });
}

}  // namespace nkv

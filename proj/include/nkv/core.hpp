#pragma once

// Finite-dimensional normed-space primitives: vectors, the three supported
// norms, closed balls, operators with optional Gateaux derivatives.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nkv/error.hpp"

namespace nkv {

using Matrix = Eigen::MatrixXd;

enum class NormKind { sup, euclidean, one };

inline std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::sup: return "sup";
    case NormKind::euclidean: return "euclidean";
    case NormKind::one: return "one";
  }
  return "?";
}

inline std::optional<NormKind> norm_kind_from_string(std::string_view name) {
  if (name == "sup" || name == "max" || name == "inf") return NormKind::sup;
  if (name == "euclidean" || name == "l2") return NormKind::euclidean;
  if (name == "one" || name == "l1") return NormKind::one;
  return std::nullopt;
}

/// A point of R^d with finite coordinates. Immutable after construction.
class Vector {
 public:
  explicit Vector(Eigen::VectorXd coords) : coords_(std::move(coords)) { validate(); }
  explicit Vector(const std::vector<double>& coords)
      : coords_(Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size()))) {
    validate();
  }
  Vector(std::initializer_list<double> coords) : Vector(std::vector<double>(coords)) {}

  static Vector zeros(std::size_t dim) { return Vector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))); }
  static Vector constant(std::size_t dim, double value) {
    return Vector(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), value));
  }
  static Vector unit(std::size_t dim, std::size_t i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    e(static_cast<Eigen::Index>(i)) = 1.0;
    return Vector(std::move(e));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(coords_.size()); }
  double operator[](std::size_t i) const { return coords_(static_cast<Eigen::Index>(i)); }
  const Eigen::VectorXd& coords() const noexcept { return coords_; }
  std::span<const double> values() const noexcept { return {coords_.data(), dim()}; }
  std::vector<double> to_std() const { return {coords_.data(), coords_.data() + coords_.size()}; }

  friend Vector operator+(const Vector& a, const Vector& b) { return Vector(Eigen::VectorXd(a.coords_ + b.coords_)); }
  friend Vector operator-(const Vector& a, const Vector& b) { return Vector(Eigen::VectorXd(a.coords_ - b.coords_)); }
  friend Vector operator-(const Vector& a) { return Vector(Eigen::VectorXd(-a.coords_)); }
  friend Vector operator*(double s, const Vector& v) { return Vector(Eigen::VectorXd(s * v.coords_)); }
  friend Vector operator*(const Matrix& m, const Vector& v) { return Vector(Eigen::VectorXd(m * v.coords_)); }
  friend bool operator==(const Vector& a, const Vector& b) {
    return a.dim() == b.dim() && a.coords_ == b.coords_;
  }

 private:
  void validate() const {
    if (coords_.size() < 1) throw NonFiniteError("vector dimension must be at least 1");
    if (!coords_.allFinite()) throw NonFiniteError("vector has non-finite coordinates");
  }

  Eigen::VectorXd coords_;
};

inline double norm_of(const Eigen::VectorXd& v, NormKind kind) {
  switch (kind) {
    case NormKind::sup: return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    case NormKind::euclidean: return v.norm();
    case NormKind::one: return v.cwiseAbs().sum();
  }
  return 0.0;
}

inline double norm_of(const Vector& v, NormKind kind) { return norm_of(v.coords(), kind); }

inline double distance(const Vector& a, const Vector& b, NormKind kind) {
  return norm_of(Eigen::VectorXd(a.coords() - b.coords()), kind);
}

/// Unit vector of the dual norm that attains <dual, u> = norm(u).
/// Used to build rank-one operators u*dual^T whose induced norm equals
/// norm(u) * dual_norm(dual).
inline Eigen::VectorXd dual_unit(const Eigen::VectorXd& u, NormKind kind) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(u.size());
  switch (kind) {
    case NormKind::sup: {
      Eigen::Index i = 0;
      u.cwiseAbs().maxCoeff(&i);
      d(i) = u(i) < 0 ? -1.0 : 1.0;
      break;
    }
    case NormKind::one:
      for (Eigen::Index i = 0; i < u.size(); ++i) d(i) = u(i) < 0 ? -1.0 : 1.0;
      break;
    case NormKind::euclidean: {
      const double n = u.norm();
      if (n > 0) d = u / n;
      else d(0) = 1.0;
      break;
    }
  }
  return d;
}

/// Norm of the dual space: (sup)* = one, (one)* = sup, euclidean self-dual.
inline double dual_norm_of(const Eigen::VectorXd& v, NormKind kind) {
  switch (kind) {
    case NormKind::sup: return norm_of(v, NormKind::one);
    case NormKind::one: return norm_of(v, NormKind::sup);
    case NormKind::euclidean: return v.norm();
  }
  return 0.0;
}

/// Exact operator norm of a dense matrix induced by `kind`.
inline double induced_norm(const Matrix& m, NormKind kind) {
  if (m.size() == 0) return 0.0;
  switch (kind) {
    case NormKind::sup: return m.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::one: return m.cwiseAbs().colwise().sum().maxCoeff();
    case NormKind::euclidean: {
      Eigen::JacobiSVD<Matrix> svd(m);
      return svd.singularValues()(0);
    }
  }
  return 0.0;
}

/// Closed ball B(center, radius) in a fixed norm.
class BallDomain {
 public:
  BallDomain(Vector center, double radius, NormKind kind = NormKind::sup)
      : center_(std::move(center)), radius_(radius), kind_(kind) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw PreconditionError("ball radius must be finite and nonnegative");
  }

  const Vector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  NormKind norm() const noexcept { return kind_; }

  bool contains(const Vector& v, double tolerance = 1e-12) const {
    return distance(v, center_, kind_) <= radius_ + tolerance;
  }

 private:
  Vector center_;
  double radius_;
  NormKind kind_;
};

using Map = std::function<Vector(const Vector&)>;
/// (x, h) -> A'(x) h
using DirectionalDerivative = std::function<Vector(const Vector&, const Vector&)>;

/// Relative step used when an operator has no analytic derivative.
inline double default_fd_step(const Vector& x, NormKind kind = NormKind::sup) {
  return 1e-6 * (1.0 + norm_of(x, kind));
}

/// An evaluable map R^d -> R^d, optionally with a Gateaux derivative and
/// Lipschitz metadata for the map (M) and its derivative (K).
class OperatorSpec {
 public:
  OperatorSpec(std::size_t dim, Map evaluator, std::optional<DirectionalDerivative> derivative = std::nullopt,
               std::optional<double> lipschitz_M = std::nullopt, std::optional<double> lipschitz_K = std::nullopt)
      : dim_(dim),
        evaluator_(std::move(evaluator)),
        derivative_(std::move(derivative)),
        lipschitz_M_(lipschitz_M),
        lipschitz_K_(lipschitz_K) {
    if (dim_ == 0) throw PreconditionError("operator dimension must be positive");
    if (!evaluator_) throw PreconditionError("operator needs an evaluator");
    for (auto c : {lipschitz_M_, lipschitz_K_})
      if (c && !(*c >= 0.0)) throw PreconditionError("Lipschitz constants must be nonnegative");
  }

  /// Affine map x -> matrix*x + offset with its exact derivative and M.
  static OperatorSpec affine(Matrix matrix, Eigen::VectorXd offset, NormKind kind = NormKind::sup) {
    const auto dim = static_cast<std::size_t>(offset.size());
    const double m = induced_norm(matrix, kind);
    return OperatorSpec(
        dim, [matrix, offset](const Vector& x) { return Vector(Eigen::VectorXd(matrix * x.coords() + offset)); },
        [matrix](const Vector&, const Vector& h) { return matrix * h; }, m, 0.0);
  }

  static OperatorSpec identity(std::size_t dim) {
    return OperatorSpec(
        dim, [](const Vector& x) { return x; }, [](const Vector&, const Vector& h) { return h; }, 1.0, 0.0);
  }

  std::size_t dim() const noexcept { return dim_; }
  bool has_derivative() const noexcept { return derivative_.has_value(); }
  std::optional<double> lipschitz_M() const noexcept { return lipschitz_M_; }
  std::optional<double> lipschitz_K() const noexcept { return lipschitz_K_; }

  Vector operator()(const Vector& x) const {
    check_dim(x);
    try {
      Vector y = evaluator_(x);
      if (y.dim() != dim_) throw OperatorEvaluationError("operator changed the dimension");
      return y;
    } catch (const OperatorEvaluationError&) {
      throw;
    } catch (const SingularSystemError&) {
      throw;
    } catch (const Error& e) {
      throw OperatorEvaluationError(std::string("operator evaluation failed: ") + e.what());
    }
  }

  /// A'(x) h, analytic when available, central difference otherwise.
  Vector derivative(const Vector& x, const Vector& h) const;

  /// Dense Jacobian assembled column by column from derivative().
  Matrix jacobian(const Vector& x) const {
    Matrix jac(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (std::size_t j = 0; j < dim_; ++j)
      jac.col(static_cast<Eigen::Index>(j)) = derivative(x, Vector::unit(dim_, j)).coords();
    return jac;
  }

 private:
  void check_dim(const Vector& x) const {
    if (x.dim() != dim_)
      throw OperatorEvaluationError("operator of dim " + std::to_string(dim_) + " applied to vector of dim " +
                                    std::to_string(x.dim()));
  }

  std::size_t dim_;
  Map evaluator_;
  std::optional<DirectionalDerivative> derivative_;
  std::optional<double> lipschitz_M_;
  std::optional<double> lipschitz_K_;
};

/// Central-difference Gateaux derivative (op(x + s h) - op(x - s h)) / (2 s).
inline Vector gateaux_fd(const OperatorSpec& op, const Vector& x, const Vector& h, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw PreconditionError("finite-difference step must be positive");
  const Vector plus = op(x + step * h);
  const Vector minus = op(x - step * h);
  return Vector(Eigen::VectorXd((plus.coords() - minus.coords()) / (2.0 * step)));
}

inline Vector OperatorSpec::derivative(const Vector& x, const Vector& h) const {
  check_dim(x);
  check_dim(h);
  if (!derivative_) return gateaux_fd(*this, x, h, default_fd_step(x));
  try {
    Vector y = (*derivative_)(x, h);
    if (y.dim() != dim_) throw OperatorEvaluationError("derivative changed the dimension");
    return y;
  } catch (const OperatorEvaluationError&) {
    throw;
  } catch (const Error& e) {
    throw OperatorEvaluationError(std::string("derivative evaluation failed: ") + e.what());
  }
}

/// Deterministic uniform doubles in [0, 1) (splitmix64). Spelled out
/// instead of <random> distributions so streams are identical across
/// standard libraries.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : state_(seed) {}

  double next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  double symmetric() { return 2.0 * next() - 1.0; }

 private:
  std::uint64_t state_;
};

/// Lower estimate of the operator norm of a linear map induced by `kind`.
/// The map is materialized through the coordinate directions, for which
/// the induced norm is computed exactly; `samples - dim` additional seeded
/// unit directions guard against maps that are only approximately linear.
inline double operator_norm_estimate(const std::function<Vector(const Vector&)>& linmap, std::size_t dim,
                                     NormKind kind, std::size_t samples, std::uint64_t seed = 0x5eed) {
  if (samples < dim) throw PreconditionError("operator_norm_estimate needs samples >= dim");
  Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) m.col(static_cast<Eigen::Index>(j)) = linmap(Vector::unit(dim, j)).coords();
  double best = induced_norm(m, kind);
  UniformStream rng(seed);
  for (std::size_t s = dim; s < samples; ++s) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(dim));
    for (auto& c : u) c = rng.symmetric();
    const double n = norm_of(u, kind);
    if (n == 0.0) continue;
    u /= n;
    best = std::max(best, norm_of(linmap(Vector(u)), kind));
  }
  return best;
}

}  // namespace nkv

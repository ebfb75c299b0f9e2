#pragma once

// The generalized iteration x_n = B_{n-1}(x_n) for x = A(x):
//
//   contraction      B_{n-1}(x) = A(x_{n-1})
//   modified_newton  B_{n-1}(x) = A'(x_0)(x - x_{n-1}) + A(x_{n-1})
//   newton           B_{n-1}(x) = A'(x_{n-1})(x - x_{n-1}) + A(x_{n-1})
//   custom           B_{n-1} supplied by a factory, solved by inner
//                    fixed-point iteration
//
// Inexactness is injected on purpose: an additive vector of norm eps_{n-1}
// on B_{n-1}, and a rank-one perturbation of operator norm sigma_{n-1}
// (newton) or gamma_{n-1} (modified_newton) on the linearization.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nkv/core.hpp"
#include "nkv/error.hpp"
#include "nkv/sequence.hpp"

namespace nkv {

enum class SchemeKind { contraction, modified_newton, newton, custom };

inline std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::contraction: return "contraction";
    case SchemeKind::modified_newton: return "modified_newton";
    case SchemeKind::newton: return "newton";
    case SchemeKind::custom: return "custom";
  }
  return "?";
}

inline std::optional<SchemeKind> scheme_kind_from_string(std::string_view name) {
  for (auto k : {SchemeKind::contraction, SchemeKind::modified_newton, SchemeKind::newton, SchemeKind::custom})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

/// Builds B_k, the operator whose fixed point is x_{k+1}, from (k, x_k, x_0).
/// The returned operator's lipschitz_M() is taken as M_k.
using SchemeFactory = std::function<OperatorSpec(std::size_t k, const Vector& x_prev, const Vector& x0)>;

struct Scheme {
  SchemeKind kind = SchemeKind::contraction;
  SchemeFactory factory;  // custom only
  std::string label;      // custom only, for reports
  double declared_M_star = 0.0;  // custom only: sup_k M_k
  double declared_K_star = 0.0;  // custom only: sup_k K_k

  static Scheme contraction() { return {SchemeKind::contraction, {}, {}, 0.0, 0.0}; }
  static Scheme newton() { return {SchemeKind::newton, {}, {}, 0.0, 0.0}; }
  static Scheme modified_newton() { return {SchemeKind::modified_newton, {}, {}, 0.0, 0.0}; }
  static Scheme custom(SchemeFactory factory, std::string label, double M_star, double K_star = 0.0) {
    return {SchemeKind::custom, std::move(factory), std::move(label), M_star, K_star};
  }

  /// B_k(x) = A(x_k) + beta (x - x_k), |beta| < 1. Its fixed point is
  /// x_k + (A(x_k) - x_k)/(1 - beta): a relaxed Picard step with M_k = |beta|
  /// and B_k(x_k) = A(x_k).
  static Scheme relaxed(const OperatorSpec& A, double beta) {
    if (!(std::abs(beta) < 1.0)) throw PreconditionError("relaxation parameter must satisfy |beta| < 1");
    auto factory = [A, beta](std::size_t, const Vector& x_prev, const Vector&) {
      const Vector ax = A(x_prev);
      return OperatorSpec(
          x_prev.dim(), [ax, x_prev, beta](const Vector& x) { return ax + beta * (x - x_prev); },
          [beta](const Vector&, const Vector& h) { return beta * h; }, std::abs(beta), 0.0);
    };
    return custom(factory, "relaxed(" + std::to_string(beta) + ")", std::abs(beta), 0.0);
  }
};

enum class InjectionMode { none, additive_deterministic, additive_seeded_random };

inline std::string_view to_string(InjectionMode mode) {
  switch (mode) {
    case InjectionMode::none: return "none";
    case InjectionMode::additive_deterministic: return "additive-deterministic";
    case InjectionMode::additive_seeded_random: return "additive-seeded-random";
  }
  return "?";
}

inline std::optional<InjectionMode> injection_mode_from_string(std::string_view name) {
  for (auto m : {InjectionMode::none, InjectionMode::additive_deterministic, InjectionMode::additive_seeded_random})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

/// Declared tolerances and how perturbations of that size are injected.
/// Index convention: eps_seq(k), sigma_seq(k), gamma_seq(k) bound the
/// operator B_k that produces x_{k+1}.
struct PerturbationPlan {
  std::optional<double> eps0;  // declared bound on ||A(x_0) - x_0||
  Sequence eps_seq;
  Sequence sigma_seq;
  Sequence gamma_seq;
  InjectionMode mode = InjectionMode::none;
  std::uint64_t seed = 0;

  static PerturbationPlan exact() { return {}; }

  void validate() const {
    if (eps0 && !(*eps0 >= 0.0)) throw PreconditionError("eps0 must be nonnegative");
    eps_seq.validate_nonnegative("eps sequence");
    sigma_seq.validate_nonnegative("sigma sequence");
    gamma_seq.validate_nonnegative("gamma sequence");
  }
};

/// Per-run perturbation state: the plan, the random stream and x_0.
class Perturber {
 public:
  Perturber(PerturbationPlan plan, Vector x0, NormKind kind)
      : plan_(std::move(plan)), rng_(plan_.seed), x0_(std::move(x0)), kind_(kind) {
    plan_.validate();
  }

  const PerturbationPlan& plan() const noexcept { return plan_; }
  NormKind norm() const noexcept { return kind_; }
  const Vector& x0() const noexcept { return x0_; }
  bool active() const noexcept { return plan_.mode != InjectionMode::none; }

  /// Additive perturbation for B_k; its norm never exceeds eps_seq(k).
  Eigen::VectorXd additive(std::size_t k, const Vector& x_prev, const Vector& ax_prev) {
    const auto dim = static_cast<Eigen::Index>(x_prev.dim());
    if (!active() || plan_.eps_seq.at(k) == 0.0) return Eigen::VectorXd::Zero(dim);
    return clamp_norm(plan_.eps_seq.at(k) * direction(x_prev, ax_prev), plan_.eps_seq.at(k));
  }

  /// Rank-one derivative perturbation u v^T with induced norm <= bound.
  Matrix rank_one(double bound, const Vector& x_prev, const Vector& ax_prev) {
    const auto dim = static_cast<Eigen::Index>(x_prev.dim());
    if (!active() || bound == 0.0) return Matrix::Zero(dim, dim);
    const Eigen::VectorXd u = direction(x_prev, ax_prev);
    Eigen::VectorXd v;
    if (plan_.mode == InjectionMode::additive_seeded_random) {
      v = random_unit(dim);
      const double dn = dual_norm_of(v, kind_);
      v /= dn;
    } else {
      v = dual_unit(u, kind_);
    }
    Matrix delta = bound * u * v.transpose();
    double n = induced_norm(delta, kind_);
    while (n > bound) {
      delta *= bound / n * (1.0 - 0x1.0p-52);
      n = induced_norm(delta, kind_);
    }
    return delta;
  }

 private:
  Eigen::VectorXd clamp_norm(Eigen::VectorXd p, double bound) const {
    double n = norm_of(p, kind_);
    while (n > bound) {
      p *= bound / n * (1.0 - 0x1.0p-52);
      n = norm_of(p, kind_);
    }
    return p;
  }

  Eigen::VectorXd random_unit(Eigen::Index dim) {
    Eigen::VectorXd w(dim);
    double n = 0.0;
    while (n == 0.0) {
      for (auto& c : w) c = rng_.symmetric();
      n = norm_of(w, kind_);
    }
    return w / n;
  }

  // Deterministic mode pushes along the accumulated displacement x_k - x_0
  // (the residual direction before the first move), which keeps the
  // perturbation sign fixed and drives the iteration to a biased limit.
  Eigen::VectorXd direction(const Vector& x_prev, const Vector& ax_prev) {
    const auto dim = static_cast<Eigen::Index>(x_prev.dim());
    if (plan_.mode == InjectionMode::additive_seeded_random) return random_unit(dim);
    Eigen::VectorXd d = x_prev.coords() - x0_.coords();
    if (norm_of(d, kind_) == 0.0) d = ax_prev.coords() - x_prev.coords();
    const double n = norm_of(d, kind_);
    if (n == 0.0) {
      d = Eigen::VectorXd::Zero(dim);
      d(0) = 1.0;
      return d;
    }
    return d / n;
  }

  PerturbationPlan plan_;
  UniformStream rng_;
  Vector x0_;
  NormKind kind_;
};

/// Outcome of one outer step.
struct StepResult {
  Vector x;                          // x_{k+1}
  double inner_defect = 0.0;         // ||B_k(x_{k+1}) - x_{k+1}||
  double injected = 0.0;             // ||additive perturbation||
  double injected_derivative = 0.0;  // induced norm of the derivative perturbation
  double lipschitz_B = 0.0;          // M_k, Lipschitz constant of B_k
  double consistency = 0.0;          // ||A(x_k) - B_k(x_k)||
  std::size_t inner_iterations = 0;
};

inline constexpr double default_inner_tol = 1e-12;

namespace detail {

// Solves x = D (x - x_prev) + A(x_prev) + p, i.e. (I - D) x = A(x_prev) - D x_prev + p.
inline StepResult affine_step(const Matrix& D, const Vector& x_prev, const Vector& ax_prev, const Eigen::VectorXd& p,
                              double inner_tol, NormKind kind) {
  const auto dim = static_cast<Eigen::Index>(x_prev.dim());
  const Matrix system = Matrix::Identity(dim, dim) - D;
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible())
    throw SingularSystemError("I - B' is singular (the linearization has eigenvalue 1)");
  const Eigen::VectorXd rhs = ax_prev.coords() - D * x_prev.coords() + p;
  Eigen::VectorXd x = lu.solve(rhs);
  auto defect_of = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return D * y + rhs - y; };
  double defect = norm_of(defect_of(x), kind);
  for (int refine = 0; refine < 4 && defect > inner_tol; ++refine) {
    x += lu.solve(defect_of(x));
    defect = norm_of(defect_of(x), kind);
  }
  if (!x.allFinite() || defect > inner_tol)
    throw SingularSystemError("linear solve did not reach the inner tolerance (defect " + std::to_string(defect) + ")");
  StepResult out{Vector(std::move(x))};
  out.inner_defect = defect;
  out.injected = norm_of(p, kind);
  out.lipschitz_B = induced_norm(D, kind);
  out.consistency = out.injected;
  return out;
}

inline StepResult contraction_step(const Vector& x_prev, const Vector& ax_prev, Perturber& perturb, std::size_t k) {
  const Eigen::VectorXd p = perturb.additive(k, x_prev, ax_prev);
  StepResult out{Vector(Eigen::VectorXd(ax_prev.coords() + p))};
  out.injected = norm_of(p, perturb.norm());
  out.consistency = out.injected;
  return out;
}

inline StepResult newton_step(const OperatorSpec& A, const Vector& x_prev, const Vector& ax_prev, Perturber& perturb,
                              std::size_t k, double inner_tol) {
  const Matrix delta = perturb.rank_one(perturb.plan().sigma_seq.at(k), x_prev, ax_prev);
  const Matrix D = A.jacobian(x_prev) + delta;
  const Eigen::VectorXd p = perturb.additive(k, x_prev, ax_prev);
  StepResult out = affine_step(D, x_prev, ax_prev, p, inner_tol, perturb.norm());
  out.injected_derivative = induced_norm(delta, perturb.norm());
  return out;
}

inline StepResult modified_newton_step(const Matrix& jac_x0, const Vector& x_prev, const Vector& ax_prev,
                                       Perturber& perturb, std::size_t k, double inner_tol) {
  const Matrix delta = perturb.rank_one(perturb.plan().gamma_seq.at(k), x_prev, ax_prev);
  const Matrix D = jac_x0 + delta;
  const Eigen::VectorXd p = perturb.additive(k, x_prev, ax_prev);
  StepResult out = affine_step(D, x_prev, ax_prev, p, inner_tol, perturb.norm());
  out.injected_derivative = induced_norm(delta, perturb.norm());
  return out;
}

}  // namespace detail

/// x_{k+1} = A(x_k) + p_k.
inline StepResult step_contraction(const OperatorSpec& A, const Vector& x_prev, Perturber& perturb, std::size_t k) {
  return detail::contraction_step(x_prev, A(x_prev), perturb, k);
}

inline StepResult step_contraction(const OperatorSpec& A, const Vector& x_prev) {
  Perturber none(PerturbationPlan::exact(), x_prev, NormKind::sup);
  return step_contraction(A, x_prev, none, 0);
}

/// Solves x = B_k(x) with B_k the (perturbed) linearization of A at x_k.
inline StepResult step_newton(const OperatorSpec& A, const Vector& x_prev, Perturber& perturb, std::size_t k,
                              double inner_tol = default_inner_tol) {
  return detail::newton_step(A, x_prev, A(x_prev), perturb, k, inner_tol);
}

inline StepResult step_newton(const OperatorSpec& A, const Vector& x_prev, double inner_tol = default_inner_tol,
                              NormKind kind = NormKind::sup) {
  Perturber none(PerturbationPlan::exact(), x_prev, kind);
  return step_newton(A, x_prev, none, 0, inner_tol);
}

/// Solves x = B_k(x) with the derivative frozen at x_0.
inline StepResult step_modified_newton(const OperatorSpec& A, const Vector& x_prev, const Vector& x0,
                                       Perturber& perturb, std::size_t k, double inner_tol = default_inner_tol) {
  return detail::modified_newton_step(A.jacobian(x0), x_prev, A(x_prev), perturb, k, inner_tol);
}

inline StepResult step_modified_newton(const OperatorSpec& A, const Vector& x_prev, const Vector& x0,
                                       double inner_tol = default_inner_tol, NormKind kind = NormKind::sup) {
  Perturber none(PerturbationPlan::exact(), x0, kind);
  return step_modified_newton(A, x_prev, x0, none, 0, inner_tol);
}

/// Inner fixed-point iteration y <- B(y) from y = x_prev until
/// ||B(y) - y|| <= inner_tol.
inline StepResult step_custom(const OperatorSpec& B, const Vector& x_prev, double inner_tol = default_inner_tol,
                              std::size_t max_inner = 10000, std::optional<double> radius = std::nullopt,
                              NormKind kind = NormKind::sup) {
  const double guard = radius.value_or(1e6 * (1.0 + norm_of(x_prev, kind)));
  Vector y = x_prev;
  for (std::size_t it = 0;; ++it) {
    Vector by = B(y);
    const double defect = distance(by, y, kind);
    if (defect <= inner_tol) {
      StepResult out{std::move(y)};
      out.inner_defect = defect;
      out.inner_iterations = it;
      out.lipschitz_B = B.lipschitz_M().value_or(std::nan(""));
      return out;
    }
    if (it >= max_inner)
      throw InnerDivergenceError("inner iteration did not reach tolerance within " + std::to_string(max_inner) +
                                 " steps (defect " + std::to_string(defect) + ")");
    y = std::move(by);
    if (distance(y, x_prev, kind) > guard)
      throw InnerDivergenceError("inner iteration left the working ball (B is not contractive)");
  }
}

enum class StopReason { step_tol, residual_tol, max_steps, diverged, stalled };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::step_tol: return "step_tol";
    case StopReason::residual_tol: return "residual_tol";
    case StopReason::max_steps: return "max_steps";
    case StopReason::diverged: return "diverged";
    case StopReason::stalled: return "stalled";
  }
  return "?";
}

struct StopRule {
  std::size_t max_n = 100;
  double r_tol = 0.0;
  double residual_tol = 0.0;
};

struct RunOptions {
  double inner_tol = default_inner_tol;
  std::size_t max_inner = 10000;
  std::optional<double> radius;  // default 1e6 (1 + ||x_0||)
  /// Stop as "stalled" after this many consecutive steps with
  /// r_n >= r_{n-1} > 0; 0 disables the check.
  std::size_t stall_window = 0;
};

/// Everything recorded along one run. Index n refers to x_n; r has one entry
/// fewer than iterates. consistency and lipschitz_B are indexed by the
/// operator B_n (n = 0 .. steps-1).
struct IterationTrace {
  NormKind norm = NormKind::sup;
  std::vector<Vector> iterates;
  std::vector<double> r;
  std::vector<double> R_partial;
  std::vector<double> r_tilde;
  std::vector<double> residual;
  std::vector<double> inner_defect;
  std::vector<double> injected;
  std::vector<double> injected_derivative;
  std::vector<double> consistency;
  std::vector<double> lipschitz_B;
  StopReason stop = StopReason::max_steps;
  std::string stop_detail;

  std::size_t steps() const noexcept { return r.size(); }
  const Vector& last() const { return iterates.back(); }
  bool converged() const noexcept { return stop == StopReason::step_tol || stop == StopReason::residual_tol; }
};

/// Runs x_n = B_{n-1}(x_n) from x0 until a stop rule fires.
inline IterationTrace run_outer(const OperatorSpec& A, const Scheme& scheme, const Vector& x0,
                                const PerturbationPlan& plan, const StopRule& stop, const RunOptions& options = {},
                                NormKind kind = NormKind::sup) {
  if (x0.dim() != A.dim()) throw PreconditionError("x0 dimension does not match the operator");
  if (scheme.kind == SchemeKind::custom && !scheme.factory) throw PreconditionError("custom scheme needs a factory");
  Perturber perturb(plan, x0, kind);
  const double radius = options.radius.value_or(1e6 * (1.0 + norm_of(x0, kind)));

  IterationTrace t;
  t.norm = kind;
  t.iterates.push_back(x0);
  Vector ax = A(x0);
  t.residual.push_back(distance(ax, x0, kind));
  t.r_tilde.push_back(0.0);
  t.inner_defect.push_back(0.0);
  t.injected.push_back(0.0);
  t.injected_derivative.push_back(0.0);

  std::optional<Matrix> jac_x0;
  if (scheme.kind == SchemeKind::modified_newton) jac_x0 = A.jacobian(x0);

  if (t.residual[0] <= stop.residual_tol) {
    t.stop = StopReason::residual_tol;
    return t;
  }
  if (stop.max_n == 0) {
    t.stop = StopReason::max_steps;
    return t;
  }

  std::size_t stall = 0;
  for (std::size_t n = 1;; ++n) {
    const std::size_t k = n - 1;
    const Vector& x_prev = t.iterates.back();
    StepResult step{x_prev};
    try {
      switch (scheme.kind) {
        case SchemeKind::contraction: step = detail::contraction_step(x_prev, ax, perturb, k); break;
        case SchemeKind::newton: step = detail::newton_step(A, x_prev, ax, perturb, k, options.inner_tol); break;
        case SchemeKind::modified_newton:
          step = detail::modified_newton_step(*jac_x0, x_prev, ax, perturb, k, options.inner_tol);
          break;
        case SchemeKind::custom: {
          const OperatorSpec B = scheme.factory(k, x_prev, x0);
          const Eigen::VectorXd p = perturb.additive(k, x_prev, ax);
          const OperatorSpec Bp = p.isZero(0.0) ? B
                                                : OperatorSpec(
                                                      B.dim(), [B, p](const Vector& x) { return B(x) + Vector(p); },
                                                      std::nullopt, B.lipschitz_M(), B.lipschitz_K());
          step = step_custom(Bp, x_prev, options.inner_tol, options.max_inner, radius, kind);
          step.injected = norm_of(p, kind);
          step.consistency = distance(ax, Bp(x_prev), kind);
          break;
        }
      }
    } catch (const Error& e) {
      throw StepError(n, e.what());
    }

    const double r = distance(step.x, x_prev, kind);
    t.r.push_back(r);
    t.R_partial.push_back(t.R_partial.empty() ? r : t.R_partial.back() + r);
    t.consistency.push_back(step.consistency);
    t.lipschitz_B.push_back(step.lipschitz_B);
    t.inner_defect.push_back(step.inner_defect);
    t.injected.push_back(step.injected);
    t.injected_derivative.push_back(step.injected_derivative);
    t.r_tilde.push_back(distance(step.x, x0, kind));
    t.iterates.push_back(std::move(step.x));

    if (t.r_tilde.back() > radius) {
      t.residual.push_back(std::numeric_limits<double>::infinity());
      t.stop = StopReason::diverged;
      t.stop_detail = "left the working ball of radius " + std::to_string(radius) + " at step " + std::to_string(n);
      return t;
    }
    try {
      ax = A(t.iterates.back());
    } catch (const Error& e) {
      throw StepError(n, e.what());
    }
    t.residual.push_back(distance(ax, t.iterates.back(), kind));

    if (options.stall_window > 0 && t.r.size() >= 2) {
      const double prev = t.r[t.r.size() - 2];
      stall = (prev > 0.0 && r >= prev * (1.0 - 1e-9)) ? stall + 1 : 0;
      if (stall >= options.stall_window) {
        t.stop = StopReason::stalled;
        t.stop_detail = "step sizes did not decrease for " + std::to_string(stall) + " consecutive steps";
        return t;
      }
    }
    if (t.residual.back() <= stop.residual_tol) {
      t.stop = StopReason::residual_tol;
      return t;
    }
    if (r <= stop.r_tol) {
      t.stop = StopReason::step_tol;
      return t;
    }
    if (n >= stop.max_n) {
      t.stop = StopReason::max_steps;
      return t;
    }
  }
}

}  // namespace nkv

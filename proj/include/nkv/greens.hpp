#pragma once

// Integral form x(t) = int_0^T G(t,s) A(x(s)) ds on a uniform grid over
// [0, T_end]. A acts pointwise on R^d; grid functions store d values per node.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nkv/core.hpp"
#include "nkv/error.hpp"
#include "nkv/expr.hpp"
#include "nkv/schemes.hpp"
#include "nkv/theorem.hpp"

namespace nkv {

class GridFunction {
 public:
  GridFunction(std::vector<double> nodes, std::vector<double> values, std::size_t dim = 1)
      : nodes_(std::move(nodes)), values_(std::move(values)), dim_(dim) {
    if (dim_ == 0) throw PreconditionError("grid function dimension must be positive");
    if (nodes_.size() < 2) throw PreconditionError("a grid needs at least two nodes");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (!(nodes_[i] > nodes_[i - 1])) throw PreconditionError("grid nodes must be strictly increasing");
    if (values_.size() != nodes_.size() * dim_) throw PreconditionError("grid values do not match the node count");
    for (double v : values_)
      if (!std::isfinite(v)) throw NonFiniteError("grid function value is not finite");
  }

  /// m + 1 equally spaced nodes on [0, T_end], values f(t) (d = 1).
  static GridFunction uniform(double T_end, std::size_t m, const std::function<double(double)>& f) {
    if (!(T_end > 0.0)) throw PreconditionError("T_end must be positive");
    if (m < 1) throw PreconditionError("grid size m must be at least 1");
    std::vector<double> nodes(m + 1), values(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
      nodes[i] = T_end * static_cast<double>(i) / static_cast<double>(m);
      values[i] = f(nodes[i]);
    }
    return GridFunction(std::move(nodes), std::move(values), 1);
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double t(std::size_t i) const { return nodes_.at(i); }
  double operator[](std::size_t i) const { return values_.at(i * dim_); }
  double step() const { return nodes_[1] - nodes_[0]; }

  Eigen::Map<const Eigen::VectorXd> at(std::size_t i) const {
    return Eigen::Map<const Eigen::VectorXd>(values_.data() + i * dim_, static_cast<Eigen::Index>(dim_));
  }

  GridFunction with_values(std::vector<double> values) const { return GridFunction(nodes_, std::move(values), dim_); }

  Vector flat() const { return Vector(values_); }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  std::size_t dim_;
};

/// Scalar kernel G(t, s) on [0, T_end].
struct KernelSpec {
  enum class Kind { volterra_unit, expression };

  Kind kind = Kind::volterra_unit;
  std::optional<Expr> expr;  // over variables t, s
  double T_end = 1.0;

  bool is_volterra() const noexcept { return kind == Kind::volterra_unit; }

  double operator()(double t, double s) const {
    if (kind == Kind::volterra_unit) return s <= t ? 1.0 : 0.0;
    const double slots[2] = {t, s};
    try {
      return (*expr)(slots);
    } catch (const DomainError& e) {
      throw DomainError(e.node(), std::string(e.what()) + " at (t, s) = (" + std::to_string(t) + ", " +
                                      std::to_string(s) + ")");
    }
  }
};

/// Green's function of d/dt with x(0) = 0 on [0, T_end].
inline KernelSpec build_volterra_kernel(double T_end) {
  if (!(T_end > 0.0)) throw PreconditionError("T_end must be positive");
  return {KernelSpec::Kind::volterra_unit, std::nullopt, T_end};
}

inline KernelSpec expression_kernel(std::string_view text, double T_end) {
  if (!(T_end > 0.0)) throw PreconditionError("T_end must be positive");
  return {KernelSpec::Kind::expression, parse_expr(text, std::vector<std::string>{"t", "s"}), T_end};
}

namespace detail {

inline void check_grid(const KernelSpec& k, const GridFunction& x) {
  const double tol = 1e-12 * k.T_end;
  if (std::abs(x.nodes().front()) > tol || std::abs(x.nodes().back() - k.T_end) > tol)
    throw PreconditionError("grid does not span the kernel's interval [0, T_end]");
}

// Composite trapezoid weights on nodes 0..i of a uniform grid.
inline double trapezoid_weight(std::size_t j, std::size_t i, double h) { return (j == 0 || j == i) ? 0.5 * h : h; }

// int over nodes [a, b] of f by composite Simpson, the last three intervals
// by the 3/8 rule when b - a is odd, a single trapezoid when b - a = 1.
inline double simpson(const std::vector<double>& f, std::size_t a, std::size_t b, double h) {
  const std::size_t n = b - a;
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * h * (f[a] + f[b]);
  double sum = 0.0;
  std::size_t even_end = b;
  if (n % 2 == 1) {
    even_end = b - 3;
    sum += 3.0 * h / 8.0 * (f[even_end] + 3.0 * f[even_end + 1] + 3.0 * f[even_end + 2] + f[b]);
  }
  for (std::size_t j = a; j + 2 <= even_end; j += 2) sum += h / 3.0 * (f[j] + 4.0 * f[j + 1] + f[j + 2]);
  return sum;
}

}  // namespace detail

/// (Fx)(t_i) = sum_j w_j G(t_i, s_j) A(x(s_j)) by the composite trapezoid;
/// the Volterra kernel sums over s_j <= t_i only.
inline GridFunction apply_integral_operator(const KernelSpec& k, const OperatorSpec& A, const GridFunction& x) {
  detail::check_grid(k, x);
  const std::size_t d = x.dim();
  if (A.dim() != d) throw PreconditionError("operator dimension does not match the grid function");
  const std::size_t N = x.size();
  const double h = x.step();
  std::vector<Eigen::VectorXd> ax(N);
  for (std::size_t j = 0; j < N; ++j) ax[j] = A(Vector(Eigen::VectorXd(x.at(j)))).coords();

  std::vector<double> out(N * d, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    if (k.is_volterra()) {
      for (std::size_t j = 0; j <= i && i > 0; ++j) acc += detail::trapezoid_weight(j, i, h) * ax[j];
    } else {
      for (std::size_t j = 0; j < N; ++j) acc += detail::trapezoid_weight(j, N - 1, h) * k(x.t(i), x.t(j)) * ax[j];
    }
    for (std::size_t c = 0; c < d; ++c) out[i * d + c] = acc[static_cast<Eigen::Index>(c)];
  }
  return x.with_values(std::move(out));
}

/// The integral operator as a map on the flattened grid vector.
inline OperatorSpec integral_operator(const KernelSpec& k, const OperatorSpec& A, const GridFunction& grid) {
  return OperatorSpec(grid.values().size(), [k, A, grid](const Vector& v) {
    return apply_integral_operator(k, A, grid.with_values(v.to_std())).flat();
  });
}

/// Picard iteration x_n = F(x_{n-1}) on the grid, sup norm over nodes.
/// A stall window (default 25 non-decreasing steps) catches kernels that do
/// not contract.
inline IterationTrace run_integral_iteration(const KernelSpec& k, const OperatorSpec& A, SchemeKind scheme,
                                             const GridFunction& x0, const StopRule& stop, RunOptions options = {}) {
  if (scheme != SchemeKind::contraction)
    throw PreconditionError("integral problems support the contraction scheme only");
  detail::check_grid(k, x0);
  if (options.stall_window == 0) options.stall_window = 25;
  return run_outer(integral_operator(k, A, x0), Scheme::contraction(), x0.flat(), PerturbationPlan::exact(), stop,
                   options, NormKind::sup);
}

/// Pointwise step sizes r_n(t_i) = ||x_{n+1}(t_i) - x_n(t_i)|| (sup over components).
inline GridFunction step_profile(const IterationTrace& t, const GridFunction& grid, std::size_t n) {
  if (n + 1 >= t.iterates.size()) throw PreconditionError("trace has no step " + std::to_string(n));
  const std::size_t d = grid.dim();
  std::vector<double> out(grid.size());
  const auto& a = t.iterates[n + 1].coords();
  const auto& b = t.iterates[n].coords();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double m = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const auto idx = static_cast<Eigen::Index>(i * d + c);
      m = std::max(m, std::abs(a[idx] - b[idx]));
    }
    out[i] = m;
  }
  return GridFunction(grid.nodes(), std::move(out), 1);
}

struct BoundPropagation {
  std::vector<double> rhs;
  std::vector<double> margin;  // rhs - r_n
  double min_margin = std::numeric_limits<double>::infinity();
  double slack = 0.0;
  double slack_constant = 0.0;  // slack = slack_constant / m^2 (quadrature part)
  bool pass = false;
};

/// Evaluates the step inequality of the integral form at every node,
///   r_n(t) <= int |G(t,s)| (M_n r_n(s) + (M + M_{n-1}) r_{n-1}(s) + eps_{n-1} + eps_n) ds
/// (Newton: 1/2 (K + K_{n-1}) r_{n-1}^2 + sigma_{n-1} r_{n-1} in place of the
/// middle term). The integral uses composite Simpson, split at s = t for
/// general kernels. Slack covers the trapezoid error of the measured r_n:
/// 1.5 (T/12) h^2 max|g''| + 1e-12 max|rhs| + noise_floor.
inline BoundPropagation bound_propagate(const KernelSpec& k, const ProblemConstants& c, const GridFunction& r_prev,
                                        const GridFunction& r_cur, SchemeKind scheme, std::size_t n,
                                        double noise_floor = 0.0) {
  if (n < 1) throw PreconditionError("bound propagation starts at n = 1");
  if (r_prev.size() != r_cur.size()) throw PreconditionError("step profiles live on different grids");
  detail::check_grid(k, r_cur);
  const std::size_t N = r_cur.size();
  const double h = r_cur.step();
  const double Mn = c.M_seq.at(n);
  const double Mp = c.M_seq.at(n - 1);
  const double eps_sum = c.eps_seq.at(n - 1) + c.eps_seq.at(n);
  std::vector<double> g(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double rp = r_prev[j];
    double middle = 0.0;
    switch (scheme) {
      case SchemeKind::contraction:
      case SchemeKind::custom: middle = (c.M + Mp) * rp; break;
      case SchemeKind::newton: middle = 0.5 * (c.K + c.K_seq.at(n - 1)) * rp * rp + c.sigma_seq.at(n - 1) * rp; break;
      case SchemeKind::modified_newton: throw PreconditionError("bound propagation needs r~ for modified Newton");
    }
    g[j] = Mn * r_cur[j] + middle + eps_sum;
  }

  BoundPropagation out;
  out.rhs.assign(N, 0.0);
  double max_g2 = 0.0;
  std::vector<double> f(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double t = r_cur.t(i);
    for (std::size_t j = 0; j < N; ++j) f[j] = std::abs(k(t, r_cur.t(j))) * g[j];
    if (k.is_volterra()) {
      out.rhs[i] = detail::simpson(f, 0, i, h);
    } else {
      out.rhs[i] = detail::simpson(f, 0, i, h) + detail::simpson(f, i, N - 1, h);
    }
    for (std::size_t j = 1; j + 1 < N; ++j) {
      if (k.is_volterra() && j + 1 > i) break;
      if (!k.is_volterra() && (j == i)) continue;
      max_g2 = std::max(max_g2, std::abs(f[j + 1] - 2.0 * f[j] + f[j - 1]) / (h * h));
    }
  }
  const double max_rhs = *std::max_element(out.rhs.begin(), out.rhs.end());
  const double T = k.T_end;
  const double quad = 1.5 * (T / 12.0) * h * h * max_g2;
  const double m = static_cast<double>(N - 1);
  out.slack_constant = quad * m * m;
  out.slack = quad + 1e-12 * max_rhs + noise_floor;
  out.margin.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    out.margin[i] = out.rhs[i] - r_cur[i];
    out.min_margin = std::min(out.min_margin, out.margin[i]);
  }
  out.pass = out.min_margin >= -out.slack;
  return out;
}

/// Rounding level of step sizes along a run: 16 ulp of the largest iterate value.
inline double grid_noise_floor(const IterationTrace& t) {
  double m = 0.0;
  for (const auto& x : t.iterates) m = std::max(m, norm_of(x, NormKind::sup));
  return 16.0 * std::numeric_limits<double>::epsilon() * std::max(m, 1.0);
}

}  // namespace nkv

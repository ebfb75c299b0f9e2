#pragma once

// Scalar majorant recurrence
//
//   r_n = eta r_{n-1}^2 + lambda_{n-1} r_{n-1} + rho_{n-1}
//
// and the certificates that bound its solutions: a uniform bound (bounded,
// uniform_max), a perturbation-proportional sandwich, geometric decay and
// quadratic decay. Every certificate verifies its side conditions over a
// finite horizon N and reports bounds on r_0 .. r_N.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nkv/error.hpp"
#include "nkv/sequence.hpp"

namespace nkv {

inline constexpr std::size_t default_horizon = 200;

struct MajorantParams {
  double eta = 0.0;
  Sequence lambda;
  Sequence rho;
  double r0 = 0.0;

  void validate() const {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw PreconditionError("eta must be finite and nonnegative");
    if (!(r0 >= 0.0) || !std::isfinite(r0)) throw PreconditionError("r0 must be finite and nonnegative");
    lambda.validate_nonnegative("lambda");
    rho.validate_nonnegative("rho");
  }

  /// max_{k < n} lambda_k
  double lambda_max(std::size_t n) const {
    double best = 0.0;
    for (std::size_t k = 0; k < n; ++k) best = std::max(best, lambda.at(k));
    return best;
  }
};

inline double recurrence_step(double r_prev, double eta, double lambda_prev, double rho_prev) {
  return eta * r_prev * r_prev + lambda_prev * r_prev + rho_prev;
}

struct Simulation {
  std::vector<double> r;                // r_0 .. r_N, truncated on divergence
  std::optional<std::size_t> diverged_at;  // first index that overflowed
};

/// Iterates the recurrence with equality, the worst case of the inequality.
inline Simulation simulate_recurrence(const MajorantParams& p, std::size_t N) {
  p.validate();
  Simulation sim;
  sim.r.reserve(N + 1);
  sim.r.push_back(p.r0);
  for (std::size_t n = 1; n <= N; ++n) {
    const double next = recurrence_step(sim.r.back(), p.eta, p.lambda.at(n - 1), p.rho.at(n - 1));
    if (!std::isfinite(next) || next > 1e300) {
      sim.diverged_at = n;
      break;
    }
    sim.r.push_back(next);
  }
  return sim;
}

enum class Regime { bounded, sandwich, geometric, quadratic, uniform_max };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::bounded: return "bounded";
    case Regime::sandwich: return "sandwich";
    case Regime::geometric: return "geometric";
    case Regime::quadratic: return "quadratic";
    case Regime::uniform_max: return "uniform_max";
  }
  return "?";
}

inline std::optional<Regime> regime_from_string(std::string_view name) {
  for (auto r : {Regime::bounded, Regime::sandwich, Regime::geometric, Regime::quadratic, Regime::uniform_max})
    if (to_string(r) == name) return r;
  if (name == "remark1" || name == "uniform-max") return Regime::uniform_max;
  return std::nullopt;
}

/// Result of checking one regime. lower[n] <= r_n <= upper[n] is asserted
/// for n = 0 .. checked_horizon when valid. Lower bounds hold for the
/// equality recurrence; traces that only satisfy the inequality are
/// compared against upper bounds alone.
struct Certificate {
  Regime regime = Regime::bounded;
  std::vector<std::pair<std::string, double>> witnesses;
  std::size_t checked_horizon = 0;
  bool valid = false;
  std::string reason;
  std::vector<std::string> notes;
  std::vector<double> lower;
  std::vector<double> upper;

  std::optional<double> witness(std::string_view name) const {
    for (const auto& [k, v] : witnesses)
      if (k == name) return v;
    return std::nullopt;
  }
};

/// Relative 1e-12 plus absolute 1e-300 slack for inequality checks.
inline bool leq_slack(double a, double b) {
  if (std::isinf(b) && b > 0) return true;
  return a <= b + 1e-12 * std::abs(b) + 1e-300;
}

struct BoundCheck {
  std::size_t violations = 0;
  double min_upper_margin = std::numeric_limits<double>::infinity();  // min (upper - r) / max(upper, tiny)
  double min_lower_margin = std::numeric_limits<double>::infinity();
};

/// Compares a certificate's bounds with a sequence r_0, r_1, ...
inline BoundCheck check_bounds(const Certificate& c, const std::vector<double>& r, bool check_lower = true) {
  BoundCheck out;
  const std::size_t n_max = std::min({r.size(), c.upper.size(), c.lower.size()});
  for (std::size_t n = 0; n < n_max; ++n) {
    if (!std::isinf(c.upper[n])) {
      if (!leq_slack(r[n], c.upper[n])) ++out.violations;
      out.min_upper_margin = std::min(out.min_upper_margin, c.upper[n] - r[n]);
    }
    if (check_lower) {
      if (!leq_slack(c.lower[n], r[n])) ++out.violations;
      out.min_lower_margin = std::min(out.min_lower_margin, r[n] - c.lower[n]);
    }
  }
  return out;
}

namespace detail {

inline Certificate invalid(Regime regime, std::size_t N, std::string reason) {
  Certificate c;
  c.regime = regime;
  c.checked_horizon = N;
  c.valid = false;
  c.reason = std::move(reason);
  return c;
}

struct Roots {
  double discriminant;
  double lower;  // smaller root of eta C^2 - (1 - lambda) C + rho = 0
  double upper;  // larger root, +inf when eta = 0
};

// The smaller root is evaluated in the rationalized form
// 2 rho / (1 - lambda + sqrt(D)), which is also the eta -> 0 limit rho/(1 - lambda).
inline Roots quadratic_roots(double eta, double lambda, double rho) {
  const double one_minus = 1.0 - lambda;
  const double disc = one_minus * one_minus - 4.0 * eta * rho;
  Roots out{disc, std::nan(""), std::nan("")};
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  out.lower = (rho == 0.0) ? 0.0 : 2.0 * rho / (one_minus + sq);
  out.upper = eta > 0.0 ? (one_minus + sq) / (2.0 * eta) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace detail

/// Uniform bound r_n <= C: requires 4 eta rho_k < (1 - lambda_k)^2 and a
/// C >= r0 between the largest lower root and the smallest upper root.
inline Certificate cert_bounded(const MajorantParams& p, std::size_t N = default_horizon) {
  p.validate();
  if (N < 1) throw PreconditionError("horizon must be at least 1");
  double sup_lower = 0.0;
  double inf_upper = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < N; ++k) {
    const double lam = p.lambda.at(k);
    if (!(lam < 1.0)) return detail::invalid(Regime::bounded, N, "lambda_" + std::to_string(k) + " >= 1");
    const auto roots = detail::quadratic_roots(p.eta, lam, p.rho.at(k));
    if (!(roots.discriminant > 0.0))
      return detail::invalid(Regime::bounded, N, "4 eta rho >= (1 - lambda)^2 at k = " + std::to_string(k));
    sup_lower = std::max(sup_lower, roots.lower);
    inf_upper = std::min(inf_upper, roots.upper);
  }
  const double C = std::max(p.r0, sup_lower);
  if (!(C <= inf_upper)) {
    auto c = detail::invalid(Regime::bounded, N, "no C >= r0 lies between the lower and upper roots");
    c.witnesses = {{"sup_lower_root", sup_lower}, {"inf_upper_root", inf_upper}};
    return c;
  }
  Certificate c;
  c.regime = Regime::bounded;
  c.checked_horizon = N;
  c.valid = true;
  c.witnesses = {{"C", C}, {"sup_lower_root", sup_lower}, {"inf_upper_root", inf_upper}};
  c.lower.assign(N + 1, 0.0);
  c.upper.assign(N + 1, C);
  return c;
}

/// Uniform bound from lambda_0, rho_0 alone when both sequences are
/// nonincreasing: r_n <= (1 - lambda_0 + sqrt(D_0)) / (2 eta).
/// The bound max{r0, upper root} only holds when r0 does not exceed the upper
/// root (beyond it the recurrence grows), so that is checked as well.
inline Certificate cert_remark1(const MajorantParams& p, std::size_t N = default_horizon) {
  p.validate();
  if (N < 1) throw PreconditionError("horizon must be at least 1");
  for (std::size_t k = 0; k + 1 < N; ++k) {
    if (p.lambda.at(k + 1) > p.lambda.at(k))
      return detail::invalid(Regime::uniform_max, N, "lambda increases at k = " + std::to_string(k + 1));
    if (p.rho.at(k + 1) > p.rho.at(k))
      return detail::invalid(Regime::uniform_max, N, "rho increases at k = " + std::to_string(k + 1));
  }
  for (std::size_t k = 0; k < N; ++k) {
    const double lam = p.lambda.at(k);
    if (!(lam < 1.0)) return detail::invalid(Regime::uniform_max, N, "lambda_" + std::to_string(k) + " >= 1");
    if (!(detail::quadratic_roots(p.eta, lam, p.rho.at(k)).discriminant > 0.0))
      return detail::invalid(Regime::uniform_max, N, "4 eta rho >= (1 - lambda)^2 at k = " + std::to_string(k));
  }
  const auto roots0 = detail::quadratic_roots(p.eta, p.lambda.at(0), p.rho.at(0));
  if (p.r0 > roots0.upper)
    return detail::invalid(Regime::uniform_max, N, "r0 exceeds the upper root; the recurrence grows from there");
  const double bound = std::max(p.r0, roots0.upper);
  Certificate c;
  c.regime = Regime::uniform_max;
  c.checked_horizon = N;
  c.valid = true;
  c.witnesses = {{"bound", bound}, {"upper_root_0", roots0.upper}};
  if (std::isinf(bound)) c.notes.emplace_back("eta = 0: the uniform bound is vacuous");
  c.lower.assign(N + 1, 0.0);
  c.upper.assign(N + 1, bound);
  return c;
}

/// r_n proportional to the perturbation: rho_{n-1} <= r_n <= C rho_{n-1}.
///
/// With t_k = rho_{k+1}/rho_k the side conditions are lambda_{k+1} <= C1 t_k
/// and rho_k <= C2 t_k; any C in [C_small, C_large], the roots of
/// eta C2 C^2 - (1 - C1) C + 1 = 0, propagates r_n <= C rho_{n-1}. The
/// certificate uses the smallest such C that also covers r_1 <= C rho_0.
inline Certificate cert_sandwich(const MajorantParams& p, std::size_t N, double C1, double C2) {
  p.validate();
  if (N < 1) throw PreconditionError("horizon must be at least 1");
  if (!(C1 >= 0.0 && C1 < 1.0)) return detail::invalid(Regime::sandwich, N, "C1 must lie in [0, 1)");
  if (!(C2 >= 0.0)) return detail::invalid(Regime::sandwich, N, "C2 must be nonnegative");
  const double disc = (1.0 - C1) * (1.0 - C1) - 4.0 * p.eta * C2;
  if (disc < 0.0) return detail::invalid(Regime::sandwich, N, "C2 exceeds (1 - C1)^2 / (4 eta)");
  for (std::size_t k = 0; k < N; ++k)
    if (!(p.rho.at(k) > 0.0))
      return detail::invalid(Regime::sandwich, N, "zero perturbation; use cert_geometric/cert_quadratic");

  const double sq = std::sqrt(disc);
  const double C_small = 2.0 / (1.0 - C1 + sq);
  const double C_large = p.eta * C2 > 0.0 ? (1.0 - C1 + sq) / (2.0 * p.eta * C2) : std::numeric_limits<double>::infinity();
  const double r1 = recurrence_step(p.r0, p.eta, p.lambda.at(0), p.rho.at(0));

  Certificate c;
  c.regime = Regime::sandwich;
  c.checked_horizon = N;
  c.notes.emplace_back(
      "start window read as eta r0^2 + lambda_0 r0 + rho_0 <= C_rho rho_0 (the printed interval is ambiguous)");
  const double C = std::max(C_small, r1 / p.rho.at(0));
  c.witnesses = {{"C1", C1}, {"C2", C2}, {"C_rho", C_large}, {"C_small", C_small}, {"C", C}};
  if (!(r1 <= C_large * p.rho.at(0))) {
    c.reason = "start window fails: eta r0^2 + lambda_0 r0 + rho_0 > C_rho rho_0";
    return c;
  }
  for (std::size_t k = 0; k + 1 < N; ++k) {
    const double ratio = p.rho.at(k + 1) / p.rho.at(k);
    if (!(p.lambda.at(k + 1) <= C1 * ratio)) {
      c.reason = "lambda_{k+1} > C1 rho_{k+1}/rho_k at k = " + std::to_string(k);
      return c;
    }
    if (!(p.rho.at(k) <= C2 * ratio)) {
      c.reason = "rho_k > C2 rho_{k+1}/rho_k at k = " + std::to_string(k);
      return c;
    }
  }
  c.valid = true;
  c.lower.assign(N + 1, p.r0);
  c.upper.assign(N + 1, p.r0);
  for (std::size_t n = 1; n <= N; ++n) {
    c.lower[n] = p.rho.at(n - 1);
    c.upper[n] = C * p.rho.at(n - 1);
  }
  return c;
}

/// Geometric decay:
///   r0 prod_{k<n} lambda_k <= r_n <= C_mu (1+mu)^n lambda~_0 prod_{k=1}^{n-1} lambda_k.
///
/// lambda~_0 stands in for lambda_0 in the product. Side conditions, with
/// Q_n = C_mu lambda~_0 prod_{k=1}^{n-1} lambda_k:
///   r_1 <= (1+mu) lambda~_0 C_mu
///   rho_n <= chi mu lambda_n Q_n
///   eta (1+mu)^n Q_n <= (1-chi) mu lambda_n
/// The last one carries the (1+mu)^n growth of the bound; without it the
/// quadratic term is not controlled. Whether the weaker form
/// eta Q_n <= (1-chi) mu lambda_n also held is recorded as a note.
inline Certificate cert_geometric(const MajorantParams& p, std::size_t N, double chi, double mu, double lambda_tilde0,
                                  double C_mu) {
  p.validate();
  if (N < 1) throw PreconditionError("horizon must be at least 1");
  Certificate c;
  c.regime = Regime::geometric;
  c.checked_horizon = N;
  c.witnesses = {{"chi", chi}, {"mu", mu}, {"lambda_tilde0", lambda_tilde0}, {"C_mu", C_mu}};
  if (!(chi >= 0.0 && chi <= 1.0)) return c.reason = "chi must lie in [0, 1]", c;
  const double lam_bar = p.lambda_max(N);
  for (std::size_t k = 0; k < N; ++k)
    if (!(p.lambda.at(k) > 0.0)) return c.reason = "lambda_" + std::to_string(k) + " must be positive", c;
  if (!(lam_bar < 1.0)) return c.reason = "sup lambda must be below 1", c;
  if (!(mu >= 0.0 && mu <= 1.0 / lam_bar - 1.0)) return c.reason = "mu must lie in [0, 1/lambda - 1]", c;
  if (!(lambda_tilde0 > 0.0 && C_mu > 0.0)) return c.reason = "lambda~_0 and C_mu must be positive", c;

  const double r1 = recurrence_step(p.r0, p.eta, p.lambda.at(0), p.rho.at(0));
  if (!(r1 <= (1.0 + mu) * lambda_tilde0 * C_mu)) return c.reason = "(1+mu) lambda~_0 C_mu < r_1", c;

  bool printed_only_ok = true;
  double Q = C_mu * lambda_tilde0;  // Q_1
  double growth = 1.0 + mu;         // (1+mu)^1
  for (std::size_t n = 1; n < N; ++n) {
    const double lam_n = p.lambda.at(n);
    if (!(p.rho.at(n) <= chi * mu * lam_n * Q))
      return c.reason = "rho_n > chi mu C_mu lambda~_0 prod lambda at n = " + std::to_string(n), c;
    if (!(p.eta * Q <= (1.0 - chi) * mu * lam_n)) printed_only_ok = false;
    if (!(p.eta * growth * Q <= (1.0 - chi) * mu * lam_n))
      return c.reason = "eta (1+mu)^n Q_n > (1-chi) mu lambda_n at n = " + std::to_string(n), c;
    Q *= lam_n;
    growth *= 1.0 + mu;
  }
  if (!printed_only_ok) c.notes.emplace_back("the weaker condition without (1+mu)^n failed somewhere");

  c.valid = true;
  c.lower.assign(N + 1, p.r0);
  c.upper.assign(N + 1, p.r0);
  double lower = p.r0;
  double upper_core = C_mu * lambda_tilde0;  // C_mu lambda~_0 prod_{k=1}^{n-1} lambda_k
  double g = 1.0;
  for (std::size_t n = 1; n <= N; ++n) {
    lower *= p.lambda.at(n - 1);
    if (n >= 2) upper_core *= p.lambda.at(n - 1);
    g *= 1.0 + mu;
    c.lower[n] = lower;
    c.upper[n] = g * upper_core;
  }
  return c;
}

/// Quadratic decay with a = eta r0 < 1:
///   a^(2^n) / eta <= r_n <= (1+mu)^(2^n - 1) a^(2^n) / eta
/// under lambda_n <= chi mu a^(2^n) and eta rho_n <= (1-chi) mu a^(2^(n+1)).
/// The exponent 2^n - 1 on (1+mu) is what the induction supports; for
/// mu = 0 both bounds coincide with the pure squaring map.
inline Certificate cert_quadratic(const MajorantParams& p, std::size_t N, double chi, double mu) {
  p.validate();
  if (N < 1) throw PreconditionError("horizon must be at least 1");
  Certificate c;
  c.regime = Regime::quadratic;
  c.checked_horizon = N;
  c.witnesses = {{"chi", chi}, {"mu", mu}};
  if (!(p.eta > 0.0)) return c.reason = "quadratic regime requires eta > 0", c;
  const double a = p.eta * p.r0;
  c.witnesses.emplace_back("eta_r0", a);
  if (!(a < 1.0)) return c.reason = "quadratic regime requires eta r0 < 1", c;
  if (!(mu >= 0.0)) return c.reason = "mu must be nonnegative", c;
  if (!(chi >= 0.0 && chi <= 1.0)) return c.reason = "chi must lie in [0, 1]", c;

  double pow_n = a;  // a^(2^n)
  for (std::size_t n = 0; n < N; ++n) {
    const double pow_next = pow_n * pow_n;
    if (!(p.lambda.at(n) <= chi * mu * pow_n))
      return c.reason = "lambda_n > chi mu (eta r0)^(2^n) at n = " + std::to_string(n), c;
    if (!(p.eta * p.rho.at(n) <= (1.0 - chi) * mu * pow_next))
      return c.reason = "eta rho_n > (1-chi) mu (eta r0)^(2^(n+1)) at n = " + std::to_string(n), c;
    pow_n = pow_next;
  }
  c.valid = true;
  c.lower.resize(N + 1);
  c.upper.resize(N + 1);
  const double b = (1.0 + mu) * a;
  double la = a;
  double ub = b;
  for (std::size_t n = 0; n <= N; ++n) {
    c.lower[n] = la / p.eta;
    c.upper[n] = ub / (1.0 + mu) / p.eta;
    la *= la;
    ub *= ub;
  }
  return c;
}

namespace detail {

template <std::size_t K>
std::array<double, K> linspace(double lo, double hi) {
  std::array<double, K> out{};
  for (std::size_t i = 0; i < K; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(K - 1);
  return out;
}

template <std::size_t K>
std::array<double, K> logspace(double lo, double hi) {
  std::array<double, K> out{};
  for (std::size_t i = 0; i < K; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(K - 1));
  return out;
}

}  // namespace detail

/// Coarse grid search (16 x 16) over admissible (C1, C2); first valid wins.
inline Certificate search_sandwich(const MajorantParams& p, std::size_t N = default_horizon) {
  Certificate last = detail::invalid(Regime::sandwich, N, "no grid witness found");
  for (double C1 : detail::linspace<16>(0.0, 0.95)) {
    const double c2_max = p.eta > 0.0 ? (1.0 - C1) * (1.0 - C1) / (4.0 * p.eta) : 1e6;
    for (double frac : detail::logspace<16>(1e-6, 1.0)) {
      Certificate c = cert_sandwich(p, N, C1, frac * c2_max);
      if (c.valid) return c;
      last = std::move(c);
    }
  }
  last.reason = "no grid witness found (last: " + last.reason + ")";
  return last;
}

/// 16^3 grid over chi, mu and the C_mu scale, with lambda~_0 = lambda_0.
inline Certificate search_geometric(const MajorantParams& p, std::size_t N = default_horizon) {
  Certificate last = detail::invalid(Regime::geometric, N, "no grid witness found");
  const double lam_bar = p.lambda_max(N);
  const double lt0 = p.lambda.at(0);
  if (!(lam_bar > 0.0 && lam_bar < 1.0 && lt0 > 0.0)) return cert_geometric(p, N, 0.5, 0.0, 1.0, 1.0);
  const double r1 = recurrence_step(p.r0, p.eta, p.lambda.at(0), p.rho.at(0));
  const double mu_max = 1.0 / lam_bar - 1.0;
  for (double mu : detail::linspace<16>(0.0, mu_max)) {
    for (double chi : detail::linspace<16>(0.0, 1.0)) {
      for (double scale : detail::logspace<16>(1.0, 1e3)) {
        const double C_mu = std::max(r1, 1e-300) / ((1.0 + mu) * lt0) * scale;
        Certificate c = cert_geometric(p, N, chi, mu, lt0, C_mu);
        if (c.valid) return c;
        last = std::move(c);
      }
    }
  }
  last.reason = "no grid witness found (last: " + last.reason + ")";
  return last;
}

/// 16 x 16 grid over (chi, mu) with mu in {0} and [1e-8, 1e2].
inline Certificate search_quadratic(const MajorantParams& p, std::size_t N = default_horizon) {
  Certificate last = detail::invalid(Regime::quadratic, N, "no grid witness found");
  std::array<double, 16> mus{};
  const auto tail = detail::logspace<15>(1e-8, 1e2);
  std::copy(tail.begin(), tail.end(), mus.begin() + 1);
  for (double mu : mus) {
    for (double chi : detail::linspace<16>(0.0, 1.0)) {
      Certificate c = cert_quadratic(p, N, chi, mu);
      if (c.valid) return c;
      last = std::move(c);
    }
  }
  last.reason = "no grid witness found (last: " + last.reason + ")";
  return last;
}

/// Upper bound on sum_{k >= n} r_k, hence on ||x_n - x*||, from the measured
/// r_{n-1} and a majorant the trace satisfies.
///
/// With lambda^ = sup_{k >= n-1} lambda_k and C = r_{n-1}: if eta = 0 the
/// steps obey r_k <= lambda^ r_{k-1} + rho_{k-1}; if eta > 0 and
/// eta C^2 + lambda^ C + sup rho <= C, every later step stays below C and the
/// same holds with lambda^ replaced by eta C + lambda^. Summing gives
///   sum_{k >= n} r_k <= (lambda_eff r_{n-1} + sum_{k >= n-1} rho_k) / (1 - lambda_eff).
inline double tail_bound(const std::vector<double>& trace_r, const MajorantParams& p, std::size_t n) {
  if (n == 0) {
    if (trace_r.empty()) throw PreconditionError("tail_bound needs r_0");
    return trace_r[0] + tail_bound(trace_r, p, 1);
  }
  if (n > trace_r.size()) throw PreconditionError("tail_bound needs r_{n-1} from the trace");
  const double C = trace_r[n - 1];
  const double lam = p.lambda.sup_from(n - 1);
  double lam_eff = lam;
  if (p.eta > 0.0) {
    const double rho_sup = p.rho.sup_from(n - 1);
    if (!(p.eta * C * C + lam * C + rho_sup <= C) && C > 0.0)
      throw NoValidMajorantError("eta > 0 and the step size is not yet inside the contraction region");
    if (C == 0.0 && rho_sup > 0.0) throw NoValidMajorantError("eta > 0 with zero step and positive rho");
    lam_eff = p.eta * C + lam;
  }
  if (!(lam_eff < 1.0)) throw NoValidMajorantError("no linear-rate majorant below 1 from step " + std::to_string(n));
  const double rho_tail = p.rho.tail_sum(n - 1);
  if (std::isinf(rho_tail)) throw NoValidMajorantError("perturbation series is not summable");
  return (lam_eff * C + rho_tail) / (1.0 - lam_eff);
}

}  // namespace nkv

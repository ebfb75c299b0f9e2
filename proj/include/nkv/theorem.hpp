#pragma once

// Problem constants, the step inequalities they imply for each scheme, and
// the reduction of those inequalities to the scalar majorant recurrence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nkv/core.hpp"
#include "nkv/error.hpp"
#include "nkv/majorant.hpp"
#include "nkv/schemes.hpp"
#include "nkv/sequence.hpp"

namespace nkv {

/// M, K bound A and A' on the working ball; M_seq, K_seq bound B_n and B_n';
/// M_star, K_star are their suprema. eps bounds ||A(x_0) - x_0||.
struct ProblemConstants {
  double M = 0.0;
  Sequence M_seq;
  double M_star = 0.0;
  double K = 0.0;
  Sequence K_seq;
  double K_star = 0.0;
  double eps = 0.0;
  Sequence eps_seq;
  Sequence sigma_seq;
  Sequence gamma_seq;

  double q() const {
    if (!(M_star < 1.0)) throw PreconditionError("q needs M_star < 1");
    return (M + M_star) / (1.0 - M_star);
  }

  void validate() const {
    for (double v : {M, M_star, K, K_star, eps})
      if (!(v >= 0.0)) throw PreconditionError("problem constants must be nonnegative");
    M_seq.validate_nonnegative("M sequence");
    K_seq.validate_nonnegative("K sequence");
    eps_seq.validate_nonnegative("eps sequence");
    sigma_seq.validate_nonnegative("sigma sequence");
    gamma_seq.validate_nonnegative("gamma sequence");
  }
};

namespace detail {

// a_k = (e_k + e_{k+1}) scaled by s, in the closed form of e when possible.
// Power sequences use e_{k+1} <= e_k, so the result is an upper bound.
inline Sequence pair_sum(const Sequence& e, double s) {
  Sequence base;
  switch (e.kind()) {
    case Sequence::Kind::constant: base = Sequence::constant(2.0 * e.scale() * s); break;
    case Sequence::Kind::geometric:
      base = Sequence::geometric(e.scale() * (1.0 + e.parameter()) * s, e.parameter());
      break;
    case Sequence::Kind::power:
      if (e.parameter() >= 0.0) {
        base = Sequence::power(2.0 * e.scale() * s, e.parameter());
        break;
      }
      [[fallthrough]];
    case Sequence::Kind::table: {
      const std::size_t n = e.kind() == Sequence::Kind::table ? e.values().size() : default_horizon + 1;
      std::vector<double> v(n);
      for (std::size_t k = 0; k < n; ++k) v[k] = (e.at(k) + e.at(k + 1) - 2.0 * e.offset()) * s;
      base = Sequence::table(std::move(v));
      break;
    }
  }
  return base.plus(2.0 * e.offset() * s);
}

}  // namespace detail

/// Solves the step inequality of the given scheme for r_n, with M_n <= M_star
/// and K_n <= K_star, giving r_n <= eta r_{n-1}^2 + lambda_{n-1} r_{n-1} + rho_{n-1}.
/// For modified Newton the r~ inequality is first bounded with cert_bounded
/// over the horizon; its bound C~ enters lambda.
inline MajorantParams theorem_to_recurrence(const ProblemConstants& c, SchemeKind scheme, double r0,
                                            std::size_t horizon = default_horizon) {
  c.validate();
  if (!(c.M_star < 1.0)) throw PreconditionError("M_star >= 1: the implicit r_n term cannot be moved left");
  if (!(r0 >= 0.0)) throw PreconditionError("r0 must be nonnegative");
  const double s = 1.0 / (1.0 - c.M_star);
  MajorantParams p;
  p.r0 = r0;
  p.rho = detail::pair_sum(c.eps_seq, s);
  switch (scheme) {
    case SchemeKind::contraction:
    case SchemeKind::custom:
      p.eta = 0.0;
      p.lambda = Sequence::constant((c.M + c.M_star) * s);
      break;
    case SchemeKind::newton:
      p.eta = 0.5 * (c.K + c.K_star) * s;
      p.lambda = c.sigma_seq.scaled(s);
      break;
    case SchemeKind::modified_newton: {
      p.eta = 0.5 * (c.K + c.K_star) * s;
      MajorantParams tilde;
      tilde.eta = p.eta;
      tilde.lambda = c.gamma_seq.scaled(s);
      tilde.rho = c.eps_seq.scaled(s).plus(c.eps * s);
      tilde.r0 = 0.0;
      const Certificate bound = cert_bounded(tilde, horizon);
      if (!bound.valid) throw PreconditionError("no bound for ||x_n - x_0||: " + bound.reason);
      p.lambda = c.gamma_seq.scaled(s).plus((c.K + c.K_star) * *bound.witness("C") * s);
      break;
    }
  }
  return p;
}

/// Supremum of M_n and K_n for a scheme. Exact for the built-in schemes whose
/// steps are affine (K_n = 0): contraction has M_n = 0, modified Newton
/// M_n <= ||A'(x_0)|| + gamma_n, Newton M_n <= sup ||A'|| + sigma_n, which
/// falls back to M + sup sigma when no tighter value is declared.
struct SchemeBounds {
  double M_star = 0.0;
  double K_star = 0.0;
};

inline SchemeBounds scheme_bounds(const Scheme& scheme, const OperatorSpec& A, const Vector& x0,
                                  const PerturbationPlan& plan, double M, std::optional<double> declared_M_star,
                                  NormKind kind, std::size_t horizon = default_horizon) {
  switch (scheme.kind) {
    case SchemeKind::contraction: return {0.0, 0.0};
    case SchemeKind::custom: return {scheme.declared_M_star, scheme.declared_K_star};
    case SchemeKind::newton: {
      const double sig = plan.sigma_seq.sup_from(0);
      return {declared_M_star ? *declared_M_star + sig : M + sig, 0.0};
    }
    case SchemeKind::modified_newton: {
      double gam = 0.0;
      for (std::size_t k = 0; k <= horizon; ++k) gam = std::max(gam, plan.gamma_seq.at(k));
      return {induced_norm(A.jacobian(x0), kind) + gam, 0.0};
    }
  }
  return {};
}

/// Constants for one run: declared M, K; per-scheme M_star, K_star; eps from
/// the plan or, failing that, the measured ||A(x_0) - x_0||.
inline ProblemConstants constants_for_run(const Scheme& scheme, const OperatorSpec& A, const Vector& x0,
                                          const PerturbationPlan& plan, double M, double K,
                                          std::optional<double> declared_M_star, NormKind kind) {
  ProblemConstants c;
  c.M = M;
  c.K = K;
  const SchemeBounds b = scheme_bounds(scheme, A, x0, plan, M, declared_M_star, kind);
  c.M_star = b.M_star;
  c.K_star = b.K_star;
  c.M_seq = Sequence::constant(b.M_star);
  c.K_seq = Sequence::constant(b.K_star);
  c.eps = plan.eps0.value_or(distance(A(x0), x0, kind));
  c.eps_seq = plan.eps_seq;
  c.sigma_seq = plan.sigma_seq;
  c.gamma_seq = plan.gamma_seq;
  return c;
}

struct PrecheckItem {
  std::string name;
  std::string verdict;  // "pass", "fail ...", "undetermined"
  std::string detail;
  bool passed() const { return verdict == "pass"; }
};

struct PrecheckReport {
  std::vector<PrecheckItem> items;

  bool all_pass() const {
    return std::all_of(items.begin(), items.end(), [](const PrecheckItem& i) { return i.passed(); });
  }
  const PrecheckItem* find(const std::string& name) const {
    for (const auto& i : items)
      if (i.name == name) return &i;
    return nullptr;
  }
};

/// Summability verdict for a tolerance sequence. Closed forms are decided
/// analytically; tables are treated as samples of an unknown sequence and
/// tested by ratio and by the trend of n e_n.
inline PrecheckItem summability(const Sequence& e) {
  PrecheckItem item{"eps_summable", "undetermined", e.describe()};
  if (e.offset() > 0.0) return item.verdict = "fail (constant tail)", item;
  switch (e.kind()) {
    case Sequence::Kind::constant: item.verdict = e.scale() == 0.0 ? "pass" : "fail (constant tail)"; break;
    case Sequence::Kind::geometric:
      item.verdict = (e.scale() == 0.0 || e.parameter() < 1.0) ? "pass" : "fail (ratio >= 1)";
      break;
    case Sequence::Kind::power:
      item.verdict = (e.scale() == 0.0 || e.parameter() > 1.0) ? "pass" : "fail (harmonic lower bound detected)";
      break;
    case Sequence::Kind::table: {
      const auto& v = e.values();
      if (v.back() == 0.0) {
        item.verdict = "pass";
        break;
      }
      const std::size_t n = v.size();
      if (n < 8) break;
      const std::size_t from = n / 2;
      double worst_ratio = 0.0;
      double min_ne = std::numeric_limits<double>::infinity();
      double first_ne = 0.0;
      for (std::size_t k = from; k < n; ++k) {
        const double idx = static_cast<double>(std::max<std::size_t>(k, 1));
        if (k == from) first_ne = idx * v[k];
        min_ne = std::min(min_ne, idx * v[k]);
        if (k + 1 < n) worst_ratio = std::max(worst_ratio, v[k] > 0.0 ? v[k + 1] / v[k] : 0.0);
      }
      if (worst_ratio < 0.95) {
        item.verdict = "pass";
        item.detail += ", ratio test " + std::to_string(worst_ratio);
      } else if (min_ne > 0.0 && min_ne >= 0.5 * first_ne) {
        item.verdict = "fail (harmonic lower bound detected)";
        item.detail += ", n eps_n >= " + std::to_string(min_ne);
      }
      break;
    }
  }
  return item;
}

/// Pass/fail per standing assumption. With the first measured step r_0 it
/// also checks r_0 <= (eps + eps_0)/(1 - M_0).
inline PrecheckReport precheck(const ProblemConstants& c, std::optional<double> first_step = std::nullopt) {
  PrecheckReport rep;
  rep.items.push_back({"M_star_below_1", c.M_star < 1.0 ? "pass" : "fail", "M_star = " + std::to_string(c.M_star)});
  if (c.M_star < 1.0) {
    const double q = c.q();
    rep.items.push_back({"q_below_1", q < 1.0 ? "pass" : "fail", "q = " + std::to_string(q)});
  } else {
    rep.items.push_back({"q_below_1", "fail", "q undefined for M_star >= 1"});
  }
  rep.items.push_back(summability(c.eps_seq));
  rep.items.push_back({"K_star_finite", std::isfinite(c.K_star) ? "pass" : "fail", "K_star = " + std::to_string(c.K_star)});
  if (first_step) {
    const double M0 = c.M_seq.at(0);
    if (!(M0 < 1.0)) {
      rep.items.push_back({"first_step_bound", "fail", "M_0 >= 1"});
    } else {
      const double bound = (c.eps + c.eps_seq.at(0)) / (1.0 - M0);
      rep.items.push_back({"first_step_bound", leq_slack(*first_step, bound) ? "pass" : "fail",
                           "r_0 = " + std::to_string(*first_step) + ", bound = " + std::to_string(bound)});
    }
  }
  return rep;
}

/// One checked step inequality: lhs <= rhs. part 4 has two inequalities
/// (1: distance from x_0, 2: step size).
struct AuditEntry {
  std::size_t n = 0;
  int part = 1;
  int inequality = 1;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
  bool flagged = false;  // failed as stated, held with M_n in place of M_{n-1}
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  std::size_t violations = 0;
  std::size_t flagged = 0;
  bool ok() const noexcept { return violations == 0; }
};

/// Checks the step inequalities on a trace. Per-step quantities the trace
/// measures (M_n, ||A(x_n) - B_n(x_n)||, derivative mismatch, ||A(x_0) - x_0||)
/// are used as the larger of declared and measured.
inline AuditReport audit_theorem(const IterationTrace& t, const ProblemConstants& c, SchemeKind scheme,
                                 double inner_tol = default_inner_tol) {
  AuditReport rep;
  const double slack = 10.0 * inner_tol + 1e-12;
  const std::size_t steps = t.steps();
  if (steps == 0) return rep;
  auto eps_at = [&](std::size_t k) { return std::max(c.eps_seq.at(k), t.consistency[k]); };
  auto M_at = [&](std::size_t k) { return t.lipschitz_B[k]; };
  auto K_at = [&](std::size_t k) { return c.K_seq.at(k); };
  // derivative mismatch of B_k, recorded with x_{k+1}
  auto dev_at = [&](const Sequence& declared, std::size_t k) { return std::max(declared.at(k), t.injected_derivative[k + 1]); };
  const double eps = std::max(c.eps, t.residual[0]);

  auto record = [&](std::size_t n, int part, int ineq, double lhs, double rhs, std::optional<double> alt_rhs = {}) {
    AuditEntry e{n, part, ineq, lhs, rhs, lhs <= rhs + slack, false};
    if (!e.ok && alt_rhs && lhs <= *alt_rhs + slack) {
      e.ok = true;
      e.flagged = true;
    }
    if (!e.ok) ++rep.violations;
    if (e.flagged) ++rep.flagged;
    rep.entries.push_back(e);
  };

  record(0, 1, 1, t.r[0], M_at(0) * t.r[0] + eps + eps_at(0));

  for (std::size_t n = 1; n < steps; ++n) {
    const double r = t.r[n];
    const double rp = t.r[n - 1];
    const double common = M_at(n) * r + eps_at(n - 1) + eps_at(n);
    const double half_K = 0.5 * (c.K + K_at(n - 1));
    switch (scheme) {
      case SchemeKind::contraction:
      case SchemeKind::custom:
        record(n, 2, 1, r, common + (c.M + M_at(n - 1)) * rp);
        break;
      case SchemeKind::newton:
        record(n, 3, 1, r, common + half_K * rp * rp + dev_at(c.sigma_seq, n - 1) * rp);
        break;
      case SchemeKind::modified_newton: {
        const double rt = t.r_tilde[n - 1];
        record(n, 4, 2, r,
               common + half_K * rp * rp + (dev_at(c.gamma_seq, n - 1) + 2.0 * half_K * rt) * rp);
        break;
      }
    }
  }
  if (scheme == SchemeKind::modified_newton) {
    for (std::size_t n = 1; n <= steps; ++n) {
      const double rt = t.r_tilde[n];
      const double rtp = t.r_tilde[n - 1];
      const double rest = 0.5 * (c.K + K_at(n - 1)) * rtp * rtp + dev_at(c.gamma_seq, n - 1) * rtp + eps + eps_at(n - 1);
      std::optional<double> shifted;
      if (n < steps) shifted = M_at(n) * rt + rest;
      record(n, 4, 1, rt, M_at(n - 1) * rt + rest, shifted);
    }
  }
  return rep;
}

}  // namespace nkv

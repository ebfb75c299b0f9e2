#pragma once

// Problem files (JSON) and the built-in catalog.
//
// {
//   "name": "...", "kind": "fixed_point" | "root" | "integral", "dim": 1,
//   "operator": ["0.5*x1 + 1"],            // A, P (root) or pointwise A (integral)
//   "derivative": [["0.5"]],               // optional Jacobian, row i = d/dx of component i
//   "scheme": "contraction" | "newton" | "modified_newton" | {"custom": {"kind": "relaxed", "beta": -0.5}},
//   "norm": "sup" | "euclidean" | "one",
//   "x0": [0]                              // integral: expression in t, e.g. "0"
//   "perturbation": {"mode": "none", "eps0": 1, "eps": {"kind": "constant", "c": 0.01}, "sigma": ..., "gamma": ...},
//   "constants": {"M": 0.5, "M_star": 0.2, "K": 0} | "estimate" | {"estimate": {"radius": 0.5, "samples": 2000}},
//   "stop": {"max_n": 100, "r_tol": 0, "residual_tol": 1e-12},
//   "gamma": {"kind": "newton" | "damped", "alpha": 0.5},         // root
//   "kernel": {"kind": "volterra" | "expression", "expr": "1"},     // integral
//   "T_end": 2, "m": 400,                                          // integral
//   "exact": [2] | "exp(t) - 1",
//   "certificates": [{"regime": "bounded"}, {"regime": "sandwich", "witnesses": {"C1": 0.2, "C2": 0.02}},
//                    {"regime": "geometric", "search": true}],
//   "horizon": 200, "seed": 0, "inner_tol": 1e-12
// }
//
// Sequences: {"kind": "constant", "c": ...}, {"kind": "geometric", "c": ..., "q": ...},
// {"kind": "power", "c": ..., "p": ...}, {"kind": "table", "values": [...]}.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nkv/core.hpp"
#include "nkv/error.hpp"
#include "nkv/estimate.hpp"
#include "nkv/expr.hpp"
#include "nkv/greens.hpp"
#include "nkv/majorant.hpp"
#include "nkv/rootfind.hpp"
#include "nkv/schemes.hpp"
#include "nkv/sequence.hpp"

namespace nkv {

using json = nlohmann::json;

enum class ProblemKind { fixed_point, root, integral };

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::fixed_point: return "fixed_point";
    case ProblemKind::root: return "root";
    case ProblemKind::integral: return "integral";
  }
  return "?";
}

struct CertificateRequest {
  Regime regime = Regime::bounded;
  bool search = false;
  std::map<std::string, double> witnesses;
};

struct Problem {
  std::string name;
  ProblemKind kind = ProblemKind::fixed_point;
  std::size_t dim = 1;
  std::vector<Expr> components;
  std::optional<std::vector<std::vector<Expr>>> jacobian;
  SchemeKind scheme = SchemeKind::contraction;
  std::optional<double> relax_beta;  // custom relaxed scheme
  NormKind norm = NormKind::sup;
  std::vector<double> x0;            // fixed_point, root
  std::optional<Expr> x0_profile;    // integral, over t
  PerturbationPlan plan;
  std::optional<double> M, M_star, K, K_star;
  std::optional<double> estimate_radius;
  std::size_t estimate_samples = 2000;
  StopRule stop;
  GammaSpec gamma;
  std::optional<KernelSpec> kernel;
  double T_end = 1.0;
  std::size_t m = 100;
  std::optional<std::vector<double>> exact_point;
  std::optional<Expr> exact_profile;  // integral, over t
  std::vector<CertificateRequest> certificates;
  std::size_t horizon = default_horizon;
  double inner_tol = default_inner_tol;
  json source;

  bool estimates_constants() const noexcept { return estimate_radius.has_value(); }
};

/// FNV-1a (64 bit) of the canonical dump, as 16 hex digits.
/// FNV-1a over the fields that shape the trace; requested certificates,
/// horizon and description can change without invalidating a trace.
inline std::string problem_hash(const json& source) {
  json shaping = source;
  if (shaping.is_object())
    for (const char* key : {"certificates", "horizon", "description"}) shaping.erase(key);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : shaping.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string problem_hash(const Problem& p) { return problem_hash(p.source); }

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "name",  "kind",   "dim",     "operator", "derivative",   "scheme", "norm",    "x0",      "perturbation",
      "constants", "stop", "gamma", "kernel",  "T_end",        "m",      "exact",   "certificates", "horizon",
      "seed",  "inner_tol", "description"};
  return keys;
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(where, "expected a finite number");
  return v;
}

inline double nonneg(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (v < 0.0) throw ValidationError(where, "must be nonnegative");
  return v;
}

inline std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ValidationError(where, "expected a nonnegative integer");
  return static_cast<std::size_t>(j.get<long long>());
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ValidationError(where, "expected a string");
  return j.get<std::string>();
}

inline Expr expression(const json& j, const std::string& where, const std::vector<std::string>& vars) {
  const std::string src = text(j, where);
  try {
    return parse_expr(src, vars);
  } catch (const UnknownVariableError& e) {
    throw ValidationError(where, "unknown variable '" + e.name() + "' at position " + std::to_string(e.position()) +
                                     " in \"" + src + "\"");
  } catch (const ParseError& e) {
    throw ValidationError(where, std::string(e.what()) + " at position " + std::to_string(e.position()) + " in \"" +
                                     src + "\"");
  }
}

inline Sequence sequence(const json& j, const std::string& where) {
  if (j.is_number()) return Sequence::constant(nonneg(j, where));
  if (!j.is_object()) throw ValidationError(where, "expected a sequence object");
  const std::string kind = text(j.value("kind", json("constant")), where + ".kind");
  auto field = [&](const char* name) {
    if (!j.contains(name)) throw ValidationError(where, std::string("missing field '") + name + "'");
    return number(j.at(name), where + "." + name);
  };
  Sequence s;
  if (kind == "constant") s = Sequence::constant(field("c"));
  else if (kind == "geometric") s = Sequence::geometric(field("c"), field("q"));
  else if (kind == "power") s = Sequence::power(field("c"), field("p"));
  else if (kind == "table") {
    if (!j.contains("values") || !j.at("values").is_array() || j.at("values").empty())
      throw ValidationError(where, "table needs a nonempty 'values' array");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.at("values").size(); ++i)
      v.push_back(number(j.at("values")[i], where + ".values[" + std::to_string(i) + "]"));
    s = Sequence::table(std::move(v));
  } else {
    throw ValidationError(where + ".kind", "unknown sequence kind '" + kind + "'");
  }
  try {
    s.validate_nonnegative(where);
  } catch (const PreconditionError& e) {
    throw ValidationError(where, e.what());
  }
  return s;
}

inline std::vector<std::string> state_variables(std::size_t dim) {
  auto vars = coordinate_names(dim);
  if (dim == 1) vars.push_back("x");  // alias of x1
  return vars;
}

inline std::vector<double> slots_for(const Vector& x) {
  std::vector<double> s = x.to_std();
  if (x.dim() == 1) s.push_back(x[0]);
  return s;
}

}  // namespace detail

/// Validates a problem document completely; nothing runs until this passes.
inline Problem parse_problem(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ValidationError("problem", "expected a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!known_keys().contains(key)) throw ValidationError(key, "unknown field");

  Problem p;
  p.source = doc;
  p.name = doc.contains("name") ? text(doc.at("name"), "name") : "unnamed";
  const std::string kind = doc.contains("kind") ? text(doc.at("kind"), "kind") : "fixed_point";
  if (kind == "fixed_point") p.kind = ProblemKind::fixed_point;
  else if (kind == "root") p.kind = ProblemKind::root;
  else if (kind == "integral") p.kind = ProblemKind::integral;
  else throw ValidationError("kind", "unknown problem kind '" + kind + "'");

  if (!doc.contains("operator") || !doc.at("operator").is_array() || doc.at("operator").empty())
    throw ValidationError("operator", "expected a nonempty array of expressions");
  p.dim = doc.contains("dim") ? count(doc.at("dim"), "dim") : doc.at("operator").size();
  if (p.dim == 0) throw ValidationError("dim", "must be positive");
  if (doc.at("operator").size() != p.dim)
    throw ValidationError("operator", "expected " + std::to_string(p.dim) + " component expressions");
  const auto vars = state_variables(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i)
    p.components.push_back(expression(doc.at("operator")[i], "operator[" + std::to_string(i) + "]", vars));

  if (doc.contains("derivative")) {
    const json& d = doc.at("derivative");
    if (!d.is_array() || d.size() != p.dim) throw ValidationError("derivative", "expected a dim x dim array");
    std::vector<std::vector<Expr>> jac;
    for (std::size_t i = 0; i < p.dim; ++i) {
      if (!d[i].is_array() || d[i].size() != p.dim) throw ValidationError("derivative", "expected a dim x dim array");
      std::vector<Expr> row;
      for (std::size_t j = 0; j < p.dim; ++j)
        row.push_back(expression(d[i][j], "derivative[" + std::to_string(i) + "][" + std::to_string(j) + "]", vars));
      jac.push_back(std::move(row));
    }
    p.jacobian = std::move(jac);
  }

  if (doc.contains("scheme")) {
    const json& s = doc.at("scheme");
    if (s.is_string()) {
      const auto k = scheme_kind_from_string(s.get<std::string>());
      if (!k || *k == SchemeKind::custom) throw ValidationError("scheme", "unknown scheme '" + s.get<std::string>() + "'");
      p.scheme = *k;
    } else if (s.is_object() && s.contains("custom")) {
      const json& c = s.at("custom");
      if (!c.is_object() || text(c.value("kind", json("")), "scheme.custom.kind") != "relaxed")
        throw ValidationError("scheme.custom.kind", "only the 'relaxed' custom scheme is built in");
      if (!c.contains("beta")) throw ValidationError("scheme.custom", "missing 'beta'");
      const double beta = number(c.at("beta"), "scheme.custom.beta");
      if (!(std::abs(beta) < 1.0)) throw ValidationError("scheme.custom.beta", "must satisfy |beta| < 1");
      p.scheme = SchemeKind::custom;
      p.relax_beta = beta;
    } else {
      throw ValidationError("scheme", "expected a scheme name or {\"custom\": {...}}");
    }
  }

  if (doc.contains("norm")) {
    const auto n = norm_kind_from_string(text(doc.at("norm"), "norm"));
    if (!n) throw ValidationError("norm", "unknown norm '" + doc.at("norm").get<std::string>() + "'");
    p.norm = *n;
  }

  if (p.kind == ProblemKind::integral) {
    p.T_end = doc.contains("T_end") ? number(doc.at("T_end"), "T_end") : 1.0;
    if (!(p.T_end > 0.0)) throw ValidationError("T_end", "must be positive");
    p.m = doc.contains("m") ? count(doc.at("m"), "m") : 100;
    if (p.m < 2) throw ValidationError("m", "grid size must be at least 2");
    if (!doc.contains("kernel")) throw ValidationError("kernel", "integral problems need a kernel");
    const json& k = doc.at("kernel");
    const std::string kk = text(k.value("kind", json("volterra")), "kernel.kind");
    if (kk == "volterra") p.kernel = build_volterra_kernel(p.T_end);
    else if (kk == "expression") {
      if (!k.contains("expr")) throw ValidationError("kernel", "expression kernel needs 'expr'");
      const Expr g = expression(k.at("expr"), "kernel.expr", {"t", "s"});
      p.kernel = KernelSpec{KernelSpec::Kind::expression, g, p.T_end};
    } else {
      throw ValidationError("kernel.kind", "unknown kernel kind '" + kk + "'");
    }
    p.x0_profile = expression(doc.value("x0", json("0")), "x0", {"t"});
    if (p.dim != 1) throw ValidationError("dim", "integral problems are scalar");
    if (p.scheme != SchemeKind::contraction) throw ValidationError("scheme", "integral problems use the contraction scheme");
    if (doc.contains("exact")) p.exact_profile = expression(doc.at("exact"), "exact", {"t"});
  } else {
    for (const char* key : {"kernel", "T_end", "m"})
      if (doc.contains(key)) throw ValidationError(key, "only integral problems take this field");
    if (!doc.contains("x0")) throw ValidationError("x0", "missing starting point");
    const json& x0 = doc.at("x0");
    if (!x0.is_array() || x0.size() != p.dim) throw ValidationError("x0", "expected " + std::to_string(p.dim) + " numbers");
    for (std::size_t i = 0; i < p.dim; ++i) p.x0.push_back(number(x0[i], "x0[" + std::to_string(i) + "]"));
    if (doc.contains("exact")) {
      const json& e = doc.at("exact");
      if (!e.is_array() || e.size() != p.dim) throw ValidationError("exact", "expected " + std::to_string(p.dim) + " numbers");
      std::vector<double> v;
      for (std::size_t i = 0; i < p.dim; ++i) v.push_back(number(e[i], "exact[" + std::to_string(i) + "]"));
      p.exact_point = std::move(v);
    }
  }

  if (p.kind == ProblemKind::root) {
    const json g = doc.value("gamma", json{{"kind", "newton"}});
    const std::string gk = text(g.value("kind", json("newton")), "gamma.kind");
    if (gk == "newton") p.gamma = GammaSpec::newton();
    else if (gk == "damped") {
      if (!g.contains("alpha")) throw ValidationError("gamma", "damped gamma needs 'alpha'");
      const double alpha = number(g.at("alpha"), "gamma.alpha");
      if (!(alpha > 0.0)) throw ValidationError("gamma.alpha", "must be positive");
      p.gamma = GammaSpec::damped(alpha);
    } else {
      throw ValidationError("gamma.kind", "unknown gamma kind '" + gk + "'");
    }
  } else if (doc.contains("gamma")) {
    throw ValidationError("gamma", "only root problems take a gamma block");
  }

  if (doc.contains("perturbation")) {
    const json& pt = doc.at("perturbation");
    if (!pt.is_object()) throw ValidationError("perturbation", "expected an object");
    for (const auto& [key, _] : pt.items())
      if (key != "mode" && key != "eps0" && key != "eps" && key != "sigma" && key != "gamma")
        throw ValidationError("perturbation." + key, "unknown field");
    const std::string mode = text(pt.value("mode", json("none")), "perturbation.mode");
    const auto m = injection_mode_from_string(mode);
    if (!m) throw ValidationError("perturbation.mode", "unknown mode '" + mode + "'");
    p.plan.mode = *m;
    if (pt.contains("eps0")) p.plan.eps0 = nonneg(pt.at("eps0"), "perturbation.eps0");
    if (pt.contains("eps")) p.plan.eps_seq = sequence(pt.at("eps"), "perturbation.eps");
    if (pt.contains("sigma")) p.plan.sigma_seq = sequence(pt.at("sigma"), "perturbation.sigma");
    if (pt.contains("gamma")) p.plan.gamma_seq = sequence(pt.at("gamma"), "perturbation.gamma");
    if (p.kind == ProblemKind::integral && p.plan.mode != InjectionMode::none)
      throw ValidationError("perturbation", "integral problems run unperturbed");
  }
  if (doc.contains("seed")) p.plan.seed = count(doc.at("seed"), "seed");

  if (doc.contains("constants")) {
    const json& c = doc.at("constants");
    if (c.is_string()) {
      if (c.get<std::string>() != "estimate") throw ValidationError("constants", "expected an object or \"estimate\"");
      p.estimate_radius = 0.5;
    } else if (c.is_object() && c.contains("estimate")) {
      const json& e = c.at("estimate");
      p.estimate_radius = e.contains("radius") ? number(e.at("radius"), "constants.estimate.radius") : 0.5;
      if (!(*p.estimate_radius > 0.0)) throw ValidationError("constants.estimate.radius", "must be positive");
      if (e.contains("samples")) p.estimate_samples = count(e.at("samples"), "constants.estimate.samples");
      if (p.estimate_samples < 10) throw ValidationError("constants.estimate.samples", "need at least 10 samples");
    } else if (c.is_object()) {
      for (const auto& [key, val] : c.items()) {
        const double v = nonneg(val, "constants." + key);
        if (key == "M") p.M = v;
        else if (key == "M_star") p.M_star = v;
        else if (key == "K") p.K = v;
        else if (key == "K_star") p.K_star = v;
        else throw ValidationError("constants." + key, "unknown constant");
      }
    } else {
      throw ValidationError("constants", "expected an object or \"estimate\"");
    }
  }

  if (doc.contains("stop")) {
    const json& s = doc.at("stop");
    if (!s.is_object()) throw ValidationError("stop", "expected an object");
    for (const auto& [key, val] : s.items()) {
      if (key == "max_n") p.stop.max_n = count(val, "stop.max_n");
      else if (key == "r_tol") p.stop.r_tol = nonneg(val, "stop.r_tol");
      else if (key == "residual_tol") p.stop.residual_tol = nonneg(val, "stop.residual_tol");
      else throw ValidationError("stop." + key, "unknown field");
    }
  }

  if (doc.contains("certificates")) {
    const json& cs = doc.at("certificates");
    if (!cs.is_array()) throw ValidationError("certificates", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string where = "certificates[" + std::to_string(i) + "]";
      const json& c = cs[i];
      if (!c.is_object() || !c.contains("regime")) throw ValidationError(where, "expected {\"regime\": ...}");
      CertificateRequest req;
      const auto r = regime_from_string(text(c.at("regime"), where + ".regime"));
      if (!r) throw ValidationError(where + ".regime", "unknown regime '" + c.at("regime").get<std::string>() + "'");
      req.regime = *r;
      req.search = c.value("search", false);
      if (c.contains("witnesses")) {
        if (!c.at("witnesses").is_object()) throw ValidationError(where + ".witnesses", "expected an object");
        for (const auto& [key, val] : c.at("witnesses").items())
          req.witnesses[key] = number(val, where + ".witnesses." + key);
      }
      auto need = [&](std::initializer_list<const char*> names) {
        if (req.search) return;
        for (const char* n : names)
          if (!req.witnesses.contains(n))
            throw ValidationError(where + ".witnesses", std::string("missing witness '") + n + "' (or set \"search\": true)");
      };
      switch (req.regime) {
        case Regime::sandwich: need({"C1", "C2"}); break;
        case Regime::geometric: need({"chi", "mu", "lambda_tilde0", "C_mu"}); break;
        case Regime::quadratic: need({"chi", "mu"}); break;
        default: break;
      }
      p.certificates.push_back(std::move(req));
    }
  }

  if (doc.contains("horizon")) {
    p.horizon = count(doc.at("horizon"), "horizon");
    if (p.horizon < 1) throw ValidationError("horizon", "must be at least 1");
  }
  if (doc.contains("inner_tol")) {
    p.inner_tol = number(doc.at("inner_tol"), "inner_tol");
    if (!(p.inner_tol > 0.0)) throw ValidationError("inner_tol", "must be positive");
  }
  return p;
}

inline Problem parse_problem_text(const std::string& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < source.size(); ++i) {
      if (source[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ValidationError(std::to_string(line) + ":" + std::to_string(column), e.what());
  }
  return parse_problem(doc);
}

inline Problem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot read file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

/// A, or P for root problems, or the pointwise map of an integral problem,
/// from the component expressions. Declared M, K are attached.
inline OperatorSpec component_operator(const Problem& p) {
  const auto comps = p.components;
  Map eval = [comps](const Vector& x) {
    const auto slots = detail::slots_for(x);
    std::vector<double> out;
    out.reserve(comps.size());
    for (const auto& e : comps) out.push_back(e(slots));
    return Vector(out);
  };
  std::optional<DirectionalDerivative> deriv;
  if (p.jacobian) {
    const auto jac = *p.jacobian;
    deriv = [jac](const Vector& x, const Vector& h) {
      const auto slots = detail::slots_for(x);
      Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(jac.size()));
      for (std::size_t i = 0; i < jac.size(); ++i)
        for (std::size_t j = 0; j < jac.size(); ++j) out[static_cast<Eigen::Index>(i)] += jac[i][j](slots) * h[j];
      return Vector(out);
    };
  }
  const bool is_A = p.kind != ProblemKind::root;
  return OperatorSpec(p.dim, std::move(eval), std::move(deriv), is_A ? p.M : std::nullopt, is_A ? p.K : std::nullopt);
}

/// The fixed-point operator A of a fixed-point or root problem.
inline OperatorSpec build_operator(const Problem& p) {
  if (p.kind == ProblemKind::integral) throw PreconditionError("integral problems are built with build_grid_problem");
  const OperatorSpec C = component_operator(p);
  if (p.kind == ProblemKind::fixed_point) return C;
  const OperatorSpec A = wrap_root_problem(C, p.gamma);
  return OperatorSpec(
      A.dim(), [A](const Vector& x) { return A(x); }, std::nullopt, p.M, p.K);
}

inline Scheme build_scheme(const Problem& p, const OperatorSpec& A) {
  switch (p.scheme) {
    case SchemeKind::contraction: return Scheme::contraction();
    case SchemeKind::newton: return Scheme::newton();
    case SchemeKind::modified_newton: return Scheme::modified_newton();
    case SchemeKind::custom: return Scheme::relaxed(A, *p.relax_beta);
  }
  return Scheme::contraction();
}

inline Vector start_point(const Problem& p) { return Vector(p.x0); }

/// m + 1 node grid with the x0 profile.
inline GridFunction start_grid(const Problem& p) {
  const Expr e = *p.x0_profile;
  return GridFunction::uniform(p.T_end, p.m, [&](double t) {
    const double s[1] = {t};
    return e(s);
  });
}

/// Effective M and K: declared values, or sampled estimates times 1.1.
struct ResolvedConstants {
  double M = 0.0;
  double K = 0.0;
  std::optional<double> M_star;
  bool estimated = false;
  double M_sampled = 0.0;
  double K_sampled = 0.0;
};

inline ResolvedConstants resolve_constants(const Problem& p, const OperatorSpec& A) {
  ResolvedConstants rc;
  rc.M_star = p.M_star;
  if (p.estimates_constants() && p.kind != ProblemKind::integral) {
    const BallDomain ball(start_point(p), *p.estimate_radius, p.norm);
    const auto m = estimate_lipschitz_M(A, ball, p.estimate_samples, p.plan.seed);
    const auto k = estimate_lipschitz_K(A, ball, p.estimate_samples, p.plan.seed);
    rc.M_sampled = m.value;
    rc.K_sampled = k.value;
    rc.M = m.inflated();
    rc.K = k.inflated();
    rc.estimated = true;
    return rc;
  }
  rc.M = p.M.value_or(std::numeric_limits<double>::infinity());
  rc.K = p.K.value_or(std::numeric_limits<double>::infinity());
  return rc;
}

/// Built-in problems, embedded so runs need no files.
inline const std::vector<std::pair<std::string, json>>& catalog() {
  static const std::vector<std::pair<std::string, json>> entries = [] {
    const char* docs[] = {
        R"~({"name": "linear-contraction", "description": "A(x) = 0.5x + 1 from x0 = 0; fixed point 2",
            "operator": ["0.5*x1 + 1"], "derivative": [["0.5"]], "scheme": "contraction", "x0": [0], "exact": [2],
            "constants": {"M": 0.5, "K": 0}, "stop": {"max_n": 60, "residual_tol": 1e-14},
            "certificates": [{"regime": "bounded"}, {"regime": "geometric", "search": true}]})~",
        R"~({"name": "cos-fixed-point", "description": "x = cos x from x0 = 1 with exact Newton steps",
            "operator": ["cos(x1)"], "derivative": [["-sin(x1)"]], "scheme": "newton", "x0": [1],
            "exact": [0.7390851332151607], "constants": {"M": 0.8674, "M_star": 0.8414709848078965, "K": 1},
            "stop": {"max_n": 20, "residual_tol": 1e-13},
            "certificates": [{"regime": "quadratic", "witnesses": {"chi": 0.5, "mu": 0}}, {"regime": "bounded"}]})~",
        R"~({"name": "sqrt2-root", "description": "P(x) = x^2 - 2 as x = x - P(x)/P'(x) (Heron), x0 = 1.5",
            "kind": "root", "operator": ["x1^2 - 2"], "derivative": [["2*x1"]], "gamma": {"kind": "newton"},
            "scheme": "contraction", "x0": [1.5], "exact": [1.4142135623730951],
            "constants": {"M": 0.06, "K": 0.72}, "stop": {"max_n": 20, "residual_tol": 1e-15},
            "certificates": [{"regime": "bounded"}]})~",
        R"~({"name": "system-2d", "description": "2-D nonlinear system, sup norm, Newton",
            "operator": ["0.5*cos(x2) + 0.1*x1", "0.5*sin(x1) - 0.2*x2 + 0.3"],
            "derivative": [["0.1", "-0.5*sin(x2)"], ["0.5*cos(x1)", "-0.2"]],
            "scheme": "newton", "norm": "sup", "x0": [0, 0], "constants": {"M": 0.7, "K": 0.5},
            "stop": {"max_n": 30, "residual_tol": 1e-13},
            "certificates": [{"regime": "quadratic", "search": true}, {"regime": "bounded"}]})~",
        R"~({"name": "volterra-exp", "description": "x' = x + 1, x(0) = 0 on [0, 2] as x = int_0^t (x + 1) ds",
            "kind": "integral", "operator": ["x1 + 1"], "derivative": [["1"]],
            "kernel": {"kind": "volterra"}, "T_end": 2, "m": 400, "x0": "0", "exact": "exp(t) - 1",
            "constants": {"M": 1, "K": 0}, "stop": {"max_n": 60, "residual_tol": 1e-12}})~",
        R"~({"name": "linear-contraction-perturbed", "description": "linear contraction with constant eps = 1e-2 injected",
            "operator": ["0.5*x1 + 1"], "derivative": [["0.5"]], "scheme": "contraction", "x0": [0],
            "perturbation": {"mode": "additive-deterministic", "eps": {"kind": "constant", "c": 0.01}},
            "constants": {"M": 0.5, "K": 0}, "stop": {"max_n": 80},
            "certificates": [{"regime": "bounded"}]})~",
        R"~({"name": "cos-newton-perturbed", "description": "Newton on x = cos x with decaying eps and sigma",
            "operator": ["cos(x1)"], "derivative": [["-sin(x1)"]], "scheme": "newton", "x0": [1],
            "exact": [0.7390851332151607],
            "perturbation": {"mode": "additive-seeded-random",
                             "eps": {"kind": "geometric", "c": 0.001, "q": 0.5},
                             "sigma": {"kind": "geometric", "c": 0.05, "q": 0.5}},
            "seed": 7, "constants": {"M": 0.8674, "M_star": 0.8414709848078965, "K": 1},
            "stop": {"max_n": 60, "residual_tol": 1e-12},
            "certificates": [{"regime": "bounded"}, {"regime": "geometric", "search": true}]})~",
        R"~({"name": "expanding", "description": "A(x) = 2x from x0 = 1; diverges",
            "operator": ["2*x1"], "derivative": [["2"]], "scheme": "contraction", "x0": [1],
            "constants": {"M": 2, "K": 0}, "stop": {"max_n": 100}})~",
        R"~({"name": "system-2d-modified", "description": "2-D system with modified Newton and a derivative mismatch",
            "operator": ["0.5*cos(x2) + 0.1*x1", "0.5*sin(x1) - 0.2*x2 + 0.3"],
            "derivative": [["0.1", "-0.5*sin(x2)"], ["0.5*cos(x1)", "-0.2"]],
            "scheme": "modified_newton", "norm": "sup", "x0": [0, 0],
            "perturbation": {"mode": "additive-seeded-random", "gamma": {"kind": "constant", "c": 0.01}},
            "seed": 3, "constants": {"M": 0.7, "K": 0.5}, "stop": {"max_n": 60, "residual_tol": 1e-13}})~",
        R"~({"name": "cos-relaxed", "description": "x = cos x with the relaxed step B(x) = A(x_k) - 0.5 (x - x_k)",
            "operator": ["cos(x1)"], "derivative": [["-sin(x1)"]],
            "scheme": {"custom": {"kind": "relaxed", "beta": -0.5}}, "x0": [1], "exact": [0.7390851332151607],
            "constants": {"M": 0.8674, "K": 1}, "stop": {"max_n": 80, "residual_tol": 1e-13}})~",
        R"~({"name": "averaging-kernel", "description": "x = int_0^1 (x + 1) ds with the full kernel G = 1; does not contract",
            "kind": "integral", "operator": ["x1 + 1"], "derivative": [["1"]],
            "kernel": {"kind": "expression", "expr": "1"}, "T_end": 1, "m": 50, "x0": "0",
            "constants": {"M": 1, "K": 0}, "stop": {"max_n": 200, "residual_tol": 1e-12}})~",
    };
    std::vector<std::pair<std::string, json>> out;
    for (const char* d : docs) {
      json j = json::parse(d);
      out.emplace_back(j.at("name").get<std::string>(), std::move(j));
    }
    return out;
  }();
  return entries;
}

inline std::optional<json> catalog_entry(const std::string& name) {
  for (const auto& [n, doc] : catalog())
    if (n == name) return doc;
  return std::nullopt;
}

inline Problem catalog_problem(const std::string& name) {
  const auto doc = catalog_entry(name);
  if (!doc) throw ValidationError(name, "no catalog problem of this name");
  return parse_problem(*doc);
}

}  // namespace nkv

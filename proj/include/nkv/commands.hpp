#pragma once

// run / certify / sweep / catalog, shared by the nkv tool and the tests.
//
// Output files, fields in this order:
//   trace.csv    n,r_n,R_n,r_tilde_n,residual_n,inner_defect_n,injected_n
//                (one row per iterate; r_n and R_n are empty on the last row)
//   iterates.csv n,x1..xd  (integral problems: n,x(t_0)..x(t_m))
//   solution.csv t,x,exact (integral problems only)
//   run.json     see run_summary()
//   certify.json see certify_trace()
//   summary.csv  value,steps,stop_reason,final_residual,error_vs_exact,certificates
// Floats are written with 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nkv/greens.hpp"
#include "nkv/majorant.hpp"
#include "nkv/problem.hpp"
#include "nkv/schemes.hpp"
#include "nkv/theorem.hpp"

namespace nkv {

namespace fs = std::filesystem;

enum ExitCode : int { exit_ok = 0, exit_invalid = 1, exit_diverged = 2, exit_max_steps = 3 };

inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Command-line values that take precedence over the problem file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<double> inner_tol;
};

inline Problem apply_overrides(Problem p, const Overrides& o) {
  // seed and inner_tol change the trace, so they enter the problem hash
  if (o.seed) {
    p.plan.seed = *o.seed;
    p.source["seed"] = *o.seed;
  }
  if (o.horizon) p.horizon = *o.horizon;
  if (o.inner_tol) {
    p.inner_tol = *o.inner_tol;
    p.source["inner_tol"] = *o.inner_tol;
  }
  return p;
}

/// A problem argument is a file path if one exists, else a catalog name.
inline Problem resolve_problem(const std::string& arg) {
  if (fs::exists(arg)) return load_problem_file(arg);
  if (catalog_entry(arg)) return catalog_problem(arg);
  throw ValidationError(arg, "no such file or catalog problem");
}

struct RunResult {
  Problem problem;
  IterationTrace trace;
  std::optional<GridFunction> grid;
  ProblemConstants constants;
  ResolvedConstants resolved;
  std::optional<std::string> failure;  // step failure message
  std::size_t failed_step = 0;
  AuditReport audit;
  std::optional<BoundPropagation> worst_propagation;  // integral problems
  std::size_t propagation_failures = 0;
  std::optional<double> error_vs_exact;

  int exit_code() const {
    if (failure) return exit_diverged;
    if (trace.converged()) return exit_ok;
    if (trace.stop == StopReason::max_steps) return exit_max_steps;
    return exit_diverged;
  }
};

inline ProblemConstants grid_constants(double M, double K) {
  ProblemConstants c;
  c.M = M;
  c.K = K;
  return c;
}

/// Runs a validated problem. Step failures are recorded, not thrown.
inline RunResult execute(const Problem& p) {
  RunResult res{p, {}, std::nullopt, {}, {}, std::nullopt, 0, {}, std::nullopt, 0, std::nullopt};
  RunOptions opts;
  opts.inner_tol = p.inner_tol;
  try {
    if (p.kind == ProblemKind::integral) {
      const OperatorSpec A = component_operator(p);
      res.resolved = resolve_constants(p, A);
      res.constants = grid_constants(res.resolved.M, res.resolved.K);
      const GridFunction g0 = start_grid(p);
      res.grid = g0;
      res.trace = run_integral_iteration(*p.kernel, A, SchemeKind::contraction, g0, p.stop, opts);
      const double noise = grid_noise_floor(res.trace);
      for (std::size_t n = 1; n < res.trace.steps(); ++n) {
        const auto bp = bound_propagate(*p.kernel, res.constants, step_profile(res.trace, g0, n - 1),
                                        step_profile(res.trace, g0, n), SchemeKind::contraction, n, noise);
        if (!bp.pass) ++res.propagation_failures;
        if (!res.worst_propagation || bp.min_margin + bp.slack < res.worst_propagation->min_margin + res.worst_propagation->slack)
          res.worst_propagation = bp;
      }
      if (p.exact_profile) {
        double err = 0.0;
        const auto& x = res.trace.last();
        for (std::size_t i = 0; i < g0.size(); ++i) {
          const double t[1] = {g0.t(i)};
          err = std::max(err, std::abs(x[i] - (*p.exact_profile)(t)));
        }
        res.error_vs_exact = err;
      }
      return res;
    }
    const OperatorSpec A = build_operator(p);
    res.resolved = resolve_constants(p, A);
    const Scheme scheme = build_scheme(p, A);
    const Vector x0 = start_point(p);
    res.constants = constants_for_run(scheme, A, x0, p.plan, res.resolved.M, res.resolved.K, res.resolved.M_star, p.norm);
    res.trace = run_outer(A, scheme, x0, p.plan, p.stop, opts, p.norm);
    res.audit = audit_theorem(res.trace, res.constants, p.scheme, p.inner_tol);
    if (p.exact_point) res.error_vs_exact = distance(res.trace.last(), Vector(*p.exact_point), p.norm);
  } catch (const StepError& e) {
    res.failure = e.what();
    res.failed_step = e.step();
  }
  return res;
}

inline std::string trace_csv(const IterationTrace& t) {
  std::ostringstream os;
  os << "n,r_n,R_n,r_tilde_n,residual_n,inner_defect_n,injected_n\n";
  for (std::size_t n = 0; n < t.iterates.size(); ++n) {
    os << n << ',';
    if (n < t.r.size()) os << fmt17(t.r[n]) << ',' << fmt17(t.R_partial[n]) << ',';
    else os << ",,";
    os << fmt17(t.r_tilde[n]) << ',' << fmt17(t.residual[n]) << ',' << fmt17(t.inner_defect[n]) << ','
       << fmt17(t.injected[n]) << '\n';
  }
  return os.str();
}

inline std::string iterates_csv(const IterationTrace& t, const std::optional<GridFunction>& grid) {
  std::ostringstream os;
  os << 'n';
  const std::size_t d = t.iterates.empty() ? 0 : t.iterates.front().dim();
  for (std::size_t i = 0; i < d; ++i) {
    if (grid) os << ",x(" << fmt17(grid->t(i)) << ')';
    else os << ",x" << i + 1;
  }
  os << '\n';
  for (std::size_t n = 0; n < t.iterates.size(); ++n) {
    os << n;
    for (std::size_t i = 0; i < d; ++i) os << ',' << fmt17(t.iterates[n][i]);
    os << '\n';
  }
  return os.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path.string(), "cannot write file");
  out << content;
}

inline json precheck_json(const PrecheckReport& rep) {
  json items = json::array();
  for (const auto& i : rep.items) items.push_back({{"name", i.name}, {"verdict", i.verdict}, {"detail", i.detail}});
  return items;
}

inline json run_summary(const RunResult& r) {
  const auto& t = r.trace;
  json j;
  j["name"] = r.problem.name;
  j["problem_hash"] = problem_hash(r.problem);
  j["kind"] = std::string(to_string(r.problem.kind));
  j["scheme"] = std::string(to_string(r.problem.scheme));
  j["norm"] = std::string(to_string(r.problem.norm));
  j["seed"] = r.problem.plan.seed;
  j["inner_tol"] = r.problem.inner_tol;
  j["horizon"] = r.problem.horizon;
  j["exit_code"] = r.exit_code();
  if (r.failure) {
    j["stop_reason"] = "step_failure";
    j["stop_detail"] = *r.failure;
    j["failed_step"] = r.failed_step;
  } else {
    j["stop_reason"] = std::string(to_string(t.stop));
    j["stop_detail"] = t.stop_detail;
  }
  j["steps"] = t.steps();
  j["final_residual"] = t.residual.empty() ? json(nullptr) : json_number(t.residual.back());
  j["converged"] = !r.failure && t.converged();
  if (!t.iterates.empty() && !r.grid) j["final_iterate"] = t.last().to_std();
  j["error_vs_exact"] = r.error_vs_exact ? json_number(*r.error_vs_exact) : json(nullptr);
  j["constants"] = {{"M", json_number(r.constants.M)},
                    {"K", json_number(r.constants.K)},
                    {"M_star", json_number(r.constants.M_star)},
                    {"K_star", json_number(r.constants.K_star)},
                    {"eps", json_number(r.constants.eps)},
                    {"source", r.resolved.estimated ? "estimated (empirical lower bound x 1.1)" : "declared"}};
  if (r.resolved.estimated) {
    j["constants"]["M_sampled"] = r.resolved.M_sampled;
    j["constants"]["K_sampled"] = r.resolved.K_sampled;
  }
  std::optional<double> first;
  if (!t.r.empty()) first = t.r[0];
  j["precheck"] = precheck_json(precheck(r.constants, first));
  if (r.grid) {
    json bp;
    bp["failures"] = r.propagation_failures;
    if (r.worst_propagation) {
      bp["worst_min_margin"] = json_number(r.worst_propagation->min_margin);
      bp["worst_slack"] = json_number(r.worst_propagation->slack);
      bp["slack_constant"] = json_number(r.worst_propagation->slack_constant);
    }
    j["bound_propagation"] = bp;
  } else if (!r.failure) {
    j["audit"] = {{"checked", r.audit.entries.size()}, {"violations", r.audit.violations}, {"flagged", r.audit.flagged}};
  }
  return j;
}

/// Writes trace.csv, iterates.csv, run.json (and solution.csv for grids).
inline void write_run(const RunResult& r, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_file(out_dir / "trace.csv", trace_csv(r.trace));
  write_file(out_dir / "iterates.csv", iterates_csv(r.trace, r.grid));
  write_file(out_dir / "run.json", run_summary(r).dump(2) + "\n");
  if (r.grid) {
    std::ostringstream os;
    os << "t,x,exact\n";
    const auto& x = r.trace.last();
    for (std::size_t i = 0; i < r.grid->size(); ++i) {
      const double t[1] = {r.grid->t(i)};
      os << fmt17(t[0]) << ',' << fmt17(x[i]) << ',';
      if (r.problem.exact_profile) os << fmt17((*r.problem.exact_profile)(t));
      os << '\n';
    }
    write_file(out_dir / "solution.csv", os.str());
  }
}

inline int cmd_run(const Problem& p, const fs::path& out_dir, std::ostream& log = std::cerr) {
  const RunResult r = execute(p);
  write_run(r, out_dir);
  if (r.failure) log << "step " << r.failed_step << " failed: " << *r.failure << '\n';
  else log << p.name << ": " << to_string(r.trace.stop) << " after " << r.trace.steps() << " steps, residual "
           << fmt17(r.trace.residual.back()) << '\n';
  return r.exit_code();
}

/// r_n column of a trace.csv.
inline std::vector<double> read_trace_r(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), "cannot read trace");
  std::string line;
  std::getline(in, line);
  if (line.rfind("n,r_n,", 0) != 0) throw ValidationError(path.string(), "not a trace.csv");
  std::vector<double> r;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw ValidationError(path.string() + ":" + std::to_string(lineno), "malformed row");
    const std::string cell = line.substr(a + 1, b - a - 1);
    if (cell.empty()) break;
    r.push_back(std::strtod(cell.c_str(), nullptr));
  }
  return r;
}

namespace detail {

inline double witness_or(const CertificateRequest& q, const char* name) {
  const auto it = q.witnesses.find(name);
  if (it == q.witnesses.end()) throw ValidationError(std::string("witness ") + name, "missing");
  return it->second;
}

}  // namespace detail

inline Certificate evaluate_request(const CertificateRequest& q, const MajorantParams& params, std::size_t N) {
  switch (q.regime) {
    case Regime::bounded: return cert_bounded(params, N);
    case Regime::uniform_max: return cert_remark1(params, N);
    case Regime::sandwich:
      if (q.search) return search_sandwich(params, N);
      return cert_sandwich(params, N, detail::witness_or(q, "C1"), detail::witness_or(q, "C2"));
    case Regime::geometric:
      if (q.search) return search_geometric(params, N);
      return cert_geometric(params, N, detail::witness_or(q, "chi"), detail::witness_or(q, "mu"),
                            detail::witness_or(q, "lambda_tilde0"), detail::witness_or(q, "C_mu"));
    case Regime::quadratic:
      if (q.search) return search_quadratic(params, N);
      return cert_quadratic(params, N, detail::witness_or(q, "chi"), detail::witness_or(q, "mu"));
  }
  return cert_bounded(params, N);
}

/// Majorant of a problem's runs, anchored at the measured r_0.
inline MajorantParams majorant_for(const Problem& p, double r0) {
  if (p.kind == ProblemKind::integral) {
    const OperatorSpec A = component_operator(p);
    const auto rc = resolve_constants(p, A);
    return theorem_to_recurrence(grid_constants(rc.M, rc.K), SchemeKind::contraction, r0, p.horizon);
  }
  const OperatorSpec A = build_operator(p);
  const auto rc = resolve_constants(p, A);
  const Scheme scheme = build_scheme(p, A);
  const ProblemConstants c = constants_for_run(scheme, A, start_point(p), p.plan, rc.M, rc.K, rc.M_star, p.norm);
  return theorem_to_recurrence(c, p.scheme, r0, p.horizon);
}

struct CertifyResult {
  json report;
  bool all_valid = true;
  std::size_t margin_violations = 0;
};

/// Certificates requested by the problem, checked against the measured r_n
/// (upper bounds) and against the simulated majorant (both bounds).
inline CertifyResult certify_trace(const Problem& p, const std::vector<double>& r) {
  CertifyResult out;
  json& rep = out.report;
  rep["name"] = p.name;
  rep["problem_hash"] = problem_hash(p);
  rep["horizon"] = p.horizon;
  rep["certificates"] = json::array();
  if (r.empty()) {
    rep["error"] = "trace has no steps";
    out.all_valid = false;
    return out;
  }
  MajorantParams params;
  try {
    params = majorant_for(p, r[0]);
  } catch (const PreconditionError& e) {
    rep["error"] = std::string("no majorant: ") + e.what();
    out.all_valid = !p.certificates.empty() ? false : true;
    return out;
  }
  rep["majorant"] = {{"eta", json_number(params.eta)},
                     {"lambda", params.lambda.describe()},
                     {"rho", params.rho.describe()},
                     {"r0", params.r0}};
  const Simulation sim = simulate_recurrence(params, p.horizon);
  for (const auto& q : p.certificates) {
    const Certificate c = evaluate_request(q, params, p.horizon);
    json cj;
    cj["regime"] = std::string(to_string(c.regime));
    cj["valid"] = c.valid;
    cj["reason"] = c.reason;
    cj["notes"] = c.notes;
    cj["checked_horizon"] = c.checked_horizon;
    json w = json::object();
    for (const auto& [k, v] : c.witnesses) w[k] = json_number(v);
    cj["witnesses"] = w;
    if (c.valid) {
      double min_margin = std::numeric_limits<double>::infinity();
      std::size_t violations = 0;
      const std::size_t n_max = std::min(r.size(), c.upper.size());
      for (std::size_t n = 0; n < n_max; ++n) {
        if (std::isinf(c.upper[n])) continue;
        min_margin = std::min(min_margin, c.upper[n] - r[n]);
        if (!leq_slack(r[n], c.upper[n])) ++violations;
      }
      const BoundCheck sc = check_bounds(c, sim.r, true);
      cj["min_upper_margin"] = json_number(min_margin);
      cj["margin_violations"] = violations;
      cj["simulation_violations"] = sc.violations;
      out.margin_violations += violations + sc.violations;
    } else {
      out.all_valid = false;
    }
    rep["certificates"].push_back(cj);
  }
  json tails = json::array({nullptr});  // indexed by n; x0 has no tail bound
  for (std::size_t n = 1; n < r.size(); ++n) {
    try {
      tails.push_back(json_number(tail_bound(r, params, n)));
    } catch (const NoValidMajorantError&) {
      tails.push_back(nullptr);
    }
  }
  rep["tail_bound"] = tails;
  rep["all_valid"] = out.all_valid;
  rep["margin_violations"] = out.margin_violations;
  return out;
}

/// Exit 0 iff every requested certificate is valid without violations;
/// 1 when the trace belongs to a different problem; 2 otherwise.
inline int cmd_certify(const Problem& p, const fs::path& trace_path, const fs::path& out_dir,
                       std::ostream& log = std::cerr) {
  const fs::path run_json = trace_path.parent_path() / "run.json";
  if (fs::exists(run_json)) {
    std::ifstream in(run_json);
    const json run = json::parse(in, nullptr, false);
    if (run.is_discarded() || run.value("problem_hash", "") != problem_hash(p)) {
      log << "trace was produced by a different problem (hash mismatch)\n";
      return exit_invalid;
    }
  } else {
    log << "no run.json next to the trace; cannot confirm it belongs to this problem\n";
    return exit_invalid;
  }
  const CertifyResult c = certify_trace(p, read_trace_r(trace_path));
  fs::create_directories(out_dir);
  write_file(out_dir / "certify.json", c.report.dump(2) + "\n");
  for (const auto& cj : c.report["certificates"])
    log << cj["regime"].get<std::string>() << ": " << (cj["valid"].get<bool>() ? "valid" : "invalid")
        << (cj["reason"].get<std::string>().empty() ? "" : " (" + cj["reason"].get<std::string>() + ")") << '\n';
  return (c.all_valid && c.margin_violations == 0) ? exit_ok : exit_diverged;
}

inline const std::vector<std::string>& sweep_params() {
  static const std::vector<std::string> names{"eps", "sigma", "gamma", "m", "alpha"};
  return names;
}

/// Source document with one scalar replaced.
inline json sweep_variant(const json& doc, const std::string& param, double value) {
  json d = doc;
  if (param == "eps" || param == "sigma" || param == "gamma") {
    json& pt = d["perturbation"];
    if (!pt.is_object()) pt = json::object();
    json& s = pt[param];
    if (s.is_object() && s.value("kind", "constant") != "table") s["c"] = value;
    else s = {{"kind", "constant"}, {"c", value}};
    if (pt.value("mode", "none") == "none") pt["mode"] = "additive-deterministic";
  } else if (param == "m") {
    if (value < 2 || value != std::floor(value)) throw ValidationError("m", "grid sizes must be integers >= 2");
    d["m"] = static_cast<long long>(value);
  } else if (param == "alpha") {
    d["gamma"] = {{"kind", "damped"}, {"alpha", value}};
  } else {
    throw ValidationError(param, "not a sweepable parameter (eps, sigma, gamma, m, alpha)");
  }
  return d;
}

struct SweepRow {
  double value = 0.0;
  std::size_t steps = 0;
  std::string stop;
  double final_residual = 0.0;
  std::optional<double> error;
  std::string certificates;
};

/// Every variant is validated before any run starts; runs then proceed
/// concurrently, each in its own directory, and rows keep the given order.
inline int cmd_sweep(const Problem& p, const std::string& param, const std::vector<double>& values,
                     const fs::path& out_dir, const Overrides& o = {}, std::vector<SweepRow>* rows_out = nullptr,
                     std::ostream& log = std::cerr) {
  if (values.empty()) {
    log << "sweep needs at least one value\n";
    return exit_invalid;
  }
  std::vector<Problem> variants;
  try {
    for (double v : values) variants.push_back(apply_overrides(parse_problem(sweep_variant(p.source, param, v)), o));
  } catch (const ValidationError& e) {
    log << "sweep aborted: " << e.what() << '\n';
    return exit_invalid;
  }
  std::vector<std::future<SweepRow>> jobs;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      const Problem& v = variants[i];
      const RunResult r = execute(v);
      write_run(r, out_dir / (param + "_" + std::to_string(i)));
      SweepRow row;
      row.value = values[i];
      row.steps = r.trace.steps();
      row.stop = r.failure ? "step_failure" : std::string(to_string(r.trace.stop));
      row.final_residual = r.trace.residual.empty() ? std::nan("") : r.trace.residual.back();
      row.error = r.error_vs_exact;
      if (v.certificates.empty() || r.trace.r.empty()) {
        row.certificates = "none";
      } else {
        const CertifyResult c = certify_trace(v, r.trace.r);
        row.certificates = (c.all_valid && c.margin_violations == 0) ? "valid" : "invalid";
      }
      return row;
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  std::ostringstream os;
  os << "value,steps,stop_reason,final_residual,error_vs_exact,certificates\n";
  for (const auto& r : rows)
    os << fmt17(r.value) << ',' << r.steps << ',' << r.stop << ',' << fmt17(r.final_residual) << ','
       << (r.error ? fmt17(*r.error) : "") << ',' << r.certificates << '\n';
  fs::create_directories(out_dir);
  write_file(out_dir / "summary.csv", os.str());
  if (rows_out) *rows_out = rows;
  return exit_ok;
}

inline void cmd_catalog(std::ostream& out) {
  for (const auto& [name, doc] : catalog()) out << name << "  " << doc.value("description", "") << '\n';
}

}  // namespace nkv

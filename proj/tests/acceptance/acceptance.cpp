// Acceptance criteria 1-10. One PASS/FAIL line per criterion; the exit
// status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fuzz.hpp"
#include "nkv/nkv.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace nkv;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("%s %d %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Problem with_scheme(Problem p, SchemeKind kind) {
  p.scheme = kind;
  if (kind == SchemeKind::custom) p.relax_beta = -0.5;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nkv_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::vector<std::string> exact_problems{"linear-contraction", "cos-fixed-point", "system-2d", "sqrt2-root"};

Verdict theorem_audit() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t runs = 0, checked = 0, violations = 0, flagged = 0;
  std::string where;
  for (const auto& name : exact_problems) {
    for (SchemeKind kind : {SchemeKind::contraction, SchemeKind::modified_newton, SchemeKind::newton, SchemeKind::custom}) {
      Problem p = with_scheme(catalog_problem(name), kind);
      p.stop.max_n = 50;
      p.stop.residual_tol = 0.0;
      const RunResult r = execute(p);
      if (r.failure) return {false, name + "/" + std::string(to_string(kind)) + ": " + *r.failure};
      ++runs;
      checked += r.audit.entries.size();
      violations += r.audit.violations;
      flagged += r.audit.flagged;
      if (r.audit.violations > 0 && where.empty()) where = " first at " + name + "/" + std::string(to_string(kind));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {violations == 0 && secs < 5.0, std::to_string(runs) + " runs, " + std::to_string(checked) +
                                             " inequalities, " + std::to_string(violations) + " violations, " +
                                             std::to_string(flagged) + " flagged" + where};
}

Verdict domination() {
  std::size_t checked = 0, violations = 0;
  std::string where;
  std::size_t runs = 0;
  std::string outside;
  for (const auto& [name, doc] : catalog()) {
    if (doc.contains("perturbation")) continue;
    for (SchemeKind kind : {SchemeKind::contraction, SchemeKind::newton}) {
      Problem p = with_scheme(catalog_problem(name), kind);
      if (p.kind == ProblemKind::integral && kind != SchemeKind::contraction) continue;
      ++runs;
      p.stop.max_n = 50;
      const RunResult r = execute(p);
      if (r.failure) return {false, name + ": " + *r.failure};
      const auto& t = r.trace;
      MajorantParams params;
      try {
        params = majorant_for(p, t.r[0]);
      } catch (const PreconditionError&) {
        // no majorant exists when the constants violate the theorem's hypotheses
        outside += (outside.empty() ? "" : ", ") + name + "/" + std::string(to_string(kind));
        continue;
      }
      const auto sim = simulate_recurrence(params, 50);
      const double slack = 10.0 * p.inner_tol + 1e-12;
      for (std::size_t n = 0; n < t.steps() && n <= 50; ++n) {
        const double bound = n < sim.r.size() ? sim.r[n] : INFINITY;
        ++checked;
        if (!(t.r[n] <= bound * (1 + 1e-12) + slack)) {
          ++violations;
          if (where.empty()) where = " first at " + name + "/" + std::string(to_string(kind)) + " n=" + std::to_string(n);
        }
      }
    }
  }
  return {violations == 0, std::to_string(runs) + " runs, " + std::to_string(checked) + " steps, " + std::to_string(violations) + " violations" + where +
                              (outside.empty() ? "" : "; no majorant (hypotheses fail): " + outside)};
}

Verdict certificate_fuzz() {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  for (Regime regime : {Regime::bounded, Regime::sandwich, Regime::geometric, Regime::quadratic, Regime::uniform_max}) {
    const auto out = fuzz::run(regime, 1000, 2024 + static_cast<int>(regime), 200);
    ok = ok && out.valid == 1000 && out.violations == 0;
    detail += std::string(to_string(regime)) + " " + std::to_string(out.valid) + "/" + std::to_string(out.attempts) +
              " valid, " + std::to_string(out.violations) + " violations; ";
    if (!out.first_failure.empty()) detail += "(" + out.first_failure + ") ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {ok && secs < 30.0, detail + "horizon 200"};
}

Verdict quadratic_tightness() {
  const MajorantParams p{1.0, Sequence(), Sequence(), 0.5};
  const auto c = cert_quadratic(p, 6, 0.5, 0.0);
  const auto r = simulate_recurrence(p, 6).r;
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    const double exact = std::pow(0.5, std::pow(2.0, static_cast<double>(n - 1)));
    for (double v : {r[n - 1], c.lower[n - 1], c.upper[n - 1]}) worst = std::max(worst, std::abs(v - exact) / exact);
  }
  return {c.valid && worst <= 1e-12, "max relative deviation " + fmt(worst) + " for n <= 6"};
}

Verdict newton_order() {
  const RunResult r = execute(catalog_problem("cos-fixed-point"));
  const auto& t = r.trace;
  if (r.failure) return {false, *r.failure};
  std::size_t reached = 0;
  while (reached < t.residual.size() && t.residual[reached] > 1e-12) ++reached;
  std::vector<double> res;  // resolvable steps: r_n above the rounding level of x
  for (double v : t.r)
    if (v > 64 * 2.22e-16) res.push_back(v);
  if (res.size() < 4) return {false, "fewer than four resolvable steps"};
  // order from three consecutive steps: log(r_{n+1}/r_n) / log(r_n/r_{n-1})
  std::string orders, ratios;
  bool in_range = true;
  for (std::size_t n = res.size() - 2; n + 1 < res.size() && n >= res.size() - 3; --n) {
    const double q = std::log(res[n + 1] / res[n]) / std::log(res[n] / res[n - 1]);
    in_range = in_range && q >= 1.8 && q <= 2.2;
    orders = fmt(q) + (orders.empty() ? "" : ", ") + orders;
    if (n == 1) break;
  }
  for (std::size_t n = res.size() - 3; n + 1 < res.size(); ++n)
    ratios += (ratios.empty() ? "" : ", ") + fmt(std::log(res[n + 1]) / std::log(res[n]));
  const bool fast = reached < t.residual.size() && reached <= 6;
  return {fast && in_range, "residual <= 1e-12 after " + std::to_string(reached) + " steps; order estimates " +
                                orders + " (log r_{n+1}/log r_n: " + ratios + ")"};
}

Verdict contraction_exactness() {
  const Problem p = catalog_problem("linear-contraction");
  const RunResult r = execute(p);
  const auto& t = r.trace;
  if (t.steps() < 31) return {false, "run stopped after " + std::to_string(t.steps()) + " steps"};
  double worst_r = 0.0, worst_tail = 0.0;
  const auto params = majorant_for(p, t.r[0]);
  for (std::size_t n = 0; n <= 30; ++n) {
    const double expect = std::ldexp(1.0, -static_cast<int>(n));
    worst_r = std::max(worst_r, std::abs(t.r[n] - expect) / expect);
    if (n >= 1) {
      const double err = std::abs(t.iterates[n][0] - 2.0);
      worst_tail = std::max(worst_tail, std::abs(tail_bound(t.r, params, n) - err) / err);
    }
  }
  return {worst_r <= 1e-15 && worst_tail <= 1e-12,
          "r_n vs 2^-n rel " + fmt(worst_r) + ", tail bound vs |x_n - 2| rel " + fmt(worst_tail)};
}

Verdict stagnation() {
  const Problem p = catalog_problem("linear-contraction-perturbed");
  const RunResult r = execute(p);
  const double level = r.trace.residual.back();
  const double target = 0.01 / (1 - 0.5);
  const bool within = level <= 3 * target && level >= target / 3;
  std::vector<SweepRow> rows;
  const std::vector<double> eps{1e-5, 1e-4, 1e-3, 1e-2};
  std::ostringstream log;
  const int code = cmd_sweep(p, "eps", eps, scratch("sweep"), {}, &rows, log);
  if (code != 0 || rows.size() != eps.size()) return {false, "sweep failed: " + log.str()};
  // least-squares slope of log residual against log eps
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& row : rows) {
    const double x = std::log10(row.value), y = std::log10(row.final_residual);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(rows.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {within && std::abs(slope - 1.0) <= 0.1,
          "residual " + fmt(level) + " vs eps/(1-q) = " + fmt(target) + "; log-log slope " + fmt(slope) +
              " over eps 1e-5..1e-2"};
}

Verdict volterra() {
  Problem p = catalog_problem("volterra-exp");
  const RunResult r = execute(p);
  if (r.failure) return {false, *r.failure};
  const double err = *r.error_vs_exact;
  const bool conv = r.trace.converged() && r.trace.steps() <= 60;
  const double margin = r.worst_propagation ? r.worst_propagation->min_margin : 0.0;
  const double slack = r.worst_propagation ? r.worst_propagation->slack : 0.0;
  Problem coarse = parse_problem(sweep_variant(p.source, "m", 200));
  const RunResult rc = execute(coarse);
  const double ratio = *rc.error_vs_exact / err;
  const bool ok = conv && err <= 5e-4 && r.propagation_failures == 0 && ratio >= 3.5 && ratio <= 4.5;
  return {ok, std::to_string(r.trace.steps()) + " iterations, sup error " + fmt(err) + " at m = 400, " +
                  std::to_string(r.propagation_failures) + " propagation failures (worst margin " + fmt(margin) +
                  ", slack " + fmt(slack) + "), error ratio m=200/m=400 " + fmt(ratio)};
}

Verdict heron() {
  const RunResult r = execute(catalog_problem("sqrt2-root"));
  if (r.failure) return {false, *r.failure};
  const auto& t = r.trace;
  const auto ref = oracle::heron(1.5, t.steps());
  double worst = 0.0;
  for (std::size_t n = 0; n <= t.steps(); ++n) worst = std::max(worst, std::abs(t.iterates[n][0] - ref[n]));
  std::size_t reached = 0;
  while (reached <= t.steps() && std::abs(t.iterates[reached][0] - std::sqrt(2.0)) > 1e-10) ++reached;
  return {worst <= 1e-13 && reached <= 4,
          "max deviation from Heron " + fmt(worst) + ", within 1e-10 of sqrt 2 after " + std::to_string(reached) + " steps"};
}

Verdict determinism() {
  const fs::path dir = scratch("determinism");
  const fs::path file = dir / "problem.json";
  std::ofstream(file) << catalog_entry("cos-newton-perturbed")->dump(2);
  Overrides o;
  o.seed = 1234;
  std::ostringstream log;
  for (const char* sub : {"a", "b"}) cmd_run(apply_overrides(resolve_problem(file.string()), o), dir / sub, log);
  const std::string a = slurp(dir / "a" / "trace.csv"), b = slurp(dir / "b" / "trace.csv");
  return {!a.empty() && a == b, std::to_string(a.size()) + " bytes of trace.csv, identical: " + (a == b ? "yes" : "no")};
}

}  // namespace

int main() {
  report(1, "theorem inequality audit", theorem_audit);
  report(2, "majorant domination", domination);
  report(3, "certificate soundness fuzz", certificate_fuzz);
  report(4, "quadratic tightness", quadratic_tightness);
  report(5, "Newton quadratic convergence", newton_order);
  report(6, "contraction exactness", contraction_exactness);
  report(7, "perturbation stagnation", stagnation);
  report(8, "Volterra convergence", volterra);
  report(9, "root wrapper equals Heron", heron);
  report(10, "determinism", determinism);
  return failures == 0 ? 0 : 1;
}

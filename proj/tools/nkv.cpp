// nkv: run, certify and sweep fixed-point problems; list the built-in catalog.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nkv/nkv.hpp"

namespace {

nkv::Overrides overrides_from(const CLI::App& app, std::uint64_t seed, std::size_t horizon, double inner_tol) {
  nkv::Overrides o;
  if (app.get_option("--seed")->count() > 0) o.seed = seed;
  if (app.get_option("--horizon")->count() > 0) o.horizon = horizon;
  if (app.get_option("--inner-tol")->count() > 0) o.inner_tol = inner_tol;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact Newton-Kantorovich iteration with majorant certificates"};
  app.require_subcommand(1);

  std::string problem_arg;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t horizon = nkv::default_horizon;
  double inner_tol = nkv::default_inner_tol;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("problem", problem_arg, "problem file or catalog name")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for random perturbations");
    sub->add_option("--horizon", horizon, "certificate horizon N")->check(CLI::PositiveNumber);
    sub->add_option("--inner-tol", inner_tol, "inner solve tolerance")->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "iterate a problem and write trace.csv, iterates.csv, run.json");
  add_common(run);

  auto* certify = app.add_subcommand("certify", "check majorant certificates against a trace");
  add_common(certify);
  std::string trace_path;
  certify->add_option("--trace", trace_path, "trace.csv written by run")->required();

  auto* sweep = app.add_subcommand("sweep", "run a problem over values of one parameter");
  add_common(sweep);
  std::string param;
  std::vector<double> values;
  sweep->add_option("--param", param, "eps, sigma, gamma, m or alpha")->required();
  sweep->add_option("--values", values, "comma-separated values")->delimiter(',');

  app.add_subcommand("catalog", "list built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : nkv::exit_invalid;
  }

  try {
    if (app.got_subcommand("catalog")) {
      nkv::cmd_catalog(std::cout);
      return nkv::exit_ok;
    }
    CLI::App* sub = app.get_subcommands().front();
    const nkv::Problem p =
        nkv::apply_overrides(nkv::resolve_problem(problem_arg), overrides_from(*sub, seed, horizon, inner_tol));
    if (sub == run) return nkv::cmd_run(p, out_dir);
    if (sub == certify) return nkv::cmd_certify(p, trace_path, out_dir);
    if (sub == sweep) return nkv::cmd_sweep(p, param, values, out_dir, overrides_from(*sub, seed, horizon, inner_tol));
  } catch (const nkv::ValidationError& e) {
    std::cerr << "invalid problem: " << e.what() << '\n';
    return nkv::exit_invalid;
  } catch (const nkv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nkv::exit_invalid;
  }
  return nkv::exit_invalid;
}

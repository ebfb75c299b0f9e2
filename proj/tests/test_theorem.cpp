#include <cmath>

#include <gtest/gtest.h>

#include "nkv/theorem.hpp"

using namespace nkv;

namespace {

OperatorSpec cos_op() {
  return OperatorSpec(
      1, [](const Vector& x) { return Vector{std::cos(x[0])}; },
      [](const Vector& x, const Vector& h) { return Vector{-std::sin(x[0]) * h[0]}; });
}

OperatorSpec half_plus_one() { return OperatorSpec::affine(Matrix::Constant(1, 1, 0.5), Eigen::VectorXd::Ones(1)); }

IterationTrace run(const OperatorSpec& A, const Scheme& s, const Vector& x0, const PerturbationPlan& plan,
                   std::size_t max_n = 50) {
  StopRule stop;
  stop.max_n = max_n;
  stop.residual_tol = 1e-15;
  return run_outer(A, s, x0, plan, stop);
}

}  // namespace

TEST(TheoremToRecurrence, Contraction) {
  ProblemConstants c;
  c.M = 0.5;
  auto p = theorem_to_recurrence(c, SchemeKind::contraction, 1.0);
  EXPECT_EQ(p.eta, 0.0);
  EXPECT_EQ(p.lambda.at(5), 0.5);
  EXPECT_EQ(p.rho.at(5), 0.0);

  c.M_star = 0.2;
  c.eps_seq = Sequence::constant(0.01);
  p = theorem_to_recurrence(c, SchemeKind::contraction, 1.0);
  EXPECT_NEAR(p.lambda.at(0), 0.875, 1e-15);
  EXPECT_NEAR(p.rho.at(0), 0.025, 1e-15);
  EXPECT_NEAR(p.rho.at(99), 0.025, 1e-15);
}

TEST(TheoremToRecurrence, NewtonCos) {
  ProblemConstants c;
  c.M = std::sin(1.0);
  c.M_star = std::sin(1.0);
  c.K = 1.0;
  c.K_star = 1.0;
  const auto p = theorem_to_recurrence(c, SchemeKind::newton, 0.25);
  EXPECT_NEAR(p.eta, 1.0 / (1.0 - std::sin(1.0)), 1e-12);
  EXPECT_NEAR(p.eta, 6.30799, 1e-5);
  EXPECT_EQ(p.lambda.at(3), 0.0);
  EXPECT_EQ(p.rho.at(3), 0.0);
}

TEST(TheoremToRecurrence, RhoPairsNeighbouringTolerances) {
  ProblemConstants c;
  c.M = 0.3;
  c.eps_seq = Sequence::geometric(0.1, 0.5);
  auto p = theorem_to_recurrence(c, SchemeKind::contraction, 0.0);
  for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(p.rho.at(k), c.eps_seq.at(k) + c.eps_seq.at(k + 1), 1e-15);
  c.eps_seq = Sequence::table({0.3, 0.1, 0.2});
  p = theorem_to_recurrence(c, SchemeKind::contraction, 0.0);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(p.rho.at(k), c.eps_seq.at(k) + c.eps_seq.at(k + 1), 1e-15);
  c.eps_seq = Sequence::power(0.1, 2.0);
  p = theorem_to_recurrence(c, SchemeKind::contraction, 0.0);
  for (std::size_t k = 0; k < 20; ++k) EXPECT_GE(p.rho.at(k), c.eps_seq.at(k) + c.eps_seq.at(k + 1));
}

TEST(TheoremToRecurrence, Preconditions) {
  ProblemConstants c;
  c.M = 0.5;
  c.M_star = 1.0;
  EXPECT_THROW(theorem_to_recurrence(c, SchemeKind::contraction, 1.0), PreconditionError);
  ProblemConstants m;
  m.M = 0.5;
  m.M_star = 0.5;
  m.K = 10.0;
  m.eps = 10.0;  // r~ bound fails: 4 eta rho >= (1 - lambda)^2
  EXPECT_THROW(theorem_to_recurrence(m, SchemeKind::modified_newton, 0.1), PreconditionError);
}

TEST(TheoremToRecurrence, ModifiedNewtonUsesDistanceBound) {
  ProblemConstants c;
  c.M = 0.5;
  c.M_star = 0.5;
  c.K = 0.2;
  c.eps = 0.1;
  c.gamma_seq = Sequence::constant(0.01);
  const auto p = theorem_to_recurrence(c, SchemeKind::modified_newton, 0.1);
  MajorantParams tilde{0.2, Sequence::constant(0.02), Sequence::constant(0.2), 0.0};
  const double C = *cert_bounded(tilde).witness("C");
  EXPECT_NEAR(p.eta, 0.2, 1e-15);
  EXPECT_NEAR(p.lambda.at(0), 0.02 + 0.2 * C * 2.0, 1e-14);
}

TEST(Precheck, Examples) {
  ProblemConstants c;
  c.M = 0.5;
  c.M_star = 0.2;
  auto rep = precheck(c);
  EXPECT_TRUE(rep.find("q_below_1")->passed());
  EXPECT_NEAR(c.q(), 0.875, 1e-15);
  c.M = 0.9;
  rep = precheck(c);
  EXPECT_FALSE(rep.find("q_below_1")->passed());
  EXPECT_NEAR(c.q(), 1.375, 1e-15);
  c.eps_seq = Sequence::power(1.0, 1.0);
  EXPECT_EQ(precheck(c).find("eps_summable")->verdict, "fail (harmonic lower bound detected)");
  c.M_star = 1.0;
  EXPECT_FALSE(precheck(c).find("M_star_below_1")->passed());
}

TEST(Precheck, TableSummability) {
  std::vector<double> harmonic, geometric;
  for (int n = 0; n < 200; ++n) {
    harmonic.push_back(1.0 / std::max(n, 1));
    geometric.push_back(std::pow(0.8, n));
  }
  EXPECT_EQ(summability(Sequence::table(harmonic)).verdict, "fail (harmonic lower bound detected)");
  EXPECT_EQ(summability(Sequence::table(geometric)).verdict, "pass");
  EXPECT_EQ(summability(Sequence::table({1, 0.5})).verdict, "undetermined");
  EXPECT_EQ(summability(Sequence::table({1, 0.5, 0})).verdict, "pass");
  EXPECT_EQ(summability(Sequence::constant(0.1)).verdict, "fail (constant tail)");
}

TEST(Precheck, FirstStepBound) {
  ProblemConstants c;
  c.M_seq = Sequence::constant(0.0);
  c.eps = 1.0;
  EXPECT_TRUE(precheck(c, 1.0).find("first_step_bound")->passed());
  EXPECT_FALSE(precheck(c, 1.5).find("first_step_bound")->passed());
}

TEST(Audit, ExactContraction) {
  const auto A = half_plus_one();
  const auto t = run(A, Scheme::contraction(), Vector{0}, PerturbationPlan::exact());
  const auto c = constants_for_run(Scheme::contraction(), A, Vector{0}, PerturbationPlan::exact(), 0.5, 0.0, {},
                                   NormKind::sup);
  const auto rep = audit_theorem(t, c, SchemeKind::contraction);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.entries.size(), t.steps());
}

TEST(Audit, AllSchemesOnCos) {
  const auto A = cos_op();
  const Vector x0{1};
  PerturbationPlan plan;
  plan.eps_seq = Sequence::geometric(1e-3, 0.5);
  plan.sigma_seq = Sequence::geometric(0.02, 0.5);
  plan.gamma_seq = Sequence::constant(0.01);
  plan.mode = InjectionMode::additive_seeded_random;
  plan.seed = 5;
  for (const Scheme& s : {Scheme::contraction(), Scheme::newton(), Scheme::modified_newton(), Scheme::relaxed(A, -0.5)}) {
    const auto t = run(A, s, x0, plan, 30);
    const auto c = constants_for_run(s, A, x0, plan, std::sin(1.0), 1.0, std::sin(1.0), NormKind::sup);
    const auto rep = audit_theorem(t, c, s.kind);
    EXPECT_TRUE(rep.ok()) << to_string(s.kind) << " violations " << rep.violations;
    EXPECT_GE(rep.entries.size(), t.steps());
  }
}

TEST(Audit, DetectsWrongConstants) {
  const auto A = half_plus_one();
  const auto t = run(A, Scheme::contraction(), Vector{0}, PerturbationPlan::exact());
  auto c = constants_for_run(Scheme::contraction(), A, Vector{0}, PerturbationPlan::exact(), 0.5, 0.0, {},
                             NormKind::sup);
  c.M = 0.25;
  EXPECT_FALSE(audit_theorem(t, c, SchemeKind::contraction).ok());
}

TEST(Domination, NewtonCos) {
  const auto A = cos_op();
  const auto t = run(A, Scheme::newton(), Vector{1}, PerturbationPlan::exact());
  const auto c = constants_for_run(Scheme::newton(), A, Vector{1}, PerturbationPlan::exact(), std::sin(1.0), 1.0,
                                   std::sin(1.0), NormKind::sup);
  const auto p = theorem_to_recurrence(c, SchemeKind::newton, t.r[0]);
  const auto sim = simulate_recurrence(p, t.steps());
  for (std::size_t n = 0; n < t.steps() && n < sim.r.size(); ++n) EXPECT_LE(t.r[n], sim.r[n] * (1 + 1e-12)) << n;
}

TEST(Domination, PerturbedContraction) {
  const auto A = half_plus_one();
  PerturbationPlan plan;
  plan.eps_seq = Sequence::constant(0.01);
  plan.mode = InjectionMode::additive_deterministic;
  const auto t = run(A, Scheme::contraction(), Vector{0}, plan, 80);
  const auto c = constants_for_run(Scheme::contraction(), A, Vector{0}, plan, 0.5, 0.0, {}, NormKind::sup);
  const auto p = theorem_to_recurrence(c, SchemeKind::contraction, t.r[0]);
  const auto sim = simulate_recurrence(p, t.steps());
  for (std::size_t n = 0; n < t.steps(); ++n) EXPECT_LE(t.r[n], sim.r[n] * (1 + 1e-12) + 1e-15) << n;
}

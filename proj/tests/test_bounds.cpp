#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ustail/bounds.hpp"
#include "ustail/numerics.hpp"
#include "ustail/ustat.hpp"

using namespace ustail;

namespace {

FieldSampleMatrix normal_field(std::size_t reps, std::size_t cols, std::uint64_t seed, double rho = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v;
  for (std::size_t r = 0; r < reps; ++r) {
    const double common = z(rng);
    for (std::size_t c = 0; c < cols; ++c) v.push_back(rho * common + std::sqrt(1.0 - rho * rho) * z(rng));
  }
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < cols; ++c) labels.push_back("t" + std::to_string(c));
  return FieldSampleMatrix(labels, reps, v);
}

}  // namespace

TEST_CASE("closed-form exponents") {
  ClosedFormSpec mr;
  mr.m = 2.0;
  mr.r = 0.0;
  mr.d = 1;
  const double u = 1e4;
  // l = 2/3, g = -1: u^{2/3} (ln u)^{2/3}
  CHECK(closed_form_shape(mr, u) == doctest::Approx(std::pow(u * std::log(u), 2.0 / 3.0)));
  CHECK(closed_form_bound(mr, 2.0) == 1.0);
  ClosedFormSpec b;
  b.family = ClosedFamily::Beta;
  b.beta = 1.0;
  b.C = 1.0;
  CHECK(closed_form_bound(b, std::exp(1.0) - 1.0) == doctest::Approx(std::exp(-1.0)));
  b.beta = 0.5;
  CHECK(closed_form_shape(b, std::exp(1.0) - 1.0) == doctest::Approx(1.0));
  CHECK(log_tail_exponent(0.5, ExponentConvention::OnePlusBeta) == 1.5);
  CHECK(log_tail_exponent(0.5, ExponentConvention::OnePlusInvBeta) == 3.0);
  CHECK_THROWS_AS(exponent_convention_from_string("2+beta"), std::invalid_argument);
}

TEST_CASE("closed-form calibration keeps the curve above the empirical tail") {
  TailCurve emp;
  emp.u_grid = {5.0, 10.0, 20.0, 40.0};
  emp.probs = {0.2, 0.05, 0.01, 0.0};
  ClosedFormSpec s;
  const Calibration c = calibrate_closed_form(s, emp);
  s.C = c.value;
  for (std::size_t i = 0; i < emp.u_grid.size(); ++i) CHECK(closed_form_bound(s, emp.u_grid[i]) >= emp.probs[i] * (1 - 1e-12));
}

TEST_CASE("lower bound properties") {
  CHECK(lower_bound(1.0, 2.0, 0.0) == 1.0);
  double prev = 1.0;
  for (double u : log_grid(0.1, 1e6, 50)) {
    const double v = lower_bound(1.0, 2.0, u);
    CHECK(v > 0.0);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(lower_bound(1.0, 1.0, 100.0) > lower_bound(1.0, 2.0, 100.0));
  CHECK_THROWS_AS(lower_bound(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lower_bound(1.0, 1.0, -1.0), std::invalid_argument);

  std::mt19937_64 rng(5);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  std::vector<double> x(20000);
  for (double& v : x) v = ln(rng);
  const std::vector<double> ug = log_grid(0.5, 20.0, 20);
  const Calibration c1 = calibrate_lower(x, ug, 1.0);
  const TailCurve tail = empirical_tail(x, ug);
  for (std::size_t i = 0; i < ug.size(); ++i)
    if (tail.probs[i] > 0.0) CHECK(lower_bound(1.0, c1.value, ug[i]) <= tail.probs[i] * (1 + 1e-12));
}

TEST_CASE("single-column report reduces to the scalar tail bound") {
  const FieldSampleMatrix f = normal_field(4000, 1, 11);
  const std::vector<double> p = linear_grid(2.0, 12.0, 11);
  const std::vector<double> ug = log_grid(0.5, 6.0, 12);
  const BoundReport r = theorem31_bound(f, p, 1, ug);
  CHECK(r.scalar_degenerate);
  CHECK(r.diam == 0.0);
  for (const auto& pt : r.entropy.profile) CHECK(pt.covering == 1);
  CHECK(r.certified);
  const TailCurve* up = r.find_curve(CurveKind::UpperBound);
  REQUIRE(up != nullptr);
  for (std::size_t i = 0; i < ug.size(); ++i)
    CHECK(std::abs(up->probs[i] - tail_bound(r.tau, r.sup_norm_gnorm, ug[i], r.psi_grid)) <= 1e-12);
}

TEST_CASE("upper bound dominates the empirical sup-tail") {
  // X(t) = Z1 cos t + Z2 sin t: a continuous field, so the entropy integral converges.
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  std::vector<double> v;
  for (int r = 0; r < 3000; ++r) {
    const double a = z(rng), b = z(rng);
    for (double t : linear_grid(0.0, 0.7, 8)) v.push_back(a * std::cos(t) + b * std::sin(t));
  }
  const FieldSampleMatrix f({"t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7"}, 3000, v);
  const std::vector<double> p = linear_grid(2.0, 12.0, 11);
  const std::vector<double> ug = log_grid(0.5, 8.0, 16);
  const BoundReport r1 = theorem31_bound(f, p, 1, ug);
  const BoundReport r2 = theorem31_bound(f, p, 2, ug);
  CHECK_FALSE(r1.scalar_degenerate);
  CHECK(r1.certified);
  const TailCurve* emp = r1.find_curve(CurveKind::Empirical);
  const TailCurve* up1 = r1.find_curve(CurveKind::UpperBound);
  const TailCurve* up2 = r2.find_curve(CurveKind::UpperBound);
  for (std::size_t i = 0; i < ug.size(); ++i) {
    CHECK(up1->probs[i] >= emp->probs[i]);
    CHECK(up2->probs[i] >= emp->probs[i]);
  }
  // At a common norm the lifted envelope gives the weaker curve.
  for (double u : ug)
    CHECK(tail_log_bound(r2.tau, r1.sup_norm_gnorm, u, r2.psi_grid) >=
          tail_log_bound(r1.tau, r1.sup_norm_gnorm, u, r1.psi_grid) - 1e-9);
  CHECK(theorem31_log_bound(r1, ug.back()) == doctest::Approx(up1->log_probs.back()));
  CHECK_THROWS_AS(theorem31_bound(f, p, 0, ug), std::invalid_argument);
  const FieldSampleMatrix zero({"a", "b"}, 3, std::vector<double>(6, 0.0));
  CHECK_THROWS_AS(theorem31_bound(zero, p, 1, ug), std::domain_error);
}

TEST_CASE("an unstructured field is not certified") {
  const FieldSampleMatrix f = normal_field(3000, 8, 12, 0.6);
  const std::vector<double> p = linear_grid(2.0, 12.0, 11);
  const BoundReport r = theorem31_bound(f, p, 1, log_grid(0.5, 8.0, 8));
  CHECK_FALSE(r.entropy.finite);
  CHECK(r.verdict == EntropyVerdict::Diverging);
  CHECK_FALSE(r.certified);
}

TEST_CASE("moment growth is flat for a field scaling like the normalisation") {
  const PsiFunction psi = PsiFunction::mr(2.0, 0.0);
  const std::vector<double> p = linear_grid(2.0, 8.0, 7);
  std::vector<FieldSampleMatrix> panels;
  const std::vector<std::size_t> ns{8, 16, 32};
  for (std::size_t k = 0; k < ns.size(); ++k) panels.push_back(normal_field(4000, 3, 40 + k));
  const MomentGrowthResult ok = moment_growth_check(panels, ns, psi, 1, p);
  CHECK(ok.pass);
  CHECK(ok.spread < 1.2);
  panels[2] = panels[2].scaled(3.0);
  const MomentGrowthResult bad = moment_growth_check(panels, ns, psi, 1, p);
  CHECK_FALSE(bad.pass);
  CHECK(bad.spread == doctest::Approx(ok.per_n[2] * 3.0 / std::min(ok.per_n[0], ok.per_n[1])).epsilon(1e-9));
  std::vector<FieldSampleMatrix> zeros(3, FieldSampleMatrix({"a"}, 2, {0.0, 0.0}));
  CHECK(moment_growth_check(zeros, ns, psi, 1, p).spread == 1.0);
  CHECK_THROWS_AS(moment_growth_check(std::span(panels).first(2), std::span(ns).first(2), psi, 1, p),
                  std::invalid_argument);
}

TEST_CASE("verify flags violations outside three standard errors") {
  TailCurve emp;
  emp.u_grid = {1.0, 2.0};
  emp.probs = {0.5, 0.2};
  emp.sample_count = 100;
  TailCurve up;
  up.kind = CurveKind::UpperBound;
  up.u_grid = emp.u_grid;
  up.probs = {0.6, 0.05};
  TailCurve lo;
  lo.kind = CurveKind::LowerBound;
  lo.u_grid = emp.u_grid;
  lo.probs = {0.4, 0.1};
  const std::vector<TailCurve> bounds{up, lo};
  const ComparisonReport rep = verify_report(emp, bounds);
  REQUIRE(rep.curves.size() == 2);
  CHECK(rep.curves[0].points[0].violation == false);
  // sigma at 0.05 is sqrt(0.05*0.95/100) ~ 0.0218; 0.2 exceeds 0.05 + 3 sigma
  CHECK(rep.curves[0].points[1].violation);
  CHECK(rep.curves[0].points[1].sigma == doctest::Approx(std::sqrt(0.05 * 0.95 / 100)));
  CHECK(rep.curves[1].violations == 0);
  CHECK(rep.violations == 1);
  TailCurve shifted = up;
  shifted.u_grid = {1.0, 2.5};
  const std::vector<TailCurve> bad{shifted};
  CHECK_THROWS_AS(verify_report(emp, bad), std::invalid_argument);
}

TEST_CASE("bound exponent slope of a subgaussian envelope") {
  // psi = sqrt(p): -ln P(|X| > u) grows like u^2
  const PsiFunction tau = PsiFunction::mr(2.0, 0.0);
  PsiGridOptions o;
  o.p_max = 1e8;
  o.points = 2049;
  std::vector<double> lu;
  for (double u : log_grid(1e2, 1e3, 10)) lu.push_back(std::log(u));
  const double s = bound_exponent_slope(tau, 1.0, lu, false, o);
  CHECK(s == doctest::Approx(2.0).epsilon(0.05));
}

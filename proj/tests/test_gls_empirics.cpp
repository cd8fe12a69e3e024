#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ustail/gls_empirics.hpp"

using namespace ustail;

TEST_CASE("field sample matrix validates its contents") {
  CHECK_THROWS_AS(FieldSampleMatrix({"a"}, 1, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(FieldSampleMatrix({"a", "b"}, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(FieldSampleMatrix({"a"}, 2, {1.0, NAN}), std::invalid_argument);
  const FieldSampleMatrix f({"a", "b"}, 2, {1.0, -3.0, -2.0, 0.5});
  CHECK(f.sup_abs() == std::vector<double>{3.0, 2.0});
  CHECK(f.column(1) == std::vector<double>{-3.0, 0.5});
  CHECK(f.scaled(2.0).at(1, 0) == -4.0);
}

TEST_CASE("empirical moments of simple samples") {
  const std::vector<double> p{2.0, 3.0, 8.0};
  const auto m = empirical_moments(std::vector<double>{1.0, -1.0, 1.0, -1.0}, p);
  for (double v : m.values) CHECK(v == doctest::Approx(1.0));
  const auto z = empirical_moments(std::vector<double>{0.0, 0.0, 0.0, 2.0}, p);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(z.values[i] == doctest::Approx(2.0 * std::pow(0.25, 1.0 / p[i])));
  CHECK_THROWS_AS(empirical_moments(std::vector<double>{1.0, 2.0}, std::vector<double>{1.5}), std::domain_error);
}

TEST_CASE("empirical normal moments approach the gamma-function oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::vector<double> xs(200000);
  for (double& x : xs) x = z(rng);
  const std::vector<double> p{2.0, 4.0, 6.0};
  const auto m = empirical_moments(xs, p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double want = std::sqrt(2.0) * std::exp((std::lgamma(0.5 * (p[i] + 1.0)) - 0.5 * std::log(M_PI)) / p[i]);
    CHECK(m.values[i] == doctest::Approx(want).epsilon(0.02));
  }
}

TEST_CASE("high orders are flagged low-confidence") {
  std::vector<double> xs(100, 1.0);
  const auto m = empirical_moments(xs, std::vector<double>{2.0, 10.0, 20.0});
  CHECK(m.low_confidence == std::vector<bool>{false, false, true});
}

TEST_CASE("natural psi is the columnwise supremum") {
  const FieldSampleMatrix f({"a", "b"}, 4, {1.0, 2.0, -1.0, -2.0, 1.0, 2.0, -1.0, -2.0});
  const std::vector<double> p{2.0, 4.0};
  const PsiFunction psi = natural_psi(f, p, false);
  CHECK(psi(2.0) == doctest::Approx(2.0));
  CHECK(psi(4.0) == doctest::Approx(2.0));
  const FiniteMetricSpace w = natural_distance(f, psi, p);
  CHECK(w(0, 1) == doctest::Approx(0.5));
  CHECK(w(1, 0) == w(0, 1));
  CHECK(w(0, 0) == 0.0);
}

TEST_CASE("empirical tail takes the larger one-sided exceedance") {
  const std::vector<double> s{-3.0, -1.0, 0.0, 2.0, 5.0};
  const TailCurve t = empirical_tail(s, std::vector<double>{0.0, 1.0, 2.5, 6.0});
  CHECK(t.probs == std::vector<double>{0.4, 0.4, 0.2, 0.0});
  CHECK(t.sample_count == 5);
  CHECK_THROWS_AS(empirical_tail(s, std::vector<double>{2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(empirical_tail(s, std::vector<double>{-1.0}), std::invalid_argument);
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "ustail/numerics.hpp"

using namespace ustail;

TEST_CASE("grids keep their endpoints exactly") {
  const auto g = log_grid(2.0, 64.0, 257);
  CHECK(g.size() == 257);
  CHECK(g.front() == 2.0);
  CHECK(g.back() == 64.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  const auto l = linear_grid(0.0, 1.0, 11);
  CHECK(l.back() == 1.0);
  CHECK(l[5] == doctest::Approx(0.5));
}

TEST_CASE("grid extremum is refined inside the bracketing cell") {
  const auto g = linear_grid(1.0, 10.0, 10);
  const Extremum e = grid_maximize([](double x) { return -(x - 3.3) * (x - 3.3); }, g);
  CHECK(e.arg == doctest::Approx(3.3).epsilon(1e-7));
  CHECK(e.grid_index == 2);
  const Extremum m = grid_minimize([](double x) { return (x - 7.75) * (x - 7.75); }, g);
  CHECK(m.arg == doctest::Approx(7.75).epsilon(1e-7));
}

TEST_CASE("ties go to the smallest index") {
  const auto g = linear_grid(0.0, 4.0, 5);
  const Extremum e = grid_maximize([](double) { return 1.0; }, g);
  CHECK(e.grid_index == 0);
}

TEST_CASE("trapezoid and regression") {
  const auto x = linear_grid(0.0, 1.0, 2001);
  std::vector<double> y;
  for (double v : x) y.push_back(v * v);
  CHECK(trapezoid(x, y) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  std::vector<double> line;
  for (double v : x) line.push_back(-2.5 * v + 4.0);
  CHECK(ols_slope(x, line) == doctest::Approx(-2.5));
}

TEST_CASE("isotonic correction pools violators") {
  std::vector<double> v{1.0, 3.0, 2.0, 4.0};
  CHECK(isotonic_nondecreasing(v) == doctest::Approx(1.0));
  CHECK(v == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  std::vector<double> ok{1.0, 2.0};
  CHECK(isotonic_nondecreasing(ok) == 0.0);
}

TEST_CASE("binomial coefficients") {
  CHECK(binomial_coefficient(10, 3) == 120.0);
  CHECK(binomial_coefficient(5, 7) == 0.0);
  CHECK(binomial_coefficient(256, 2) == 32640.0);
  CHECK(binomial_coefficient(60, 30) == doctest::Approx(1.1826458156486142e17).epsilon(1e-12));
}

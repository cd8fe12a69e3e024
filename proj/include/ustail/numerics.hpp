#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ustail {

/// n points log-spaced on [lo, hi], endpoints included exactly.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// n points evenly spaced on [lo, hi], endpoints included exactly.
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct Extremum {
  double arg = 0.0;
  double value = 0.0;
  std::size_t grid_index = 0;  // index of the best grid node before refinement
};

/// Maximizes f over the grid (ties go to the smallest index), then runs one
/// golden-section search on the cell bracketing the winning node. The
/// refined point is kept only if it improves on the grid value.
Extremum grid_maximize(const std::function<double(double)>& f,
                       std::span<const double> grid);

/// Same as grid_maximize with the sign flipped.
Extremum grid_minimize(const std::function<double(double)>& f,
                       std::span<const double> grid);

/// Trapezoid rule over a (not necessarily uniform) increasing abscissa.
double trapezoid(std::span<const double> x, std::span<const double> y);

/// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Pool-adjacent-violators projection onto nondecreasing sequences
/// (unit weights). Returns the largest downward step found in the input.
double isotonic_nondecreasing(std::vector<double>& values);

double binomial_coefficient(std::size_t n, std::size_t k);

}  // namespace ustail

#include "ustail/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ustail {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_grid: need 0 < lo <= hi");
  if (n == 0) throw std::invalid_argument("log_grid: need at least one point");
  if (n == 1) return {lo};
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + step * static_cast<double>(i));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (!(hi >= lo)) throw std::invalid_argument("linear_grid: need lo <= hi");
  if (n == 0) throw std::invalid_argument("linear_grid: need at least one point");
  if (n == 1) return {lo};
  std::vector<double> g(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

namespace {

// Golden-section search for a maximum of a unimodal f on [a, b].
Extremum golden_max(const std::function<double(double)>& f, double a, double b) {
  constexpr double inv_phi = 0.6180339887498948482;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (std::abs(a) + std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  Extremum best{c, fc, 0};
  if (fd > best.value) best = {d, fd, 0};
  for (double edge : {a, b}) {
    const double fe = f(edge);
    if (fe > best.value) best = {edge, fe, 0};
  }
  return best;
}

}  // namespace

Extremum grid_maximize(const std::function<double(double)>& f, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("grid_maximize: empty grid");
  std::size_t best = 0;
  double best_val = f(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  Extremum out{grid[best], best_val, best};
  if (grid.size() < 2) return out;
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  const Extremum refined = golden_max(f, lo, hi);
  if (refined.value > out.value) {
    out.arg = refined.arg;
    out.value = refined.value;
  }
  return out;
}

Extremum grid_minimize(const std::function<double(double)>& f, std::span<const double> grid) {
  Extremum e = grid_maximize([&f](double x) { return -f(x); }, grid);
  e.value = -e.value;
  return e;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: degenerate abscissa");
  return sxy / sxx;
}

double isotonic_nondecreasing(std::vector<double>& values) {
  double violation = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i)
    violation = std::max(violation, values[i - 1] - values[i]);
  if (violation == 0.0) return 0.0;

  struct Block {
    double sum;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      if (a.sum / static_cast<double>(a.count) <= b.sum / static_cast<double>(b.count)) break;
      Block merged{a.sum + b.sum, a.count + b.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::size_t k = 0;
  for (const Block& b : blocks)
    for (std::size_t j = 0; j < b.count; ++j) values[k++] = b.sum / static_cast<double>(b.count);
  return violation;
}

double binomial_coefficient(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r < 9e15 ? std::round(r) : r;
}

}  // namespace ustail

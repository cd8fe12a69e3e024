#include "ustail/metric_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "ustail/numerics.hpp"

namespace ustail {

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> dist)
    : labels_(std::move(labels)), dist_(std::move(dist)) {
  const std::size_t n = labels_.size();
  if (n == 0) throw std::invalid_argument("metric space: no points");
  if (dist_.size() != n * n) throw std::invalid_argument("metric space: distance matrix is not |T| x |T|");
  for (std::size_t i = 0; i < n; ++i) {
    if (dist_[i * n + i] != 0.0) throw std::invalid_argument("metric space: nonzero diagonal at " + labels_[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dist_[i * n + j];
      if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("metric space: distances must be finite and nonnegative");
      if (d != dist_[j * n + i]) throw std::invalid_argument("metric space: matrix is not symmetric");
      diameter_ = std::max(diameter_, d);
    }
  }
}

FiniteMetricSpace FiniteMetricSpace::from_points(std::span<const double> xs, double alpha) {
  const std::size_t n = xs.size();
  std::vector<std::string> labels(n);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = "t" + std::to_string(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double diff = std::abs(xs[i] - xs[j]);
      d[i * n + j] = alpha == 1.0 ? diff : std::pow(diff, alpha);
    }
  }
  return FiniteMetricSpace(std::move(labels), std::move(d));
}

FiniteMetricSpace FiniteMetricSpace::subspace(std::span<const std::size_t> idx) const {
  const std::size_t n = labels_.size();
  std::vector<std::string> labels;
  std::vector<double> d;
  labels.reserve(idx.size());
  d.reserve(idx.size() * idx.size());
  for (std::size_t i : idx) {
    if (i >= n) throw std::out_of_range("metric subspace: index out of range");
    labels.push_back(labels_[i]);
    for (std::size_t j : idx) d.push_back(dist_[i * n + j]);
  }
  return FiniteMetricSpace(std::move(labels), std::move(d));
}

namespace {

std::size_t packing_greedy(const FiniteMetricSpace& s, double eps) {
  const std::size_t n = s.size();
  std::vector<double> gap(n);
  for (std::size_t j = 0; j < n; ++j) gap[j] = s(0, j);
  std::size_t count = 1;
  for (;;) {
    std::size_t far = 0;
    for (std::size_t j = 1; j < n; ++j)
      if (gap[j] > gap[far]) far = j;
    if (!(gap[far] > 2.0 * eps)) break;
    ++count;
    for (std::size_t j = 0; j < n; ++j) gap[j] = std::min(gap[j], s(far, j));
  }
  return count;
}

std::size_t greedy_cover(const FiniteMetricSpace& s, double eps) {
  const std::size_t n = s.size();
  // Balls are symmetric: j lies in ball(c) iff c lies in ball(j).
  std::vector<std::vector<std::size_t>> nbr(n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t j = 0; j < n; ++j)
      if (s(c, j) <= eps) nbr[c].push_back(j);
  std::vector<std::size_t> gain(n);
  for (std::size_t c = 0; c < n; ++c) gain[c] = nbr[c].size();
  std::vector<char> covered(n, 0);
  std::size_t remaining = n;
  std::size_t balls = 0;
  while (remaining > 0) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < n; ++c)
      if (gain[c] > gain[best]) best = c;
    for (std::size_t j : nbr[best]) {
      if (covered[j]) continue;
      covered[j] = 1;
      --remaining;
      for (std::size_t c : nbr[j]) --gain[c];
    }
    ++balls;
  }
  return balls;
}

// Depth-limited search: the lowest uncovered point must lie in one of the
// chosen balls, so branch only over centres whose ball contains it.
bool cover_within(const std::vector<std::uint64_t>& ball, const std::vector<std::vector<std::size_t>>& holders,
                  std::uint64_t covered, std::uint64_t full, std::size_t budget) {
  if (covered == full) return true;
  if (budget == 0) return false;
  const std::uint64_t open = full & ~covered;
  const auto first = static_cast<std::size_t>(__builtin_ctzll(open));
  for (std::size_t c : holders[first])
    if (cover_within(ball, holders, covered | ball[c], full, budget - 1)) return true;
  return false;
}

std::size_t exact_cover(const FiniteMetricSpace& s, double eps, std::size_t lower, std::size_t upper) {
  const std::size_t n = s.size();
  if (n > 64) throw std::invalid_argument("exact covering search supports at most 64 points");
  std::vector<std::uint64_t> ball(n, 0);
  std::vector<std::vector<std::size_t>> holders(n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t j = 0; j < n; ++j)
      if (s(c, j) <= eps) {
        ball[c] |= std::uint64_t{1} << j;
        holders[j].push_back(c);
      }
  const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  for (std::size_t k = std::max<std::size_t>(lower, 1); k < upper; ++k)
    if (cover_within(ball, holders, 0, full, k)) return k;
  return upper;
}

}  // namespace

CoveringBounds covering_bounds(const FiniteMetricSpace& space, double eps, const CoveringOptions& opts) {
  if (!(eps > 0.0)) throw std::invalid_argument("covering_bounds: eps must be positive");
  CoveringBounds out;
  out.packing_lower = packing_greedy(space, eps);
  out.greedy_upper = greedy_cover(space, eps);
  if (out.packing_lower == out.greedy_upper)
    out.exact = out.greedy_upper;
  else if (space.size() <= opts.exact_threshold)
    out.exact = exact_cover(space, eps, out.packing_lower, out.greedy_upper);
  return out;
}

double entropy(const FiniteMetricSpace& space, double eps, CoveringEstimator est, const CoveringOptions& opts) {
  const CoveringBounds cb = covering_bounds(space, eps, opts);
  std::size_t n = cb.greedy_upper;
  if (est == CoveringEstimator::Packing) n = cb.packing_lower;
  if (est == CoveringEstimator::Exact) {
    if (!cb.exact) throw std::invalid_argument("entropy: exact covering number unavailable for this space size");
    n = *cb.exact;
  }
  return std::log(static_cast<double>(n));
}

EntropyIntegral entropy_integral(const FiniteMetricSpace& space, const PsiFunction& psi,
                                 std::span<const double> eps_grid, const EntropyIntegralOptions& opts) {
  if (eps_grid.empty()) throw std::invalid_argument("entropy_integral: empty eps grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0) || eps_grid[i] > 1.0) throw std::invalid_argument("entropy_integral: eps grid must lie in (0, 1]");
    if (i > 0 && !(eps_grid[i] > eps_grid[i - 1])) throw std::invalid_argument("entropy_integral: eps grid must be increasing");
  }
  EntropyIntegral out;
  std::vector<double> xs, ys, plateau;
  xs.reserve(eps_grid.size());
  ys.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    const CoveringBounds cb = covering_bounds(space, eps);
    std::size_t n = cb.greedy_upper;
    if (opts.estimator == CoveringEstimator::Packing) n = cb.packing_lower;
    if (opts.estimator == CoveringEstimator::Exact) {
      if (!cb.exact) throw std::invalid_argument("entropy_integral: exact covering number unavailable");
      n = *cb.exact;
    }
    const double h = std::log(static_cast<double>(n));
    const double integrand = std::exp(v_inf(psi, h, opts.psi_grid));
    out.profile.push_back({eps, n, h, integrand});
    xs.push_back(eps);
    ys.push_back(integrand);
    plateau.push_back(n == space.size() && space.size() > 1 ? integrand : 0.0);
  }
  out.value = trapezoid(xs, ys);
  const double plateau_part = trapezoid(xs, plateau);
  out.plateau_fraction = out.value > 0.0 ? plateau_part / out.value : 0.0;
  out.finite = std::isfinite(out.value) && out.plateau_fraction <= opts.plateau_limit;
  return out;
}

std::vector<double> default_eps_grid(const FiniteMetricSpace& space, std::size_t points) {
  double lo = space.diameter() / 1024.0;
  if (!(lo > 0.0) || lo >= 1.0) lo = 1.0 / 1024.0;
  return log_grid(lo, 1.0, points);
}

const char* to_string(EntropyVerdict v) {
  switch (v) {
    case EntropyVerdict::Converging:
      return "converging";
    case EntropyVerdict::Diverging:
      return "diverging";
    case EntropyVerdict::Undetermined:
      return "undetermined";
  }
  return "undetermined";
}

NestedEntropyResult nested_entropy_verdict(const FiniteMetricSpace& space, const PsiFunction& psi,
                                           std::span<const double> eps_grid, double growth_factor,
                                           const EntropyIntegralOptions& opts) {
  NestedEntropyResult out;
  const std::size_t n = space.size();
  for (std::size_t stride : {std::size_t{4}, std::size_t{2}, std::size_t{1}}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    if (!out.sizes.empty() && idx.size() == out.sizes.back()) continue;
    out.sizes.push_back(idx.size());
    out.integrals.push_back(entropy_integral(space.subspace(idx), psi, eps_grid, opts).value);
  }
  if (out.integrals.size() < 2) return out;
  const double prev = out.integrals[out.integrals.size() - 2];
  const double last = out.integrals.back();
  out.verdict = last > growth_factor * prev ? EntropyVerdict::Diverging : EntropyVerdict::Converging;
  return out;
}

EntropyDimension entropy_dimension(const FiniteMetricSpace& space, std::span<const double> eps_range,
                                   CoveringEstimator est) {
  std::vector<double> x, y;
  for (double eps : eps_range) {
    const CoveringBounds cb = covering_bounds(space, eps);
    std::size_t n = cb.greedy_upper;
    if (est == CoveringEstimator::Packing) n = cb.packing_lower;
    if (est == CoveringEstimator::Exact && cb.exact) n = *cb.exact;
    if (n > 1 && n < space.size()) {
      x.push_back(std::log(1.0 / eps));
      y.push_back(std::log(static_cast<double>(n)));
    }
  }
  EntropyDimension out;
  out.points_used = x.size();
  if (x.size() < 4) {
    out.undefined = true;
    return out;
  }
  out.value = ols_slope(x, y);
  return out;
}

}  // namespace ustail

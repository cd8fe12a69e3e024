#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustail/psi.hpp"

namespace ustail {

/// Labelled points with a symmetric, zero-diagonal semi-distance matrix.
class FiniteMetricSpace {
 public:
  FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> dist);

  /// Points on the real line with distance |x - y|^alpha.
  static FiniteMetricSpace from_points(std::span<const double> xs, double alpha = 1.0);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& matrix() const { return dist_; }
  double operator()(std::size_t i, std::size_t j) const { return dist_[i * labels_.size() + j]; }
  double diameter() const { return diameter_; }

  FiniteMetricSpace subspace(std::span<const std::size_t> idx) const;

 private:
  std::vector<std::string> labels_;
  std::vector<double> dist_;
  double diameter_ = 0.0;
};

struct CoveringOptions {
  /// Exhaustive minimal-cover search runs only up to this many points.
  std::size_t exact_threshold = 16;
};

struct CoveringBounds {
  std::size_t packing_lower = 0;
  std::size_t greedy_upper = 0;
  std::optional<std::size_t> exact;
};

/// Bounds on the minimal number of closed eps-balls (centred in the space)
/// needed to cover it. The packing bound counts a farthest-point greedy
/// 2eps-separated set. When both bounds coincide the value is exact even
/// above the exhaustive-search threshold.
CoveringBounds covering_bounds(const FiniteMetricSpace& space, double eps, const CoveringOptions& opts = {});

enum class CoveringEstimator { Greedy, Packing, Exact };

/// ln N(eps) for the chosen estimator. Exact throws if it is unavailable.
double entropy(const FiniteMetricSpace& space, double eps, CoveringEstimator est = CoveringEstimator::Greedy,
               const CoveringOptions& opts = {});

struct EntropyProfilePoint {
  double eps;
  std::size_t covering;
  double entropy;
  double integrand;
};

struct EntropyIntegral {
  double value = 0.0;
  /// False when most of the integral comes from the |T|-saturated plateau,
  /// i.e. the discretisation is too coarse to say anything about the limit.
  bool finite = true;
  double plateau_fraction = 0.0;
  std::vector<EntropyProfilePoint> profile;
};

struct EntropyIntegralOptions {
  CoveringEstimator estimator = CoveringEstimator::Greedy;
  PsiGridOptions psi_grid{};
  double plateau_limit = 0.5;
};

/// Trapezoid quadrature of exp(v_psi(H(eps))) over eps_grid.
EntropyIntegral entropy_integral(const FiniteMetricSpace& space, const PsiFunction& psi,
                                 std::span<const double> eps_grid, const EntropyIntegralOptions& opts = {});

/// Default grid: 64 log-spaced points on [diam / 1024, 1].
std::vector<double> default_eps_grid(const FiniteMetricSpace& space, std::size_t points = 64);

enum class EntropyVerdict { Converging, Diverging, Undetermined };
const char* to_string(EntropyVerdict v);

struct NestedEntropyResult {
  std::vector<std::size_t> sizes;
  std::vector<double> integrals;
  EntropyVerdict verdict = EntropyVerdict::Undetermined;
};

/// Integrals on nested sub-discretisations (every 4th, every 2nd, all
/// points). Diverging when the last refinement grows the integral by more
/// than growth_factor.
NestedEntropyResult nested_entropy_verdict(const FiniteMetricSpace& space, const PsiFunction& psi,
                                           std::span<const double> eps_grid, double growth_factor = 1.5,
                                           const EntropyIntegralOptions& opts = {});

struct EntropyDimension {
  double value = 0.0;
  bool undefined = false;
  std::size_t points_used = 0;
};

/// Least-squares slope of H(eps) against ln(1/eps) over the eps values where
/// 1 < N(eps) < |T| (the plateau at |T| only reflects the discretisation).
EntropyDimension entropy_dimension(const FiniteMetricSpace& space, std::span<const double> eps_range,
                                   CoveringEstimator est = CoveringEstimator::Greedy);

}  // namespace ustail

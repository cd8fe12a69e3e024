#pragma once

// Uniform tail bounds for the normalised U-statistic field: the entropy
// bound assembled from the natural envelope, the closed-form families, the
// lower bound, the moment-growth check and the empirical comparison.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustail/gls_empirics.hpp"
#include "ustail/metric_entropy.hpp"
#include "ustail/psi.hpp"

namespace ustail {

/// Exponent of ln(1 + u) in the log-tail families.
enum class ExponentConvention { OnePlusBeta, OnePlusInvBeta };
ExponentConvention exponent_convention_from_string(const std::string& s);
const char* to_string(ExponentConvention c);
double log_tail_exponent(double beta, ExponentConvention c);

struct Calibration {
  std::string name;
  double value = 0.0;
  std::string method;
};

struct Theorem31Options {
  /// Envelope for the field; the natural one when empty.
  std::optional<PsiFunction> psi;
  bool center = true;
  MomentOptions moments;
  PsiGridOptions psi_grid;
  /// Entropy grid; default_eps_grid of the distance space when empty.
  std::vector<double> eps_grid;
  CoveringEstimator estimator = CoveringEstimator::Greedy;
  double growth_factor = 1.5;
};

struct BoundReport {
  PsiFunction psi_used = PsiFunction::mr(2.0, 0.0);
  PsiFunction tau = PsiFunction::mr(2.0, 0.0);
  int degree = 1;
  PsiGridOptions psi_grid;
  std::vector<double> p_grid;

  std::vector<MomentTable> column_moments;
  MomentTable sup_moments;
  std::optional<FiniteMetricSpace> distance;
  double diam = 0.0;

  EntropyIntegral entropy;
  NestedEntropyResult nested;
  EntropyVerdict verdict = EntropyVerdict::Undetermined;
  bool certified = true;
  bool scalar_degenerate = false;

  /// G_tau norm of sup_t |phi_n(t)| over the replications.
  double sup_norm_gnorm = 0.0;
  std::vector<TailCurve> curves;
  std::vector<Calibration> calibration;
  std::vector<std::string> notes;

  const TailCurve* find_curve(CurveKind kind) const;
};

/// Entropy-bound report for a field sample of phi_n with kernel degree d.
BoundReport theorem31_bound(const FieldSampleMatrix& field, std::span<const double> p_grid, int degree,
                            std::span<const double> u_grid, const Theorem31Options& opts = {});

/// ln of the upper curve u -> exp(-nu*_tau(ln(u / K))) at u.
double theorem31_log_bound(const BoundReport& report, double u);

enum class ClosedFamily { MR, Beta };

struct ClosedFormSpec {
  ClosedFamily family = ClosedFamily::MR;
  double m = 2.0;
  double r = 0.0;
  int d = 1;
  double beta = 1.0;
  ExponentConvention convention = ExponentConvention::OnePlusBeta;
  double C = 1.0;
};

/// MR: u^l (ln u)^{-l g} with l = m / (1 + d m), g = r - d (u > e).
/// Beta: (ln(1 + u))^E.
double closed_form_shape(const ClosedFormSpec& spec, double u);
/// exp(-C shape(u)); the MR forms are void (= 1) for u <= e.
double closed_form_bound(const ClosedFormSpec& spec, double u);
TailCurve closed_form_curve(const ClosedFormSpec& spec, std::span<const double> u_grid);

/// Largest C for which the closed form stays above the empirical curve at
/// every grid point where both are informative.
Calibration calibrate_closed_form(const ClosedFormSpec& spec, const TailCurve& empirical);

/// exp(-C1 (ln(1 + u))^E).
double lower_bound(double beta, double C1, double u,
                   ExponentConvention convention = ExponentConvention::OnePlusBeta);
TailCurve lower_bound_curve(double beta, double C1, std::span<const double> u_grid,
                            ExponentConvention convention = ExponentConvention::OnePlusBeta);

/// Smallest C1 for which the lower bound stays below the empirical tail of
/// a single-point sample at every grid point with a nonzero tail.
Calibration calibrate_lower(std::span<const double> single_point_samples, std::span<const double> u_grid,
                            double beta, ExponentConvention convention = ExponentConvention::OnePlusBeta);

struct MomentGrowthRow {
  std::size_t n = 0;
  double p = 0.0;
  /// max over t of |phi_n(t)|_p / ((p / ln p)^d psi(p)).
  double ratio = 0.0;
};

struct MomentGrowthResult {
  double fitted_C = 0.0;
  std::vector<std::size_t> n_grid;
  std::vector<double> per_n;
  std::vector<MomentGrowthRow> table;
  double spread = 1.0;
  bool pass = true;
};

MomentGrowthResult moment_growth_check(std::span<const FieldSampleMatrix> panels, std::span<const std::size_t> n_grid,
                                       const PsiFunction& psi, int degree, std::span<const double> p_grid,
                                       const MomentOptions& opts = {});

struct ComparisonPoint {
  double u = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  double sigma = 0.0;
  /// ln(empirical / bound); -inf when the empirical tail is zero.
  double log_ratio = 0.0;
  bool violation = false;
};

struct CurveComparison {
  CurveKind kind = CurveKind::UpperBound;
  std::string meta;
  std::vector<ComparisonPoint> points;
  std::size_t violations = 0;
};

struct ComparisonReport {
  std::vector<CurveComparison> curves;
  std::size_t violations = 0;
};

/// Checks empirical <= upper + 3 sigma and empirical >= lower - 3 sigma, with
/// sigma the binomial standard error at the bound value.
ComparisonReport verify_report(const TailCurve& empirical, std::span<const TailCurve> bounds, double sigmas = 3.0);

/// Log-log slope of -ln(bound) against ln(u) (or ln ln(1 + u) when
/// log_log). Thresholds are given as ln(u) so that the asymptotic regime of
/// slowly converging envelopes can be reached beyond double range.
double bound_exponent_slope(const PsiFunction& tau, double gnorm, std::span<const double> log_u_grid, bool log_log,
                            const PsiGridOptions& opts = {});

}  // namespace ustail

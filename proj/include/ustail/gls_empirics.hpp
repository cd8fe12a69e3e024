#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ustail/metric_entropy.hpp"
#include "ustail/psi.hpp"

namespace ustail {

/// R independent replications of a random field observed on |T| labelled
/// parameter points, stored row-major (one row per replication).
class FieldSampleMatrix {
 public:
  FieldSampleMatrix(std::vector<std::string> t_labels, std::size_t replications, std::vector<double> values);

  std::size_t replications() const { return reps_; }
  std::size_t columns() const { return labels_.size(); }
  const std::vector<std::string>& t_labels() const { return labels_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t rep, std::size_t col) const { return values_[rep * labels_.size() + col]; }
  std::vector<double> column(std::size_t col) const;
  /// sup over t of |value| for each replication.
  std::vector<double> sup_abs() const;

  FieldSampleMatrix scaled(double a) const;
  FieldSampleMatrix select_columns(std::span<const std::size_t> cols) const;

  /// Free-form provenance (sampler, n, mean source, ...); written as CSV comments.
  std::map<std::string, std::string> meta;

 private:
  std::vector<std::string> labels_;
  std::size_t reps_;
  std::vector<double> values_;
};

enum class CurveKind { Empirical, UpperBound, LowerBound };

const char* to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& s);

struct TailCurve {
  std::vector<double> u_grid;
  std::vector<double> probs;
  CurveKind kind = CurveKind::Empirical;
  std::string meta;
  /// Sample size behind an empirical curve (0 for analytic curves).
  std::size_t sample_count = 0;
  /// ln(prob) for bound curves; lets shape checks look past underflow.
  std::vector<double> log_probs;
};

struct MomentOptions {
  /// Points with p > kappa * ln(R) are flagged low-confidence.
  double kappa = 4.0;
};

/// Empirical L_p norms (mean |x|^p)^{1/p}, made monotone in p by isotonic
/// regression when rounding breaks Lyapunov's inequality.
MomentTable empirical_moments(std::span<const double> samples, std::span<const double> p_grid,
                              const MomentOptions& opts = {});

/// Moment tables of every column, optionally after subtracting the column mean.
std::vector<MomentTable> column_moments(const FieldSampleMatrix& field, std::span<const double> p_grid, bool center,
                                        const MomentOptions& opts = {});

/// Tabulated psi(p) = sup_t |Phi(t)|_p.
PsiFunction natural_psi(const FieldSampleMatrix& field, std::span<const double> p_grid, bool center = true,
                        const MomentOptions& opts = {});
PsiFunction natural_psi(std::span<const MomentTable> columns);

/// d(t, s) = || Phi(t) - Phi(s) ||_{G psi}, with the moments of the
/// difference taken on p_grid.
FiniteMetricSpace natural_distance(const FieldSampleMatrix& field, const PsiFunction& psi,
                                   std::span<const double> p_grid, const MomentOptions& opts = {});

/// Per u: max(P(x > u), P(x < -u)) under the empirical measure.
TailCurve empirical_tail(std::span<const double> samples, std::span<const double> u_grid);

}  // namespace ustail

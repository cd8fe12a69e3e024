#include "ustail/gls_empirics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ustail/numerics.hpp"

namespace ustail {

FieldSampleMatrix::FieldSampleMatrix(std::vector<std::string> t_labels, std::size_t replications,
                                     std::vector<double> values)
    : labels_(std::move(t_labels)), reps_(replications), values_(std::move(values)) {
  if (reps_ < 2) throw std::invalid_argument("field sample matrix: need at least 2 replications");
  if (labels_.empty()) throw std::invalid_argument("field sample matrix: no parameter points");
  if (values_.size() != reps_ * labels_.size()) throw std::invalid_argument("field sample matrix: value count mismatch");
  for (const auto& l : labels_)
    if (l.empty()) throw std::invalid_argument("field sample matrix: unlabelled column");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("field sample matrix: missing or non-finite entry");
}

std::vector<double> FieldSampleMatrix::column(std::size_t col) const {
  if (col >= labels_.size()) throw std::out_of_range("field column out of range");
  std::vector<double> out(reps_);
  for (std::size_t r = 0; r < reps_; ++r) out[r] = at(r, col);
  return out;
}

std::vector<double> FieldSampleMatrix::sup_abs() const {
  std::vector<double> out(reps_, 0.0);
  for (std::size_t r = 0; r < reps_; ++r)
    for (std::size_t c = 0; c < labels_.size(); ++c) out[r] = std::max(out[r], std::abs(at(r, c)));
  return out;
}

FieldSampleMatrix FieldSampleMatrix::scaled(double a) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= a;
  FieldSampleMatrix out(labels_, reps_, std::move(v));
  out.meta = meta;
  return out;
}

FieldSampleMatrix FieldSampleMatrix::select_columns(std::span<const std::size_t> cols) const {
  std::vector<std::string> labels;
  for (std::size_t c : cols) {
    if (c >= labels_.size()) throw std::out_of_range("field column out of range");
    labels.push_back(labels_[c]);
  }
  std::vector<double> v;
  v.reserve(reps_ * cols.size());
  for (std::size_t r = 0; r < reps_; ++r)
    for (std::size_t c : cols) v.push_back(at(r, c));
  FieldSampleMatrix out(std::move(labels), reps_, std::move(v));
  out.meta = meta;
  return out;
}

const char* to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::Empirical:
      return "EMPIRICAL";
    case CurveKind::UpperBound:
      return "UPPER_BOUND";
    case CurveKind::LowerBound:
      return "LOWER_BOUND";
  }
  return "EMPIRICAL";
}

CurveKind curve_kind_from_string(const std::string& s) {
  if (s == "EMPIRICAL") return CurveKind::Empirical;
  if (s == "UPPER_BOUND") return CurveKind::UpperBound;
  if (s == "LOWER_BOUND") return CurveKind::LowerBound;
  throw std::invalid_argument("unknown curve kind '" + s + "'");
}

MomentTable empirical_moments(std::span<const double> samples, std::span<const double> p_grid,
                              const MomentOptions& opts) {
  if (samples.empty()) throw std::invalid_argument("empirical_moments: empty sample");
  if (samples.size() < 2) throw std::invalid_argument("empirical_moments: need at least 2 samples");
  if (p_grid.empty()) throw std::invalid_argument("empirical_moments: empty p grid");
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (!(p_grid[i] >= 2.0)) throw std::domain_error("empirical_moments: p grid must be >= 2");
    if (i > 0 && !(p_grid[i] > p_grid[i - 1])) throw std::invalid_argument("empirical_moments: p grid must be increasing");
  }
  double scale = 0.0;
  for (double x : samples) scale = std::max(scale, std::abs(x));

  MomentTable out;
  out.p_grid.assign(p_grid.begin(), p_grid.end());
  out.sample_count = samples.size();
  out.values.resize(p_grid.size(), 0.0);
  if (scale > 0.0) {
    // Normalising by max |x| keeps |x|^p in range for large p.
    std::vector<double> ratios;
    ratios.reserve(samples.size());
    for (double x : samples) ratios.push_back(std::abs(x) / scale);
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
      const double p = p_grid[i];
      double acc = 0.0;
      for (double r : ratios) acc += std::pow(r, p);
      out.values[i] = scale * std::pow(acc / n, 1.0 / p);
    }
  }
  out.isotonic_violation = isotonic_nondecreasing(out.values);
  const double reliable = opts.kappa * std::log(static_cast<double>(samples.size()));
  out.low_confidence.resize(p_grid.size());
  for (std::size_t i = 0; i < p_grid.size(); ++i) out.low_confidence[i] = p_grid[i] > reliable;
  return out;
}

std::vector<MomentTable> column_moments(const FieldSampleMatrix& field, std::span<const double> p_grid, bool center,
                                        const MomentOptions& opts) {
  std::vector<MomentTable> out;
  out.reserve(field.columns());
  for (std::size_t c = 0; c < field.columns(); ++c) {
    std::vector<double> col = field.column(c);
    double shift = 0.0;
    if (center) {
      for (double x : col) shift += x;
      shift /= static_cast<double>(col.size());
      for (double& x : col) x -= shift;
    }
    MomentTable m = empirical_moments(col, p_grid, opts);
    m.label = field.t_labels()[c];
    m.center_shift = shift;
    out.push_back(std::move(m));
  }
  return out;
}

PsiFunction natural_psi(std::span<const MomentTable> columns) {
  if (columns.empty()) throw std::invalid_argument("natural_psi: no columns");
  const auto& grid = columns.front().p_grid;
  std::vector<double> sup(grid.size(), 0.0);
  for (const auto& m : columns) {
    if (m.p_grid != grid) throw std::invalid_argument("natural_psi: columns use different p grids");
    for (std::size_t i = 0; i < grid.size(); ++i) sup[i] = std::max(sup[i], m.values[i]);
  }
  return PsiFunction::tabulated(grid, std::move(sup));
}

PsiFunction natural_psi(const FieldSampleMatrix& field, std::span<const double> p_grid, bool center,
                        const MomentOptions& opts) {
  const auto cols = column_moments(field, p_grid, center, opts);
  return natural_psi(cols);
}

FiniteMetricSpace natural_distance(const FieldSampleMatrix& field, const PsiFunction& psi,
                                   std::span<const double> p_grid, const MomentOptions& opts) {
  const std::size_t k = field.columns();
  std::vector<double> d(k * k, 0.0);
  std::vector<std::vector<double>> cols(k);
  for (std::size_t c = 0; c < k; ++c) cols[c] = field.column(c);
  std::vector<double> diff(field.replications());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      for (std::size_t r = 0; r < diff.size(); ++r) diff[r] = cols[i][r] - cols[j][r];
      const double w = gls_norm(empirical_moments(diff, p_grid, opts), psi);
      d[i * k + j] = w;
      d[j * k + i] = w;
    }
  }
  return FiniteMetricSpace(field.t_labels(), std::move(d));
}

TailCurve empirical_tail(std::span<const double> samples, std::span<const double> u_grid) {
  if (samples.empty()) throw std::invalid_argument("empirical_tail: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  TailCurve out;
  out.kind = CurveKind::Empirical;
  out.sample_count = sorted.size();
  out.u_grid.assign(u_grid.begin(), u_grid.end());
  out.probs.reserve(u_grid.size());
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const double u = u_grid[i];
    if (!(u >= 0.0)) throw std::invalid_argument("empirical_tail: thresholds must be nonnegative");
    if (i > 0 && !(u > u_grid[i - 1])) throw std::invalid_argument("empirical_tail: thresholds must be increasing");
    const auto above = static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), u));
    const auto below = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), -u) - sorted.begin());
    out.probs.push_back(std::max(above, below) / n);
  }
  return out;
}

}  // namespace ustail

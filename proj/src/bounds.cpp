#include "ustail/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ustail/numerics.hpp"

namespace ustail {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

ExponentConvention exponent_convention_from_string(const std::string& s) {
  if (s == "1+beta") return ExponentConvention::OnePlusBeta;
  if (s == "1+1/beta") return ExponentConvention::OnePlusInvBeta;
  throw std::invalid_argument("unknown exponent convention '" + s + "' (1+beta, 1+1/beta)");
}

const char* to_string(ExponentConvention c) {
  return c == ExponentConvention::OnePlusBeta ? "1+beta" : "1+1/beta";
}

double log_tail_exponent(double beta, ExponentConvention c) {
  if (!(beta > 0.0)) throw std::invalid_argument("log-tail exponent: beta must be positive");
  return c == ExponentConvention::OnePlusBeta ? 1.0 + beta : 1.0 + 1.0 / beta;
}

const TailCurve* BoundReport::find_curve(CurveKind kind) const {
  for (const auto& c : curves)
    if (c.kind == kind) return &c;
  return nullptr;
}

BoundReport theorem31_bound(const FieldSampleMatrix& field, std::span<const double> p_grid, int degree,
                            std::span<const double> u_grid, const Theorem31Options& opts) {
  if (degree < 1) throw std::invalid_argument("theorem31_bound: degree must be at least 1");
  if (p_grid.empty()) throw std::invalid_argument("theorem31_bound: empty p grid");
  BoundReport rep;
  rep.degree = degree;
  rep.psi_grid = opts.psi_grid;
  rep.p_grid.assign(p_grid.begin(), p_grid.end());
  rep.column_moments = column_moments(field, p_grid, opts.center, opts.moments);

  if (opts.psi) {
    rep.psi_used = *opts.psi;
  } else {
    std::vector<double> sup(p_grid.size(), 0.0);
    for (const auto& m : rep.column_moments)
      for (std::size_t i = 0; i < sup.size(); ++i) sup[i] = std::max(sup[i], m.values[i]);
    if (std::any_of(sup.begin(), sup.end(), [](double v) { return !(v > 0.0); }))
      throw std::domain_error("theorem31_bound: natural psi vanishes; the field is identically zero");
    rep.psi_used = natural_psi(rep.column_moments);
  }
  rep.tau = rep.psi_used.lifted(degree);

  rep.scalar_degenerate = field.columns() == 1;
  if (rep.scalar_degenerate)
    rep.distance.emplace(field.t_labels(), std::vector<double>{0.0});
  else
    rep.distance.emplace(natural_distance(field, rep.psi_used, p_grid, opts.moments));
  rep.diam = rep.distance->diameter();

  const std::vector<double> eps = opts.eps_grid.empty() ? default_eps_grid(*rep.distance) : opts.eps_grid;
  EntropyIntegralOptions eio;
  eio.estimator = opts.estimator;
  eio.psi_grid = opts.psi_grid;
  rep.entropy = entropy_integral(*rep.distance, rep.tau, eps, eio);
  rep.nested = nested_entropy_verdict(*rep.distance, rep.tau, eps, opts.growth_factor, eio);
  if (!rep.entropy.finite || rep.nested.verdict == EntropyVerdict::Diverging)
    rep.verdict = EntropyVerdict::Diverging;
  else if (rep.nested.verdict == EntropyVerdict::Converging)
    rep.verdict = EntropyVerdict::Converging;
  else
    rep.verdict = EntropyVerdict::Undetermined;
  rep.certified = rep.verdict != EntropyVerdict::Diverging;

  const std::vector<double> sup = field.sup_abs();
  rep.sup_moments = empirical_moments(sup, p_grid, opts.moments);
  rep.sup_moments.label = "sup";
  rep.sup_norm_gnorm = gls_norm(rep.sup_moments, rep.tau);
  if (!(rep.sup_norm_gnorm > 0.0)) throw std::domain_error("theorem31_bound: sup-statistic is identically zero");
  rep.calibration.push_back({"K_cal", rep.sup_norm_gnorm, "G_tau norm of the empirical sup-statistic"});

  TailCurve emp = empirical_tail(sup, u_grid);
  emp.meta = "sup_t |phi_n(t)|";
  rep.curves.push_back(std::move(emp));

  TailCurve upper;
  upper.kind = CurveKind::UpperBound;
  upper.meta = "entropy bound, K_cal=" + fmt(rep.sup_norm_gnorm);
  upper.u_grid.assign(u_grid.begin(), u_grid.end());
  for (double u : u_grid) {
    const double lb = tail_log_bound(rep.tau, rep.sup_norm_gnorm, u, rep.psi_grid);
    upper.log_probs.push_back(lb);
    upper.probs.push_back(std::exp(lb));
  }
  rep.curves.push_back(std::move(upper));

  if (rep.tau.truncated(rep.psi_grid))
    rep.notes.push_back("psi support truncated at p_max=" + fmt(rep.psi_grid.p_max));
  if (std::any_of(rep.sup_moments.low_confidence.begin(), rep.sup_moments.low_confidence.end(),
                  [](bool b) { return b; }))
    rep.notes.push_back("p grid extends beyond kappa*ln(R); high moments are low-confidence");
  if (rep.scalar_degenerate) rep.notes.push_back("scalar-degenerate: single parameter point");
  if (!rep.certified) rep.notes.push_back("NOT-CERTIFIED: entropy verdict diverging");
  return rep;
}

double theorem31_log_bound(const BoundReport& report, double u) {
  return tail_log_bound(report.tau, report.sup_norm_gnorm, u, report.psi_grid);
}

double closed_form_shape(const ClosedFormSpec& spec, double u) {
  if (spec.family == ClosedFamily::MR) {
    if (!(spec.m > 0.0) || spec.d < 0) throw std::invalid_argument("closed form: need m > 0 and d >= 0");
    if (!(u > std::exp(1.0))) return 0.0;
    const double l = spec.m / (1.0 + spec.d * spec.m);
    const double g = spec.r - spec.d;
    return std::pow(u, l) * std::pow(std::log(u), -l * g);
  }
  if (!(u >= 0.0)) throw std::invalid_argument("closed form: u must be nonnegative");
  return std::pow(std::log1p(u), log_tail_exponent(spec.beta, spec.convention));
}

double closed_form_bound(const ClosedFormSpec& spec, double u) {
  return std::exp(-spec.C * closed_form_shape(spec, u));
}

TailCurve closed_form_curve(const ClosedFormSpec& spec, std::span<const double> u_grid) {
  TailCurve out;
  out.kind = CurveKind::UpperBound;
  if (spec.family == ClosedFamily::MR)
    out.meta = "closed form mr m=" + fmt(spec.m) + " r=" + fmt(spec.r) + " d=" + std::to_string(spec.d) +
               " C=" + fmt(spec.C);
  else
    out.meta = "closed form beta beta=" + fmt(spec.beta) + " E=" + to_string(spec.convention) + " C=" + fmt(spec.C);
  out.u_grid.assign(u_grid.begin(), u_grid.end());
  for (double u : u_grid) {
    const double lb = -spec.C * closed_form_shape(spec, u);
    out.log_probs.push_back(lb);
    out.probs.push_back(std::exp(lb));
  }
  return out;
}

Calibration calibrate_closed_form(const ClosedFormSpec& spec, const TailCurve& empirical) {
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < empirical.u_grid.size(); ++i) {
    const double shape = closed_form_shape(spec, empirical.u_grid[i]);
    const double p = empirical.probs[i];
    if (shape > 0.0 && p > 0.0) c = std::min(c, -std::log(p) / shape);
  }
  if (!std::isfinite(c)) throw std::invalid_argument("calibrate_closed_form: no informative grid point");
  return {"C_closed_form", c, "largest C keeping the closed form above the empirical sup-tail on the grid"};
}

double lower_bound(double beta, double C1, double u, ExponentConvention convention) {
  if (!(u >= 0.0)) throw std::invalid_argument("lower_bound: u must be nonnegative");
  if (!(C1 > 0.0)) throw std::invalid_argument("lower_bound: C1 must be positive");
  return std::exp(-C1 * std::pow(std::log1p(u), log_tail_exponent(beta, convention)));
}

TailCurve lower_bound_curve(double beta, double C1, std::span<const double> u_grid, ExponentConvention convention) {
  TailCurve out;
  out.kind = CurveKind::LowerBound;
  out.meta = "lower bound beta=" + fmt(beta) + " E=" + to_string(convention) + " C1=" + fmt(C1);
  out.u_grid.assign(u_grid.begin(), u_grid.end());
  const double e = log_tail_exponent(beta, convention);
  for (double u : u_grid) {
    if (!(u >= 0.0)) throw std::invalid_argument("lower_bound: u must be nonnegative");
    const double lb = -C1 * std::pow(std::log1p(u), e);
    out.log_probs.push_back(lb);
    out.probs.push_back(std::exp(lb));
  }
  return out;
}

Calibration calibrate_lower(std::span<const double> single_point_samples, std::span<const double> u_grid, double beta,
                            ExponentConvention convention) {
  const TailCurve tail = empirical_tail(single_point_samples, u_grid);
  const double e = log_tail_exponent(beta, convention);
  double c1 = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const double shape = std::pow(std::log1p(u_grid[i]), e);
    if (shape > 0.0 && tail.probs[i] > 0.0) {
      c1 = std::max(c1, -std::log(tail.probs[i]) / shape);
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("calibrate_lower: empirical tail vanishes on the u grid");
  if (!(c1 > 0.0)) c1 = std::numeric_limits<double>::min();
  return {"C1", c1, "smallest C1 keeping the lower bound below the single-point tail (separate sample)"};
}

MomentGrowthResult moment_growth_check(std::span<const FieldSampleMatrix> panels, std::span<const std::size_t> n_grid,
                                       const PsiFunction& psi, int degree, std::span<const double> p_grid,
                                       const MomentOptions& opts) {
  if (panels.size() != n_grid.size()) throw std::invalid_argument("moment_growth_check: one panel per n required");
  if (n_grid.size() < 3) throw std::invalid_argument("moment_growth_check: need at least 3 values of n");
  if (degree < 0) throw std::invalid_argument("moment_growth_check: degree must be nonnegative");
  std::vector<double> denom;
  for (double p : p_grid) {
    if (!psi.in_support(p)) throw std::domain_error("moment_growth_check: p=" + fmt(p) + " outside the psi support");
    denom.push_back(std::pow(p / std::log(p), degree) * psi(p));
  }
  MomentGrowthResult out;
  out.n_grid.assign(n_grid.begin(), n_grid.end());
  for (std::size_t k = 0; k < panels.size(); ++k) {
    std::vector<double> row(p_grid.size(), 0.0);
    for (std::size_t c = 0; c < panels[k].columns(); ++c) {
      const MomentTable m = empirical_moments(panels[k].column(c), p_grid, opts);
      for (std::size_t i = 0; i < row.size(); ++i) row[i] = std::max(row[i], m.values[i] / denom[i]);
    }
    double cn = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      out.table.push_back({n_grid[k], p_grid[i], row[i]});
      cn = std::max(cn, row[i]);
    }
    out.per_n.push_back(cn);
  }
  const auto [lo, hi] = std::minmax_element(out.per_n.begin(), out.per_n.end());
  out.fitted_C = *hi;
  if (*hi == 0.0) out.spread = 1.0;
  else out.spread = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  out.pass = out.spread < 2.0;
  return out;
}

ComparisonReport verify_report(const TailCurve& empirical, std::span<const TailCurve> bounds, double sigmas) {
  if (empirical.kind != CurveKind::Empirical) throw std::invalid_argument("verify: first curve must be EMPIRICAL");
  if (empirical.probs.size() != empirical.u_grid.size()) throw std::invalid_argument("verify: malformed empirical curve");
  const double r = static_cast<double>(empirical.sample_count);
  ComparisonReport out;
  for (const auto& b : bounds) {
    if (b.kind == CurveKind::Empirical) throw std::invalid_argument("verify: bound curves must be UPPER_BOUND or LOWER_BOUND");
    if (b.u_grid != empirical.u_grid)
      throw std::invalid_argument(std::string("verify: u grid mismatch between EMPIRICAL and ") + to_string(b.kind) +
                                  " curve");
    CurveComparison cmp;
    cmp.kind = b.kind;
    cmp.meta = b.meta;
    for (std::size_t i = 0; i < b.u_grid.size(); ++i) {
      ComparisonPoint pt;
      pt.u = b.u_grid[i];
      pt.empirical = empirical.probs[i];
      const double log_b = b.log_probs.empty() ? std::log(b.probs[i]) : b.log_probs[i];
      pt.bound = b.log_probs.empty() ? b.probs[i] : std::exp(log_b);
      pt.sigma = r > 0.0 ? std::sqrt(pt.bound * (1.0 - pt.bound) / r) : 0.0;
      pt.log_ratio = pt.empirical > 0.0 ? std::log(pt.empirical) - log_b : -std::numeric_limits<double>::infinity();
      if (b.kind == CurveKind::UpperBound)
        pt.violation = pt.empirical > pt.bound + sigmas * pt.sigma;
      else
        pt.violation = pt.empirical < pt.bound - sigmas * pt.sigma;
      if (pt.violation) ++cmp.violations;
      cmp.points.push_back(pt);
    }
    out.violations += cmp.violations;
    out.curves.push_back(std::move(cmp));
  }
  return out;
}

double bound_exponent_slope(const PsiFunction& tau, double gnorm, std::span<const double> log_u_grid, bool log_log,
                            const PsiGridOptions& opts) {
  if (!(gnorm > 0.0)) throw std::invalid_argument("bound_exponent_slope: norm must be positive");
  std::vector<double> x, y;
  for (double lu : log_u_grid) {
    const double ratio = lu - std::log(gnorm);
    if (!(ratio >= 1.0)) throw std::domain_error("bound_exponent_slope: bound is void at ln u=" + fmt(lu));
    const double lb = std::max(nu_star(tau, ratio, opts), 0.0);
    if (!(lb > 0.0)) throw std::domain_error("bound_exponent_slope: bound is void at ln u=" + fmt(lu));
    // ln(1 + u) = ln u + ln(1 + 1/u)
    x.push_back(log_log ? std::log(lu + std::log1p(std::exp(-lu))) : lu);
    y.push_back(std::log(lb));
  }
  return ols_slope(x, y);
}

}  // namespace ustail

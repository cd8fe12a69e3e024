#pragma once

// Moment envelopes psi(p) on [2, b), the Grand Lebesgue norm they induce,
// and the Young-Fenchel machinery that turns a norm into a tail bound.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace ustail {

enum class PsiFamily { MR, Beta, ConstB, Tabulated };

/// Controls the p-grid used for every sup/inf over the support of psi.
struct PsiGridOptions {
  std::size_t points = 257;
  double p_max = 64.0;
};

/// A positive function on [2, b) bounded away from zero.
///
/// Closed-form families:
///   MR(m, r)     p^{1/m} ln^r p,  b = inf
///   Beta(c3, β)  exp(c3 p^β),     b = inf
///   ConstB(c, b) c on [2, b)
/// Tabulated envelopes are interpolated linearly in (ln p, ln psi) between
/// nodes; their support is the closed interval [2, last node].
///
/// Any family may carry a Rosenthal degree d, in which case evaluation
/// returns (p / ln p)^d times the base value.
class PsiFunction {
 public:
  static PsiFunction mr(double m, double r);
  static PsiFunction beta(double c3, double beta);
  static PsiFunction const_b(double c, double b);
  static PsiFunction tabulated(std::vector<double> p_grid, std::vector<double> values);

  PsiFamily family() const { return family_; }
  double support_end() const { return b_; }
  bool closed_at_end() const { return family_ == PsiFamily::Tabulated; }
  int rosenthal_degree() const { return degree_; }

  /// First/second family parameter (m,r), (c3,β), (c,b); zero for tabulated.
  double param1() const { return a1_; }
  double param2() const { return a2_; }
  const std::vector<double>& table_p() const { return table_p_; }
  const std::vector<double>& table_values() const { return table_v_; }

  bool in_support(double p) const;

  /// psi(p); throws std::domain_error outside the support.
  double operator()(double p) const;
  double log_value(double p) const;

  /// ln psi extended to the endpoint b by its left limit (used by the
  /// sup/inf searches, which treat the support as closed).
  double log_value_closed(double p) const;

  /// The same function with the Rosenthal degree raised by d.
  PsiFunction lifted(int d) const;

  /// Upper end of the optimisation grid and whether b was truncated to p_max.
  double grid_upper(const PsiGridOptions& opts) const;
  bool truncated(const PsiGridOptions& opts) const { return b_ > opts.p_max; }
  std::vector<double> optimisation_grid(const PsiGridOptions& opts) const;

  /// Text record, e.g. "mr m=2 r=0 lift=1" or
  /// "tabulated lift=0 p=2,4,8 v=1,1.5,2".
  std::string to_record() const;
  static PsiFunction from_record(const std::string& record);

 private:
  PsiFunction() = default;
  double base_log(double p) const;

  PsiFamily family_ = PsiFamily::MR;
  double a1_ = 0.0;
  double a2_ = 0.0;
  double b_ = std::numeric_limits<double>::infinity();
  int degree_ = 0;
  std::vector<double> table_p_;
  std::vector<double> table_v_;
  std::vector<double> table_lp_;
  std::vector<double> table_lv_;
};

/// Family descriptor accepted by make_psi.
struct PsiSpec {
  PsiFamily family = PsiFamily::MR;
  double a1 = 0.0;
  double a2 = 0.0;
  std::vector<double> p_grid;
  std::vector<double> values;
};

PsiFunction make_psi(const PsiSpec& spec);

/// tau(p) = (p / ln p)^d psi(p).
PsiFunction rosenthal_lift(const PsiFunction& psi, int d);

/// L_p norms |eta|_p of a random quantity over an increasing p-grid.
struct MomentTable {
  std::vector<double> p_grid;
  std::vector<double> values;
  std::size_t sample_count = 0;
  std::string label;
  /// p-points beyond the reliable range for the sample size.
  std::vector<bool> low_confidence;
  /// Largest downward step removed by the monotone correction.
  double isotonic_violation = 0.0;
  /// Column mean subtracted before the moments were taken (0 if none).
  double center_shift = 0.0;

  MomentTable scaled(double a) const;
};

struct FenchelResult {
  double value = 0.0;
  double argmax = 0.0;
  bool truncated = false;
};

/// nu*_psi(u) = sup_p (u p - p ln psi(p)) over [2, min(b, p_max)].
FenchelResult nu_star_detail(const PsiFunction& psi, double u, const PsiGridOptions& opts = {});
double nu_star(const PsiFunction& psi, double u, const PsiGridOptions& opts = {});

/// v_psi(x) = inf_p (x / p + ln psi(p)) over [2, min(b, p_max)].
double v_inf(const PsiFunction& psi, double x, const PsiGridOptions& opts = {});

/// sup over the table grid of |eta|_p / psi(p).
double gls_norm(const MomentTable& moments, const PsiFunction& psi);

/// Natural log of the exponential tail bound; 0 when the bound is void.
double tail_log_bound(const PsiFunction& psi, double gnorm, double y, const PsiGridOptions& opts = {});

/// exp(-nu*_psi(ln(y / gnorm))) for y >= e * gnorm, 1 below.
double tail_bound(const PsiFunction& psi, double gnorm, double y, const PsiGridOptions& opts = {});

}  // namespace ustail

#include "ustail/psi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ustail/numerics.hpp"

namespace ustail {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("psi record: bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

double parse_number(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("psi record: missing '" + key + "'");
  std::size_t used = 0;
  const double v = std::stod(it->second, &used);
  if (used != it->second.size()) throw std::invalid_argument("psi record: bad value for '" + key + "'");
  return v;
}

}  // namespace

PsiFunction PsiFunction::mr(double m, double r) {
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("MR family: m must be positive");
  if (!std::isfinite(r)) throw std::invalid_argument("MR family: r must be finite");
  PsiFunction f;
  f.family_ = PsiFamily::MR;
  f.a1_ = m;
  f.a2_ = r;
  return f;
}

PsiFunction PsiFunction::beta(double c3, double beta) {
  if (!(c3 > 0.0) || !(beta > 0.0)) throw std::invalid_argument("Beta family: c3 and beta must be positive");
  PsiFunction f;
  f.family_ = PsiFamily::Beta;
  f.a1_ = c3;
  f.a2_ = beta;
  return f;
}

PsiFunction PsiFunction::const_b(double c, double b) {
  if (!(b > 2.0)) throw std::domain_error("ConstB family: support end b must exceed 2");
  if (!(c > 0.0)) throw std::invalid_argument("ConstB family: c must be positive");
  PsiFunction f;
  f.family_ = PsiFamily::ConstB;
  f.a1_ = c;
  f.a2_ = b;
  f.b_ = b;
  return f;
}

PsiFunction PsiFunction::tabulated(std::vector<double> p_grid, std::vector<double> values) {
  if (p_grid.size() != values.size() || p_grid.empty())
    throw std::invalid_argument("tabulated psi: grid and values must be nonempty and of equal length");
  if (p_grid.front() < 2.0) throw std::domain_error("tabulated psi: grid must lie in [2, b]");
  for (std::size_t i = 1; i < p_grid.size(); ++i)
    if (!(p_grid[i] > p_grid[i - 1])) throw std::invalid_argument("tabulated psi: grid must be increasing");
  if (!(p_grid.back() > 2.0)) throw std::domain_error("tabulated psi: support end b must exceed 2");
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("tabulated psi: values must be positive and finite");
  PsiFunction f;
  f.family_ = PsiFamily::Tabulated;
  f.b_ = p_grid.back();
  f.table_lp_.reserve(p_grid.size());
  f.table_lv_.reserve(p_grid.size());
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    f.table_lp_.push_back(std::log(p_grid[i]));
    f.table_lv_.push_back(std::log(values[i]));
  }
  f.table_p_ = std::move(p_grid);
  f.table_v_ = std::move(values);
  return f;
}

bool PsiFunction::in_support(double p) const {
  if (std::isnan(p)) return false;
  if (family_ == PsiFamily::Tabulated) return p >= table_p_.front() && p <= b_;
  return p >= 2.0 && p < b_;
}

double PsiFunction::base_log(double p) const {
  switch (family_) {
    case PsiFamily::MR:
      return std::log(p) / a1_ + (a2_ == 0.0 ? 0.0 : a2_ * std::log(std::log(p)));
    case PsiFamily::Beta:
      return a1_ * std::pow(p, a2_);
    case PsiFamily::ConstB:
      return std::log(a1_);
    case PsiFamily::Tabulated: {
      const double lp = std::log(p);
      auto it = std::upper_bound(table_lp_.begin(), table_lp_.end(), lp);
      if (it == table_lp_.begin()) return table_lv_.front();
      if (it == table_lp_.end()) return table_lv_.back();
      const std::size_t hi = static_cast<std::size_t>(it - table_lp_.begin());
      const std::size_t lo = hi - 1;
      const double w = (lp - table_lp_[lo]) / (table_lp_[hi] - table_lp_[lo]);
      return table_lv_[lo] + w * (table_lv_[hi] - table_lv_[lo]);
    }
  }
  return 0.0;
}

double PsiFunction::log_value_closed(double p) const {
  if (!(in_support(p) || p == b_)) throw std::domain_error("psi evaluated outside [2, b]: p = " + fmt(p));
  double v = base_log(p);
  if (degree_ != 0) v += degree_ * (std::log(p) - std::log(std::log(p)));
  return v;
}

double PsiFunction::log_value(double p) const {
  if (!in_support(p)) throw std::domain_error("psi evaluated outside its support: p = " + fmt(p));
  return log_value_closed(p);
}

double PsiFunction::operator()(double p) const { return std::exp(log_value(p)); }

PsiFunction PsiFunction::lifted(int d) const {
  if (d < 0) throw std::invalid_argument("Rosenthal degree must be nonnegative");
  PsiFunction out = *this;
  out.degree_ += d;
  return out;
}

double PsiFunction::grid_upper(const PsiGridOptions& opts) const { return std::min(b_, opts.p_max); }

std::vector<double> PsiFunction::optimisation_grid(const PsiGridOptions& opts) const {
  const double lo = family_ == PsiFamily::Tabulated ? table_p_.front() : 2.0;
  const double hi = grid_upper(opts);
  if (!(hi > lo)) throw std::domain_error("psi optimisation grid is empty: p_max below the support start");
  return log_grid(lo, hi, std::max<std::size_t>(opts.points, 2));
}

std::string PsiFunction::to_record() const {
  std::ostringstream os;
  switch (family_) {
    case PsiFamily::MR:
      os << "mr m=" << fmt(a1_) << " r=" << fmt(a2_);
      break;
    case PsiFamily::Beta:
      os << "beta c3=" << fmt(a1_) << " beta=" << fmt(a2_);
      break;
    case PsiFamily::ConstB:
      os << "const c=" << fmt(a1_) << " b=" << fmt(a2_);
      break;
    case PsiFamily::Tabulated: {
      os << "tabulated p=";
      for (std::size_t i = 0; i < table_p_.size(); ++i) os << (i ? "," : "") << fmt(table_p_[i]);
      os << " v=";
      for (std::size_t i = 0; i < table_v_.size(); ++i) os << (i ? "," : "") << fmt(table_v_[i]);
      break;
    }
  }
  os << " lift=" << degree_;
  return os.str();
}

PsiFunction PsiFunction::from_record(const std::string& record) {
  std::istringstream is(record);
  std::string tag;
  if (!(is >> tag)) throw std::invalid_argument("psi record: empty");
  std::map<std::string, std::string> kv;
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("psi record: expected key=value, got '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  int lift = 0;
  if (kv.count("lift")) {
    const double l = parse_number(kv, "lift");
    if (l < 0 || l != std::floor(l)) throw std::invalid_argument("psi record: lift must be a nonnegative integer");
    lift = static_cast<int>(l);
  }
  PsiFunction base = [&] {
    if (tag == "mr") return mr(parse_number(kv, "m"), kv.count("r") ? parse_number(kv, "r") : 0.0);
    if (tag == "beta") return beta(parse_number(kv, "c3"), parse_number(kv, "beta"));
    if (tag == "const") return const_b(parse_number(kv, "c"), parse_number(kv, "b"));
    if (tag == "tabulated") {
      if (!kv.count("p") || !kv.count("v")) throw std::invalid_argument("psi record: tabulated needs p= and v=");
      return tabulated(parse_list(kv.at("p")), parse_list(kv.at("v")));
    }
    throw std::invalid_argument("psi record: unknown family '" + tag + "'");
  }();
  return base.lifted(lift);
}

PsiFunction make_psi(const PsiSpec& spec) {
  switch (spec.family) {
    case PsiFamily::MR:
      return PsiFunction::mr(spec.a1, spec.a2);
    case PsiFamily::Beta:
      return PsiFunction::beta(spec.a1, spec.a2);
    case PsiFamily::ConstB:
      return PsiFunction::const_b(spec.a1, spec.a2);
    case PsiFamily::Tabulated:
      return PsiFunction::tabulated(spec.p_grid, spec.values);
  }
  throw std::invalid_argument("make_psi: unknown family");
}

PsiFunction rosenthal_lift(const PsiFunction& psi, int d) { return psi.lifted(d); }

MomentTable MomentTable::scaled(double a) const {
  MomentTable out = *this;
  for (double& v : out.values) v *= a;
  out.center_shift *= a;
  return out;
}

FenchelResult nu_star_detail(const PsiFunction& psi, double u, const PsiGridOptions& opts) {
  const auto grid = psi.optimisation_grid(opts);
  const Extremum e = grid_maximize([&](double p) { return p * (u - psi.log_value_closed(p)); }, grid);
  return {e.value, e.arg, psi.truncated(opts)};
}

double nu_star(const PsiFunction& psi, double u, const PsiGridOptions& opts) {
  return nu_star_detail(psi, u, opts).value;
}

double v_inf(const PsiFunction& psi, double x, const PsiGridOptions& opts) {
  if (!(x >= 0.0)) throw std::invalid_argument("v_inf: x must be nonnegative");
  const auto grid = psi.optimisation_grid(opts);
  return grid_minimize([&](double p) { return x / p + psi.log_value_closed(p); }, grid).value;
}

double gls_norm(const MomentTable& moments, const PsiFunction& psi) {
  if (moments.p_grid.size() != moments.values.size() || moments.p_grid.empty())
    throw std::invalid_argument("gls_norm: malformed moment table");
  double best = 0.0;
  for (std::size_t i = 0; i < moments.p_grid.size(); ++i) {
    const double p = moments.p_grid[i];
    if (!psi.in_support(p))
      throw std::domain_error("gls_norm: moment grid point " + fmt(p) + " outside the psi support");
    best = std::max(best, moments.values[i] / psi(p));
  }
  return best;
}

double tail_log_bound(const PsiFunction& psi, double gnorm, double y, const PsiGridOptions& opts) {
  if (!(gnorm > 0.0)) throw std::invalid_argument("tail_bound: norm must be positive");
  if (!(y >= std::exp(1.0) * gnorm)) return 0.0;
  const double nu = nu_star(psi, std::log(y / gnorm), opts);
  return -std::max(nu, 0.0);
}

double tail_bound(const PsiFunction& psi, double gnorm, double y, const PsiGridOptions& opts) {
  return std::exp(tail_log_bound(psi, gnorm, y, opts));
}

}  // namespace ustail

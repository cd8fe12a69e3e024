#include "ustail/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ustail {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& context) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (s.empty() || end == begin || *end != '\0')
    throw std::invalid_argument(context + ": expected a number, got '" + s + "'");
  return v;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void check_label(const std::string& label) {
  if (label.find_first_of(",\n#") != std::string::npos)
    throw std::invalid_argument("label '" + label + "' contains a reserved character");
}

std::string curve_body(const TailCurve& curve) {
  std::ostringstream os;
  os << "u,prob,log_prob\n";
  for (std::size_t i = 0; i < curve.u_grid.size(); ++i) {
    const double lp = curve.log_probs.empty() ? std::log(curve.probs[i]) : curve.log_probs[i];
    os << format_double(curve.u_grid[i]) << ',' << format_double(curve.probs[i]) << ',' << format_double(lp) << '\n';
  }
  return os.str();
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument(source.string() + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  return parse_double(rows.at(row).at(col), source.string() + ": row " + std::to_string(row + 1));
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  t.source = path;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    auto cells = split(line, ',');
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw std::invalid_argument(path.string() + ": no header line");
  return t;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string field_to_csv(const FieldSampleMatrix& field) {
  std::ostringstream os;
  for (const auto& [k, v] : field.meta) os << "# " << k << '=' << v << '\n';
  os << "rep";
  for (const auto& l : field.t_labels()) {
    check_label(l);
    os << ',' << l;
  }
  os << '\n';
  for (std::size_t r = 0; r < field.replications(); ++r) {
    os << r;
    for (std::size_t c = 0; c < field.columns(); ++c) os << ',' << format_double(field.at(r, c));
    os << '\n';
  }
  return os.str();
}

FieldSampleMatrix read_field_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header[0] != "rep")
    throw std::invalid_argument(path.string() + ": not a field sample file (expected header 'rep,<t labels>')");
  std::vector<std::string> labels(t.header.begin() + 1, t.header.end());
  std::vector<double> values;
  values.reserve(t.rows.size() * labels.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 1; c < t.header.size(); ++c) {
      if (t.rows[r][c].empty())
        throw std::invalid_argument(path.string() + ": missing entry at row " + std::to_string(r + 1) + ", column " +
                                    t.header[c]);
      values.push_back(t.number(r, c));
    }
  try {
    FieldSampleMatrix f(std::move(labels), t.rows.size(), std::move(values));
    f.meta = t.meta;
    return f;
  } catch (const std::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string tail_curve_to_csv(const TailCurve& curve) {
  std::ostringstream os;
  os << "# kind=" << to_string(curve.kind) << '\n';
  if (!curve.meta.empty()) os << "# meta=" << curve.meta << '\n';
  os << "# sample_count=" << curve.sample_count << '\n';
  os << curve_body(curve);
  return os.str();
}

TailCurve read_tail_curve_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  TailCurve c;
  const auto kind = t.meta.find("kind");
  if (kind == t.meta.end()) throw std::invalid_argument(path.string() + ": missing '# kind=' line");
  c.kind = curve_kind_from_string(kind->second);
  if (auto m = t.meta.find("meta"); m != t.meta.end()) c.meta = m->second;
  if (auto s = t.meta.find("sample_count"); s != t.meta.end())
    c.sample_count = static_cast<std::size_t>(parse_double(s->second, path.string() + ": sample_count"));
  const std::size_t iu = t.column("u"), ip = t.column("prob"), il = t.column("log_prob");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    c.u_grid.push_back(t.number(r, iu));
    c.probs.push_back(t.number(r, ip));
    if (c.kind != CurveKind::Empirical) c.log_probs.push_back(t.number(r, il));
  }
  return c;
}

std::string moments_to_csv(std::span<const MomentTable> tables) {
  if (tables.empty()) throw std::invalid_argument("moments_to_csv: no tables");
  std::ostringstream os;
  os << "# sample_count=" << tables.front().sample_count << '\n';
  for (const auto& m : tables) {
    os << "# isotonic_violation." << m.label << '=' << format_double(m.isotonic_violation) << '\n';
    os << "# center_shift." << m.label << '=' << format_double(m.center_shift) << '\n';
  }
  os << "p,low_confidence";
  for (const auto& m : tables) {
    check_label(m.label);
    os << ',' << m.label;
  }
  os << '\n';
  const auto& grid = tables.front().p_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << format_double(grid[i]) << ',' << (tables.front().low_confidence[i] ? 1 : 0);
    for (const auto& m : tables) os << ',' << format_double(m.values[i]);
    os << '\n';
  }
  return os.str();
}

std::string metric_to_csv(const FiniteMetricSpace& space) {
  std::ostringstream os;
  os << "label";
  for (const auto& l : space.labels()) {
    check_label(l);
    os << ',' << l;
  }
  os << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    os << space.labels()[i];
    for (std::size_t j = 0; j < space.size(); ++j) os << ',' << format_double(space(i, j));
    os << '\n';
  }
  return os.str();
}

FiniteMetricSpace read_metric_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() == 1 && t.header[0] == "t") {
    std::vector<double> xs;
    for (std::size_t r = 0; r < t.rows.size(); ++r) xs.push_back(t.number(r, 0));
    return FiniteMetricSpace::from_points(xs);
  }
  if (t.header.empty() || t.header[0] != "label")
    throw std::invalid_argument(path.string() + ": expected header 'label,<labels>' or a single column 't'");
  const std::size_t n = t.header.size() - 1;
  if (t.rows.size() != n) throw std::invalid_argument(path.string() + ": distance matrix is not square");
  std::vector<std::string> labels(t.header.begin() + 1, t.header.end());
  std::vector<double> d;
  for (std::size_t r = 0; r < n; ++r) {
    if (t.rows[r][0] != labels[r]) throw std::invalid_argument(path.string() + ": row labels must match the header");
    for (std::size_t c = 1; c <= n; ++c) d.push_back(t.number(r, c));
  }
  try {
    return FiniteMetricSpace(std::move(labels), std::move(d));
  } catch (const std::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string entropy_profile_to_csv(const EntropyIntegral& integral) {
  std::ostringstream os;
  os << "# integral=" << format_double(integral.value) << '\n';
  os << "# finite=" << (integral.finite ? "true" : "false") << '\n';
  os << "# plateau_fraction=" << format_double(integral.plateau_fraction) << '\n';
  os << "eps,covering,entropy,integrand\n";
  for (const auto& p : integral.profile)
    os << format_double(p.eps) << ',' << p.covering << ',' << format_double(p.entropy) << ','
       << format_double(p.integrand) << '\n';
  return os.str();
}

std::string decomposition_to_csv(std::span<const HoeffdingEntry> entries, std::size_t n) {
  if (entries.empty()) throw std::invalid_argument("decomposition_to_csv: no entries");
  const auto d = static_cast<std::size_t>(entries.front().degree);
  std::ostringstream os;
  os << "# n=" << n << '\n';
  os << "t,mean,rank";
  for (std::size_t c = 1; c <= d; ++c) os << ",zeta_" << c;
  for (std::size_t c = 1; c <= d; ++c) os << ",var_h_" << c;
  os << ",var_u,var_slope\n";
  for (const auto& e : entries) {
    const VarianceResult v = variance_u(e, n);
    os << e.t_label << ',' << format_double(e.mean) << ',' << e.rank;
    for (double z : e.zetas) os << ',' << format_double(z);
    for (double s : e.projection_variances) os << ',' << format_double(s);
    os << ',' << format_double(v.var) << ',' << format_double(v.slope) << '\n';
  }
  return os.str();
}

std::string comparison_to_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "# violations=" << report.violations << '\n';
  os << "curve,u,empirical,bound,sigma,log_ratio,violation\n";
  for (std::size_t k = 0; k < report.curves.size(); ++k) {
    const auto& c = report.curves[k];
    for (const auto& p : c.points)
      os << k << ':' << to_string(c.kind) << ',' << format_double(p.u) << ',' << format_double(p.empirical) << ','
         << format_double(p.bound) << ',' << format_double(p.sigma) << ',' << format_double(p.log_ratio) << ','
         << (p.violation ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string moment_growth_to_csv(const MomentGrowthResult& result) {
  std::ostringstream os;
  os << "# fitted_C=" << format_double(result.fitted_C) << '\n';
  os << "# spread=" << format_double(result.spread) << '\n';
  os << "# verdict=" << (result.pass ? "PASS" : "FAIL") << '\n';
  os << "n,p,max_ratio\n";
  for (const auto& row : result.table)
    os << row.n << ',' << format_double(row.p) << ',' << format_double(row.ratio) << '\n';
  return os.str();
}

std::string report_to_text(const BoundReport& report, const std::map<std::string, std::string>& extra) {
  std::ostringstream os;
  auto join = [](const auto& xs, auto conv) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + conv(xs[i]);
    return s;
  };
  os << "[report]\n";
  os << "status = " << (report.certified ? "CERTIFIED" : "NOT-CERTIFIED") << '\n';
  os << "verdict = " << to_string(report.verdict) << '\n';
  os << "scalar_degenerate = " << (report.scalar_degenerate ? "true" : "false") << '\n';
  os << "degree = " << report.degree << '\n';
  os << "psi_used = " << report.psi_used.to_record() << '\n';
  os << "tau = " << report.tau.to_record() << '\n';
  os << "p_grid = " << join(report.p_grid, format_double) << '\n';
  os << "p_max = " << format_double(report.psi_grid.p_max) << '\n';
  os << "t_count = " << (report.distance ? report.distance->size() : 0) << '\n';
  os << "diam = " << format_double(report.diam) << '\n';
  os << "entropy_integral_K = " << format_double(report.entropy.value) << '\n';
  os << "entropy_finite = " << (report.entropy.finite ? "true" : "false") << '\n';
  os << "plateau_fraction = " << format_double(report.entropy.plateau_fraction) << '\n';
  os << "nested_sizes = " << join(report.nested.sizes, [](std::size_t v) { return std::to_string(v); }) << '\n';
  os << "nested_integrals = " << join(report.nested.integrals, format_double) << '\n';
  os << "nested_verdict = " << to_string(report.nested.verdict) << '\n';
  os << "sup_norm_gnorm = " << format_double(report.sup_norm_gnorm) << '\n';
  for (const auto& [k, v] : extra) os << k << " = " << v << '\n';
  os << "\n[calibration]\n";
  for (const auto& c : report.calibration) os << c.name << " = " << format_double(c.value) << " ; " << c.method << '\n';
  os << "\n[notes]\n";
  for (const auto& n : report.notes) os << "note = " << n << '\n';
  for (const auto& c : report.curves) {
    os << "\n[curve " << to_string(c.kind) << "]\n";
    if (!c.meta.empty()) os << "# meta=" << c.meta << '\n';
    os << curve_body(c);
  }
  return os.str();
}

std::string tail_curves_svg(std::span<const TailCurve> curves, const std::string& title) {
  constexpr double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
  constexpr double y_floor = -12.0;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (const auto& c : curves)
    for (double u : c.u_grid)
      if (u > 0.0) {
        xmin = std::min(xmin, std::log10(u));
        xmax = std::max(xmax, std::log10(u));
      }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
  if (xmax <= xmin) xmax = xmin + 1.0;
  auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double ly) { return T + (ly / y_floor) * (H - T - B); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k >= static_cast<int>(y_floor); k -= 2)
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(k) + 4 << "\" text-anchor=\"end\" font-size=\"10\">1e" << k
       << "</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"11\">u (log10 "
     << xmin << " .. " << xmax << ")</text>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 5] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.u_grid.size(); ++i) {
      if (!(c.u_grid[i] > 0.0)) continue;
      const double lp = c.log_probs.empty() ? std::log(c.probs[i]) : c.log_probs[i];
      const double ly = std::max(y_floor, lp / std::log(10.0));
      os << px(std::log10(c.u_grid[i])) << ',' << py(ly) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
       << colors[k % 5] << "\">" << to_string(c.kind) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ustail

#include "ustail/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ustail/numerics.hpp"

namespace ustail {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known_key(const std::string& key) {
  const auto& keys = config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
}

double to_double(const std::string& s, bool& ok) {
  const char* b = s.c_str();
  char* e = nullptr;
  const double v = std::strtod(b, &e);
  ok = !s.empty() && e != b && *e == '\0';
  return v;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"experiment.seed", "master seed (required for simulation)"},
      {"experiment.reps", "Monte Carlo replications per n"},
      {"experiment.n", "sample sizes, comma list; the last one feeds the bound"},
      {"experiment.output_dir", "artifact directory (default $USTAIL_OUTPUT_DIR or ./ustail_out)"},
      {"kernel.name", "product | sum | half_sq_diff | param_product | param_sum | constant | tabulated"},
      {"kernel.degree", "kernel degree d"},
      {"kernel.center", "product kernel: subtract this from each argument"},
      {"kernel.shape", "parametric kernels: sin | cos | tanh | identity"},
      {"kernel.t", "parametric kernels: t grid"},
      {"kernel.value", "constant kernel value"},
      {"kernel.file", "tabulated kernel CSV (index columns i1..id, then one column per t)"},
      {"sampler.name", "normal | uniform | rademacher | pareto | lognormal | alphabet"},
      {"sampler.alphabet", "alphabet sampler: value:weight pairs separated by ';'"},
      {"sampler.tail_index", "pareto tail index"},
      {"sampler.sigma", "lognormal scale"},
      {"ustat.mode", "exact | incomplete"},
      {"ustat.subsets", "incomplete mode: index tuples per replication"},
      {"ustat.exact_budget", "largest tuple count enumerated before switching to incomplete"},
      {"ustat.convention", "multiply | divide (normalisation n^{r/2})"},
      {"ustat.mean_source", "auto | analytic | grand_mean"},
      {"ustat.rank", "override the detected rank (0 = detect)"},
      {"ustat.threads", "worker threads (0 = hardware)"},
      {"grid.p", "moment orders p >= 2"},
      {"grid.eps", "entropy grid in (0, 1] (default: from the distance diameter)"},
      {"grid.u", "tail thresholds (default: from the sup-statistic)"},
      {"bound.psi", "natural, or a psi record such as 'mr m=2 r=0'"},
      {"bound.degree", "Rosenthal degree d for the lift (default: kernel degree)"},
      {"bound.p_max", "upper end of the Fenchel search for unbounded supports"},
      {"bound.psi_points", "points of the Fenchel search grid"},
      {"bound.estimator", "greedy | packing | exact covering estimator"},
      {"bound.kappa", "moments with p > kappa ln R are flagged low-confidence"},
      {"bound.center", "centre columns before estimating the natural psi"},
      {"bound.closed_form", "none | mr | beta"},
      {"bound.m", "closed form mr: m"},
      {"bound.r", "closed form mr: r"},
      {"bound.beta", "closed form beta and lower bound: beta"},
      {"bound.exponent", "1+beta | 1+1/beta"},
      {"bound.lower", "fit and report the lower bound on a separate single-point sample"},
      {"bound.growth_psi", "psi record for the moment-growth check (default: natural psi of the kernel)"},
      {"output.svg", "write plot.svg"},
  };
  return keys;
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected 'section.key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.find('.') == std::string::npos) throw std::invalid_argument(where + ": key '" + key + "' has no section");
    if (!known_key(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    if (c.has(key)) throw std::invalid_argument(where + ": duplicate key '" + key + "' (first set at " + c.origin(key) + ")");
    if (value.empty()) throw std::invalid_argument(where + ": empty value for '" + key + "'");
    c.values_[key] = value;
    c.origins_[key] = where;
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse(in, path.string());
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  if (!known_key(key)) throw std::invalid_argument(origin + ": unknown key '" + key + "'");
  values_[key] = trim(value);
  origins_[key] = origin;
}

std::string Config::origin(const std::string& key) const {
  const auto it = origins_.find(key);
  return it == origins_.end() ? "default" : it->second;
}

void Config::fail(const std::string& key, const std::string& what) const {
  throw std::invalid_argument(origin(key) + ": " + key + ": " + what);
}

std::string Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  bool ok = false;
  const double v = to_double(get(key), ok);
  if (!ok) fail(key, "expected a number, got '" + get(key) + "'");
  return v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get(key);
  char* e = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &e, 10);
  if (s.empty() || *e != '\0' || errno == ERANGE) fail(key, "expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string s = get(key);
  char* e = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &e, 10);
  if (s.empty() || s[0] == '-' || *e != '\0' || errno == ERANGE)
    fail(key, "expected a nonnegative integer, got '" + s + "'");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(key, "expected true or false, got '" + s + "'");
}

std::vector<double> parse_grid(const std::string& spec, const std::string& context) {
  std::vector<double> out;
  if (spec.rfind("log:", 0) == 0 || spec.rfind("lin:", 0) == 0) {
    std::vector<std::string> parts;
    std::istringstream is(spec);
    std::string part;
    while (std::getline(is, part, ':')) parts.push_back(trim(part));
    bool ok1 = false, ok2 = false, ok3 = false;
    if (parts.size() != 4) throw std::invalid_argument(context + ": grid must look like log:lo:hi:count");
    const double lo = to_double(parts[1], ok1), hi = to_double(parts[2], ok2), cnt = to_double(parts[3], ok3);
    if (!ok1 || !ok2 || !ok3 || !(cnt >= 1) || cnt != static_cast<double>(static_cast<long long>(cnt)))
      throw std::invalid_argument(context + ": malformed grid '" + spec + "'");
    if (!(hi >= lo) || (cnt > 1 && !(hi > lo))) throw std::invalid_argument(context + ": grid needs lo < hi");
    const auto n = static_cast<std::size_t>(cnt);
    if (n == 1) return {lo};
    if (parts[0] == "log") {
      if (!(lo > 0.0)) throw std::invalid_argument(context + ": log grid needs lo > 0");
      return log_grid(lo, hi, n);
    }
    return linear_grid(lo, hi, n);
  }
  std::istringstream is(spec);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    bool ok = false;
    const double v = to_double(trim(cell), ok);
    if (!ok) throw std::invalid_argument(context + ": expected a number, got '" + trim(cell) + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(context + ": empty grid");
  return out;
}

std::vector<double> Config::get_grid(const std::string& key, const std::string& fallback) const {
  return parse_grid(get_or(key, fallback), has(key) ? origin(key) + ": " + key : key);
}

std::vector<double> Config::get_list(const std::string& key, const std::string& fallback) const {
  return get_grid(key, fallback);
}

std::string Config::canonical() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  return os.str();
}

}  // namespace ustail

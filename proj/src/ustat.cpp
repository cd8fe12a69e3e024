#include "ustail/ustat.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "ustail/numerics.hpp"

namespace ustail {

namespace {

std::string fmt(double x, int precision = 17) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

// Elementary symmetric polynomial e_d of ys divided by C(n, d): the complete
// U-statistic of the product kernel.
double elementary_mean(std::span<const double> ys, int d) {
  std::vector<double> e(static_cast<std::size_t>(d) + 1, 0.0);
  e[0] = 1.0;
  for (double y : ys)
    for (int k = d; k >= 1; --k) e[static_cast<std::size_t>(k)] += y * e[static_cast<std::size_t>(k - 1)];
  return e[static_cast<std::size_t>(d)] / binomial_coefficient(ys.size(), static_cast<std::size_t>(d));
}

double apply_shape(ParamShape g, double z) {
  switch (g) {
    case ParamShape::Sin:
      return std::sin(z);
    case ParamShape::Cos:
      return std::cos(z);
    case ParamShape::Tanh:
      return std::tanh(z);
    case ParamShape::Identity:
      return z;
  }
  return z;
}

}  // namespace

void Alphabet::validate() const {
  if (values.empty() || values.size() != weights.size())
    throw std::invalid_argument("alphabet: values and weights must be nonempty and of equal length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("alphabet: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("alphabet: weights must sum to 1");
}

double Alphabet::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * weights[i];
  return m;
}

void KernelSpec::validate() const {
  if (degree < 1) throw std::invalid_argument("kernel: degree must be at least 1");
  if (!eval) throw std::invalid_argument("kernel: no evaluation function");
  if (t_labels.empty()) throw std::invalid_argument("kernel: empty parameter grid");
  if (alphabet) alphabet->validate();
}

ParamShape param_shape_from_string(const std::string& s) {
  if (s == "sin") return ParamShape::Sin;
  if (s == "cos") return ParamShape::Cos;
  if (s == "tanh") return ParamShape::Tanh;
  if (s == "identity") return ParamShape::Identity;
  throw std::invalid_argument("unknown parametric shape '" + s + "' (sin, cos, tanh, identity)");
}

const char* to_string(ParamShape g) {
  switch (g) {
    case ParamShape::Sin:
      return "sin";
    case ParamShape::Cos:
      return "cos";
    case ParamShape::Tanh:
      return "tanh";
    case ParamShape::Identity:
      return "identity";
  }
  return "identity";
}

KernelSpec product_kernel(int degree, double center) {
  KernelSpec k;
  k.name = center == 0.0 ? "product" : "product(center=" + fmt(center) + ")";
  k.degree = degree;
  k.t_labels = {"t0"};
  k.eval = [center](std::span<const double> xs, std::size_t) {
    double p = 1.0;
    for (double x : xs) p *= x - center;
    return p;
  };
  k.fast_exact = [center, degree](std::span<const double> data, std::size_t) {
    std::vector<double> ys(data.begin(), data.end());
    for (double& y : ys) y -= center;
    return elementary_mean(ys, degree);
  };
  return k;
}

KernelSpec sum_kernel(int degree) {
  KernelSpec k;
  k.name = "sum";
  k.degree = degree;
  k.t_labels = {"t0"};
  k.eval = [](std::span<const double> xs, std::size_t) { return std::accumulate(xs.begin(), xs.end(), 0.0); };
  k.fast_exact = [degree](std::span<const double> data, std::size_t) {
    return static_cast<double>(degree) * std::accumulate(data.begin(), data.end(), 0.0) /
           static_cast<double>(data.size());
  };
  return k;
}

KernelSpec half_sq_diff_kernel() {
  KernelSpec k;
  k.name = "half_sq_diff";
  k.degree = 2;
  k.t_labels = {"t0"};
  k.eval = [](std::span<const double> xs, std::size_t) { return 0.5 * (xs[0] - xs[1]) * (xs[0] - xs[1]); };
  k.fast_exact = [](std::span<const double> data, std::size_t) {
    const double n = static_cast<double>(data.size());
    const double m = std::accumulate(data.begin(), data.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : data) ss += (x - m) * (x - m);
    return ss / (n - 1.0);
  };
  return k;
}

KernelSpec parametric_kernel(int degree, ParamShape g, std::span<const double> t_values, bool product) {
  if (t_values.empty()) throw std::invalid_argument("parametric kernel: empty t grid");
  KernelSpec k;
  k.name = std::string(product ? "param_product(" : "param_sum(") + to_string(g) + ")";
  k.degree = degree;
  std::vector<double> ts(t_values.begin(), t_values.end());
  for (double t : ts) k.t_labels.push_back("t=" + fmt(t, 10));
  if (product) {
    k.eval = [g, ts](std::span<const double> xs, std::size_t ti) {
      double p = 1.0;
      for (double x : xs) p *= apply_shape(g, ts[ti] * x);
      return p;
    };
    k.fast_exact = [g, ts, degree](std::span<const double> data, std::size_t ti) {
      std::vector<double> ys(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) ys[i] = apply_shape(g, ts[ti] * data[i]);
      return elementary_mean(ys, degree);
    };
  } else {
    k.eval = [g, ts](std::span<const double> xs, std::size_t ti) {
      double s = 0.0;
      for (double x : xs) s += apply_shape(g, ts[ti] * x);
      return s;
    };
    k.fast_exact = [g, ts, degree](std::span<const double> data, std::size_t ti) {
      double s = 0.0;
      for (double x : data) s += apply_shape(g, ts[ti] * x);
      return static_cast<double>(degree) * s / static_cast<double>(data.size());
    };
  }
  return k;
}

KernelSpec constant_kernel(int degree, double value) {
  KernelSpec k;
  k.name = "constant";
  k.degree = degree;
  k.t_labels = {"t0"};
  k.eval = [value](std::span<const double>, std::size_t) { return value; };
  k.fast_exact = [value](std::span<const double>, std::size_t) { return value; };
  return k;
}

KernelSpec tabulated_kernel(int degree, Alphabet alphabet, std::vector<std::string> t_labels,
                            std::vector<double> table) {
  alphabet.validate();
  if (degree < 1) throw std::invalid_argument("tabulated kernel: degree must be at least 1");
  const std::size_t k = alphabet.values.size();
  const std::size_t t_count = t_labels.size();
  // Enumerate sorted index tuples in lexicographic order.
  std::map<std::vector<std::size_t>, std::size_t> row_of;
  std::vector<std::size_t> idx(static_cast<std::size_t>(degree), 0);
  for (std::size_t row = 0;; ++row) {
    row_of.emplace(idx, row);
    int pos = degree - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == k - 1) --pos;
    if (pos < 0) break;
    const std::size_t next = idx[static_cast<std::size_t>(pos)] + 1;
    for (auto j = static_cast<std::size_t>(pos); j < idx.size(); ++j) idx[j] = next;
  }
  if (table.size() != row_of.size() * t_count)
    throw std::invalid_argument("tabulated kernel: expected " + std::to_string(row_of.size()) + " rows of " +
                                std::to_string(t_count) + " values");
  std::map<double, std::size_t> index_of;
  for (std::size_t i = 0; i < k; ++i)
    if (!index_of.emplace(alphabet.values[i], i).second) throw std::invalid_argument("tabulated kernel: repeated letter");

  KernelSpec out;
  out.name = "tabulated";
  out.degree = degree;
  out.t_labels = std::move(t_labels);
  out.alphabet = alphabet;
  out.eval = [row_of = std::move(row_of), index_of = std::move(index_of), table = std::move(table), t_count](
                 std::span<const double> xs, std::size_t ti) {
    std::vector<std::size_t> key;
    key.reserve(xs.size());
    for (double x : xs) {
      auto it = index_of.find(x);
      if (it == index_of.end()) throw std::invalid_argument("tabulated kernel: value " + fmt(x) + " not in alphabet");
      key.push_back(it->second);
    }
    std::sort(key.begin(), key.end());
    return table[row_of.at(key) * t_count + ti];
  };
  return out;
}

double symmetry_defect(const KernelSpec& kernel, std::span<const double> pool, std::size_t trials,
                       std::uint64_t seed) {
  if (pool.empty()) throw std::invalid_argument("symmetry_defect: empty pool");
  Philox4x32 rng(seed, 0);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<double> xs(static_cast<std::size_t>(kernel.degree));
  double worst = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (double& x : xs) x = pool[pick(rng)];
    std::vector<double> perm = xs;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t t = 0; t < kernel.t_count(); ++t)
      worst = std::max(worst, std::abs(kernel.eval(xs, t) - kernel.eval(perm, t)));
  }
  return worst;
}

double Sampler::draw(Philox4x32& rng) const {
  switch (kind) {
    case SamplerKind::Alphabet: {
      const double u = rng.uniform01();
      double acc = 0.0;
      for (std::size_t i = 0; i < alphabet.values.size(); ++i) {
        acc += alphabet.weights[i];
        if (u < acc) return alphabet.values[i];
      }
      return alphabet.values.back();
    }
    case SamplerKind::Uniform01:
      return rng.uniform01();
    case SamplerKind::Normal: {
      std::normal_distribution<double> z;
      return z(rng);
    }
    case SamplerKind::Rademacher:
      return (rng() & 1u) ? 1.0 : -1.0;
    case SamplerKind::Pareto: {
      const double sign = (rng() & 1u) ? 1.0 : -1.0;
      return sign * std::pow(1.0 - rng.uniform01(), -1.0 / tail_index);
    }
    case SamplerKind::LogNormal: {
      const double sign = (rng() & 1u) ? 1.0 : -1.0;
      std::normal_distribution<double> z;
      return sign * std::exp(sigma * z(rng));
    }
  }
  return 0.0;
}

double Sampler::mean() const {
  switch (kind) {
    case SamplerKind::Alphabet:
      return alphabet.mean();
    case SamplerKind::Uniform01:
      return 0.5;
    default:
      return 0.0;
  }
}

std::string Sampler::describe() const {
  switch (kind) {
    case SamplerKind::Alphabet: {
      std::ostringstream os;
      os << "alphabet(";
      for (std::size_t i = 0; i < alphabet.values.size(); ++i)
        os << (i ? ";" : "") << fmt(alphabet.values[i]) << ":" << fmt(alphabet.weights[i]);
      os << ")";
      return os.str();
    }
    case SamplerKind::Uniform01:
      return "uniform";
    case SamplerKind::Normal:
      return "normal";
    case SamplerKind::Rademacher:
      return "rademacher";
    case SamplerKind::Pareto:
      return "pareto(tail_index=" + fmt(tail_index) + ")";
    case SamplerKind::LogNormal:
      return "lognormal(sigma=" + fmt(sigma) + ")";
  }
  return "unknown";
}

Alphabet Sampler::proxy_alphabet(std::size_t size) const {
  if (kind == SamplerKind::Alphabet) return alphabet;
  if (kind == SamplerKind::Rademacher) return {{-1.0, 1.0}, {0.5, 0.5}};
  const std::size_t k = std::max<std::size_t>(2, size + (size % 2));
  Alphabet a;
  a.weights.assign(k, 1.0 / static_cast<double>(k));
  a.values.resize(k);
  if (kind == SamplerKind::Uniform01) {
    for (std::size_t i = 0; i < k; ++i) a.values[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    return a;
  }
  // Symmetric laws: quantiles of |X| at levels (2j+1)/k, mirrored.
  const boost::math::normal_distribution<double> std_normal;
  const std::size_t half = k / 2;
  for (std::size_t j = 0; j < half; ++j) {
    const double level = (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(k);
    double mag = 0.0;
    switch (kind) {
      case SamplerKind::Normal:
        mag = boost::math::quantile(std_normal, 0.5 + 0.5 * level);
        break;
      case SamplerKind::Pareto:
        mag = std::pow(1.0 - level, -1.0 / tail_index);
        break;
      case SamplerKind::LogNormal:
        mag = std::exp(sigma * boost::math::quantile(std_normal, level));
        break;
      default:
        break;
    }
    a.values[half + j] = mag;
    a.values[half - 1 - j] = -mag;
  }
  return a;
}

Sampler Sampler::parse(const std::string& name) {
  Sampler s;
  if (name == "normal") s.kind = SamplerKind::Normal;
  else if (name == "uniform") s.kind = SamplerKind::Uniform01;
  else if (name == "rademacher") s.kind = SamplerKind::Rademacher;
  else if (name == "pareto") s.kind = SamplerKind::Pareto;
  else if (name == "lognormal") s.kind = SamplerKind::LogNormal;
  else if (name == "alphabet") s.kind = SamplerKind::Alphabet;
  else throw std::invalid_argument("unknown sampler '" + name + "'");
  return s;
}

namespace {

void fill_exact(const KernelSpec& kernel, std::span<const double> data, std::vector<double>& values) {
  const std::size_t n = data.size();
  const auto d = static_cast<std::size_t>(kernel.degree);
  std::fill(values.begin(), values.end(), 0.0);
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> xs(d);
  double count = 0.0;
  for (;;) {
    for (std::size_t j = 0; j < d; ++j) xs[j] = data[idx[j]];
    for (std::size_t t = 0; t < values.size(); ++t) values[t] += kernel.eval(xs, t);
    count += 1.0;
    std::size_t pos = d;
    while (pos > 0 && idx[pos - 1] == n - d + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
  for (double& v : values) v /= count;
}

void fill_incomplete(const KernelSpec& kernel, std::span<const double> data, std::size_t subsets, Philox4x32& rng,
                     std::vector<double>& values) {
  const std::size_t n = data.size();
  const auto d = static_cast<std::size_t>(kernel.degree);
  std::fill(values.begin(), values.end(), 0.0);
  std::vector<std::size_t> chosen;
  std::vector<double> xs(d);
  for (std::size_t s = 0; s < subsets; ++s) {
    // Floyd's algorithm: d distinct indices from [0, n).
    chosen.clear();
    for (std::size_t j = n - d; j < n; ++j) {
      const std::size_t r = std::uniform_int_distribution<std::size_t>(0, j)(rng);
      if (std::find(chosen.begin(), chosen.end(), r) == chosen.end()) chosen.push_back(r);
      else chosen.push_back(j);
    }
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t j = 0; j < d; ++j) xs[j] = data[chosen[j]];
    for (std::size_t t = 0; t < values.size(); ++t) values[t] += kernel.eval(xs, t);
  }
  for (double& v : values) v /= static_cast<double>(subsets);
}

}  // namespace

UStatPath u_stat(const KernelSpec& kernel, std::span<const double> data, const UStatOptions& opts, Philox4x32& rng) {
  const std::size_t n = data.size();
  const auto d = static_cast<std::size_t>(kernel.degree);
  if (n <= d) throw std::invalid_argument("u_stat: sample size must exceed the kernel degree");
  UStatPath path;
  path.n = n;
  path.seed = opts.seed;
  path.values.assign(kernel.t_count(), 0.0);
  const double tuples = binomial_coefficient(n, d);

  UStatMode mode = opts.mode;
  std::size_t subsets = opts.subsets;
  if (mode == UStatMode::Incomplete) {
    if (subsets < 1) throw std::invalid_argument("u_stat: incomplete mode needs at least one subset");
    if (static_cast<double>(subsets) >= tuples) mode = UStatMode::Exact;
  }
  if (mode == UStatMode::Exact) {
    if (opts.use_fast_path && kernel.fast_exact) {
      for (std::size_t t = 0; t < kernel.t_count(); ++t) path.values[t] = kernel.fast_exact(data, t);
      path.mode = UStatMode::Exact;
      return path;
    }
    if (tuples <= opts.exact_budget) {
      fill_exact(kernel, data, path.values);
      path.mode = UStatMode::Exact;
      return path;
    }
    mode = UStatMode::Incomplete;
    subsets = static_cast<std::size_t>(opts.exact_budget);
    path.auto_switched = true;
  }
  fill_incomplete(kernel, data, subsets, rng, path.values);
  path.mode = UStatMode::Incomplete;
  path.subsets = subsets;
  return path;
}

UStatPath u_stat(const KernelSpec& kernel, std::span<const double> data, const UStatOptions& opts) {
  Philox4x32 rng(opts.seed, opts.stream);
  return u_stat(kernel, data, opts, rng);
}

NormConvention norm_convention_from_string(const std::string& s) {
  if (s == "multiply") return NormConvention::Multiply;
  if (s == "divide") return NormConvention::Divide;
  throw std::invalid_argument("unknown normalisation convention '" + s + "' (multiply, divide)");
}

const char* to_string(NormConvention c) { return c == NormConvention::Multiply ? "multiply" : "divide"; }

std::vector<double> phi_n(const UStatPath& path, int rank, std::span<const double> mean_per_t,
                          NormConvention convention) {
  if (mean_per_t.size() != path.values.size()) throw std::invalid_argument("phi_n: mean vector does not match the t grid");
  if (rank < 0) throw std::invalid_argument("phi_n: rank must be nonnegative");
  const double half = 0.5 * static_cast<double>(rank);
  const double scale = convention == NormConvention::Multiply ? std::pow(static_cast<double>(path.n), half)
                                                              : std::pow(static_cast<double>(path.n), -half);
  std::vector<double> out(path.values.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = scale * (path.values[t] - mean_per_t[t]);
  return out;
}

CanonicalTerms canonical_terms(const KernelSpec& kernel, const Alphabet& alphabet, std::size_t t_index) {
  alphabet.validate();
  const auto d = static_cast<std::size_t>(kernel.degree);
  if (d > 4) throw std::invalid_argument("hoeffding decomposition supports degree <= 4");
  if (t_index >= kernel.t_count()) throw std::out_of_range("hoeffding decomposition: t index out of range");
  const std::size_t k = alphabet.values.size();
  std::vector<std::size_t> pow_k(d + 1, 1);
  for (std::size_t c = 1; c <= d; ++c) pow_k[c] = pow_k[c - 1] * k;
  if (pow_k[d] > 20'000'000) throw std::invalid_argument("hoeffding decomposition: alphabet^degree too large");

  // h[c] = E[Phi | X_1..X_c] tabulated on alphabet^c.
  std::vector<std::vector<double>> h(d + 1);
  h[d].resize(pow_k[d]);
  std::vector<double> xs(d);
  for (std::size_t flat = 0; flat < pow_k[d]; ++flat) {
    std::size_t rem = flat;
    for (std::size_t j = d; j-- > 0;) {
      xs[j] = alphabet.values[rem % k];
      rem /= k;
    }
    h[d][flat] = kernel.eval(xs, t_index);
  }
  for (std::size_t c = d; c-- > 0;) {
    h[c].assign(pow_k[c], 0.0);
    for (std::size_t flat = 0; flat < pow_k[c]; ++flat)
      for (std::size_t j = 0; j < k; ++j) h[c][flat] += alphabet.weights[j] * h[c + 1][flat * k + j];
  }

  CanonicalTerms out;
  out.degree = kernel.degree;
  out.alphabet_size = k;
  out.weights = alphabet.weights;
  out.g.resize(d + 1);
  out.g[0] = {h[0][0]};
  std::vector<std::size_t> digits(d);
  for (std::size_t c = 1; c <= d; ++c) {
    out.g[c].assign(pow_k[c], 0.0);
    for (std::size_t flat = 0; flat < pow_k[c]; ++flat) {
      std::size_t rem = flat;
      for (std::size_t j = c; j-- > 0;) {
        digits[j] = rem % k;
        rem /= k;
      }
      double acc = 0.0;
      for (std::size_t mask = 0; mask < (std::size_t{1} << c); ++mask) {
        std::size_t sub = 0, size = 0;
        for (std::size_t j = 0; j < c; ++j)
          if (mask & (std::size_t{1} << j)) {
            sub = sub * k + digits[j];
            ++size;
          }
        const double sign = ((c - size) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * h[size][sub];
      }
      out.g[c][flat] = acc;
    }
  }
  return out;
}

CanonicalTerms canonical_terms(const KernelSpec& kernel, std::size_t t_index) {
  if (!kernel.alphabet) throw std::invalid_argument("decomposition requires finite alphabet");
  return canonical_terms(kernel, *kernel.alphabet, t_index);
}

namespace {

// Product weight of every tuple in alphabet^c.
std::vector<double> tuple_weights(const std::vector<double>& w, std::size_t c) {
  std::vector<double> out{1.0};
  for (std::size_t level = 0; level < c; ++level) {
    std::vector<double> next;
    next.reserve(out.size() * w.size());
    for (double a : out)
      for (double b : w) next.push_back(a * b);
    out = std::move(next);
  }
  return out;
}

}  // namespace

HoeffdingEntry hoeffding_decompose(const KernelSpec& kernel, const Alphabet& alphabet, std::size_t t_index,
                                   double rank_tol) {
  const CanonicalTerms terms = canonical_terms(kernel, alphabet, t_index);
  const auto d = static_cast<std::size_t>(kernel.degree);
  HoeffdingEntry out;
  out.t_label = kernel.t_labels[t_index];
  out.degree = kernel.degree;
  out.mean = terms.g[0][0];
  out.zetas.assign(d, 0.0);
  for (std::size_t c = 1; c <= d; ++c) {
    const auto w = tuple_weights(alphabet.weights, c);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * terms.g[c][i] * terms.g[c][i];
    out.zetas[c - 1] = acc;
  }
  // Var h_c = sum over nonempty S of size <= c of the canonical variances.
  out.projection_variances.assign(d, 0.0);
  for (std::size_t c = 1; c <= d; ++c)
    for (std::size_t j = 1; j <= c; ++j) out.projection_variances[c - 1] += binomial_coefficient(c, j) * out.zetas[j - 1];

  const double top = *std::max_element(out.zetas.begin(), out.zetas.end());
  const double scale = std::max(1.0, out.mean * out.mean + out.projection_variances.back());
  if (!(top > 1e-20 * scale)) {
    out.rank = 0;
    return out;
  }
  for (std::size_t c = 1; c <= d; ++c)
    if (out.zetas[c - 1] > rank_tol * top) {
      out.rank = static_cast<int>(c);
      break;
    }
  return out;
}

HoeffdingEntry hoeffding_decompose(const KernelSpec& kernel, std::size_t t_index, double rank_tol) {
  if (!kernel.alphabet) throw std::invalid_argument("decomposition requires finite alphabet");
  return hoeffding_decompose(kernel, *kernel.alphabet, t_index, rank_tol);
}

double variance_u_exact(const HoeffdingEntry& decomp, std::size_t n) {
  const auto d = static_cast<std::size_t>(decomp.degree);
  if (n <= d) throw std::invalid_argument("variance_u: n must exceed the kernel degree");
  double acc = 0.0;
  for (std::size_t c = 1; c <= d; ++c)
    acc += binomial_coefficient(d, c) * binomial_coefficient(n - d, d - c) * decomp.projection_variances[c - 1];
  return acc / binomial_coefficient(n, d);
}

double variance_slope(const HoeffdingEntry& decomp, std::span<const std::size_t> n_grid) {
  std::vector<double> x, y;
  for (std::size_t n : n_grid) {
    const double v = variance_u_exact(decomp, n);
    if (!(v > 0.0)) return 0.0;
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(v));
  }
  return ols_slope(x, y);
}

VarianceResult variance_u(const HoeffdingEntry& decomp, std::size_t n) {
  const std::size_t grid[] = {n, 2 * n, 4 * n, 8 * n, 16 * n};
  return {variance_u_exact(decomp, n), variance_slope(decomp, grid)};
}

RankSummary rank_of(std::span<const HoeffdingEntry> decomps) {
  if (decomps.empty()) throw std::invalid_argument("rank_of: no decompositions");
  RankSummary out;
  for (const auto& e : decomps) {
    out.rank = std::max(out.rank, e.rank);
    out.partition[e.rank].push_back(e.t_label);
  }
  return out;
}

PanelResult simulate_panel_full(const KernelSpec& kernel, const Sampler& sampler, std::size_t n, std::size_t reps,
                                std::uint64_t seed, const PanelOptions& opts) {
  kernel.validate();
  if (sampler.kind == SamplerKind::Alphabet) sampler.alphabet.validate();
  if (reps < 2) throw std::invalid_argument("simulate_panel: need at least 2 replications");
  if (n <= static_cast<std::size_t>(kernel.degree))
    throw std::invalid_argument("simulate_panel: n must exceed the kernel degree");
  const std::size_t t_count = kernel.t_count();

  const bool analytic = opts.mean_source == MeanSource::Analytic ||
                        (opts.mean_source == MeanSource::Auto && sampler.is_discrete());
  if (opts.mean_source == MeanSource::Analytic && !sampler.is_discrete())
    throw std::invalid_argument("simulate_panel: analytic mean needs a finite-alphabet sampler");

  std::vector<HoeffdingEntry> decomps;
  if (opts.rank == 0 || analytic) {
    const std::size_t proxy = kernel.degree <= 2 ? opts.proxy_alphabet_size : std::min<std::size_t>(opts.proxy_alphabet_size, 12);
    const Alphabet alpha = sampler.proxy_alphabet(proxy);
    for (std::size_t t = 0; t < t_count; ++t) decomps.push_back(hoeffding_decompose(kernel, alpha, t));
  }
  const int rank = opts.rank > 0 ? opts.rank : rank_of(decomps).rank;

  std::vector<double> u(reps * t_count, 0.0);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(opts.threads ? opts.threads : hw, reps);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      UStatOptions uo;
      uo.mode = opts.mode;
      uo.subsets = opts.subsets;
      uo.exact_budget = opts.exact_budget;
      uo.seed = seed;
      std::vector<double> data(n);
      for (std::size_t r = w; r < reps; r += workers) {
        Philox4x32 rng(seed, r + opts.stream_offset);
        for (double& x : data) x = sampler.draw(rng);
        const UStatPath path = u_stat(kernel, data, uo, rng);
        std::copy(path.values.begin(), path.values.end(), u.begin() + static_cast<std::ptrdiff_t>(r * t_count));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> means(t_count, 0.0);
  if (analytic) {
    for (std::size_t t = 0; t < t_count; ++t) means[t] = decomps[t].mean;
  } else {
    for (std::size_t r = 0; r < reps; ++r)
      for (std::size_t t = 0; t < t_count; ++t) means[t] += u[r * t_count + t];
    for (double& m : means) m /= static_cast<double>(reps);
  }

  const double half = 0.5 * static_cast<double>(rank);
  const double scale = opts.convention == NormConvention::Multiply ? std::pow(static_cast<double>(n), half)
                                                                   : std::pow(static_cast<double>(n), -half);
  std::vector<double> phi(u.size());
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t t = 0; t < t_count; ++t) phi[r * t_count + t] = scale * (u[r * t_count + t] - means[t]);

  FieldSampleMatrix field(kernel.t_labels, reps, std::move(phi));
  field.meta["kernel"] = kernel.name;
  field.meta["degree"] = std::to_string(kernel.degree);
  field.meta["sampler"] = sampler.describe();
  field.meta["n"] = std::to_string(n);
  field.meta["reps"] = std::to_string(reps);
  field.meta["seed"] = std::to_string(seed);
  field.meta["rank"] = std::to_string(rank);
  field.meta["mean_source"] = analytic ? "analytic" : "grand_mean";
  field.meta["norm_convention"] = to_string(opts.convention);
  field.meta["mode"] = opts.mode == UStatMode::Exact ? "exact" : "incomplete";
  return PanelResult{std::move(field), std::move(u), std::move(means), rank};
}

FieldSampleMatrix simulate_panel(const KernelSpec& kernel, const Sampler& sampler, std::size_t n, std::size_t reps,
                                 std::uint64_t seed, const PanelOptions& opts) {
  return simulate_panel_full(kernel, sampler, n, reps, seed, opts).phi;
}

}  // namespace ustail

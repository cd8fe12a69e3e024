#pragma once

// Parametric U-statistics: exact and incomplete evaluation, the Hoeffding
// decomposition on finite alphabets, and the seeded Monte Carlo panel.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustail/gls_empirics.hpp"
#include "ustail/philox.hpp"

namespace ustail {

/// Finite sample space with probability weights.
struct Alphabet {
  std::vector<double> values;
  std::vector<double> weights;

  void validate() const;
  double mean() const;
};

/// Symmetric kernel Phi(x_1..x_d; t) over a labelled parameter grid.
struct KernelSpec {
  using Eval = std::function<double(std::span<const double> xs, std::size_t t_index)>;
  /// Optional O(n) evaluation of the complete U-statistic for one t.
  using FastExact = std::function<double(std::span<const double> data, std::size_t t_index)>;

  std::string name;
  int degree = 1;
  Eval eval;
  std::vector<std::string> t_labels;
  std::optional<Alphabet> alphabet;
  FastExact fast_exact;

  std::size_t t_count() const { return t_labels.size(); }
  void validate() const;
};

enum class ParamShape { Sin, Cos, Tanh, Identity };
ParamShape param_shape_from_string(const std::string& s);
const char* to_string(ParamShape g);

/// prod_i (x_i - center).
KernelSpec product_kernel(int degree, double center = 0.0);
/// sum_i x_i.
KernelSpec sum_kernel(int degree);
/// (x_1 - x_2)^2 / 2; its U-statistic is the unbiased sample variance.
KernelSpec half_sq_diff_kernel();
/// prod_i g(t x_i) or sum_i g(t x_i) over the t grid.
KernelSpec parametric_kernel(int degree, ParamShape g, std::span<const double> t_values, bool product);
KernelSpec constant_kernel(int degree, double value);
/// Kernel tabulated on sorted alphabet-index tuples i_1 <= ... <= i_d;
/// table has one row per tuple (lexicographic order) and one column per t.
KernelSpec tabulated_kernel(int degree, Alphabet alphabet, std::vector<std::string> t_labels,
                            std::vector<double> table);

/// Evaluates the kernel on `trials` random argument tuples drawn from pool
/// and on a random permutation of each; returns the largest discrepancy.
double symmetry_defect(const KernelSpec& kernel, std::span<const double> pool, std::size_t trials,
                       std::uint64_t seed);

enum class SamplerKind { Alphabet, Uniform01, Normal, Rademacher, Pareto, LogNormal };

/// Distribution of the i.i.d. observations.
struct Sampler {
  SamplerKind kind = SamplerKind::Normal;
  Alphabet alphabet;
  double tail_index = 3.0;  // Pareto: |X| = U^{-1/alpha} on [1, inf), random sign
  double sigma = 1.0;       // LogNormal: |X| = exp(sigma Z), random sign

  double draw(Philox4x32& rng) const;
  double mean() const;
  std::string describe() const;
  /// Exact alphabet for discrete samplers, a symmetric quantile grid otherwise.
  Alphabet proxy_alphabet(std::size_t size) const;
  bool is_discrete() const { return kind == SamplerKind::Alphabet || kind == SamplerKind::Rademacher; }

  static Sampler parse(const std::string& name);
};

enum class UStatMode { Exact, Incomplete };

struct UStatOptions {
  UStatMode mode = UStatMode::Exact;
  std::size_t subsets = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// Enumeration beyond this many tuples switches to incomplete sampling.
  double exact_budget = 2e6;
  bool use_fast_path = true;
};

struct UStatPath {
  std::size_t n = 0;
  std::vector<double> values;
  UStatMode mode = UStatMode::Exact;
  std::size_t subsets = 0;
  std::uint64_t seed = 0;
  bool auto_switched = false;
};

UStatPath u_stat(const KernelSpec& kernel, std::span<const double> data, const UStatOptions& opts = {});
/// Same, drawing incomplete-mode tuples from a caller-owned stream.
UStatPath u_stat(const KernelSpec& kernel, std::span<const double> data, const UStatOptions& opts, Philox4x32& rng);

enum class NormConvention { Multiply, Divide };
NormConvention norm_convention_from_string(const std::string& s);
const char* to_string(NormConvention c);

/// n^{r/2} (U_n(t) - E U_n(t)), or the divided form under Divide.
std::vector<double> phi_n(const UStatPath& path, int rank, std::span<const double> mean_per_t,
                          NormConvention convention = NormConvention::Multiply);

struct HoeffdingEntry {
  std::string t_label;
  int degree = 0;
  double mean = 0.0;
  /// Variances of the canonical (degenerate) components, c = 1..d.
  std::vector<double> zetas;
  /// Var h_c(X_1..X_c) with h_c the c-th conditional expectation, c = 1..d.
  std::vector<double> projection_variances;
  /// Smallest c with a non-negligible canonical variance; 0 for a constant kernel.
  int rank = 0;
};

/// Canonical components g_c tabulated on alphabet^c (row-major in the
/// alphabet indices), c = 0..d, with g_0 the mean.
struct CanonicalTerms {
  int degree = 0;
  std::size_t alphabet_size = 0;
  std::vector<double> weights;
  std::vector<std::vector<double>> g;
};

CanonicalTerms canonical_terms(const KernelSpec& kernel, std::size_t t_index);
CanonicalTerms canonical_terms(const KernelSpec& kernel, const Alphabet& alphabet, std::size_t t_index);

HoeffdingEntry hoeffding_decompose(const KernelSpec& kernel, std::size_t t_index, double rank_tol = 1e-10);
HoeffdingEntry hoeffding_decompose(const KernelSpec& kernel, const Alphabet& alphabet, std::size_t t_index,
                                   double rank_tol = 1e-10);

struct VarianceResult {
  double var = 0.0;
  double slope = 0.0;
};

/// Exact Var(U_n) from the projection variances; slope is the log-log
/// regression slope over the doubling grid n, 2n, ..., 16n.
VarianceResult variance_u(const HoeffdingEntry& decomp, std::size_t n);
double variance_u_exact(const HoeffdingEntry& decomp, std::size_t n);
double variance_slope(const HoeffdingEntry& decomp, std::span<const std::size_t> n_grid);

struct RankSummary {
  int rank = 0;
  std::map<int, std::vector<std::string>> partition;
};

RankSummary rank_of(std::span<const HoeffdingEntry> decomps);

enum class MeanSource { Auto, Analytic, GrandMean };

struct PanelOptions {
  UStatMode mode = UStatMode::Exact;
  std::size_t subsets = 0;
  NormConvention convention = NormConvention::Multiply;
  MeanSource mean_source = MeanSource::Auto;
  /// 0 = derive from the Hoeffding decomposition (on the sampler's proxy alphabet).
  int rank = 0;
  std::size_t proxy_alphabet_size = 24;
  unsigned threads = 0;
  double exact_budget = 2e6;
  /// Replication r uses substream r + stream_offset.
  std::uint64_t stream_offset = 0;
};

struct PanelResult {
  FieldSampleMatrix phi;
  /// Raw U_n(t), same layout as phi.
  std::vector<double> u_values;
  std::vector<double> means;
  int rank = 0;
};

/// reps replications of phi_n over the kernel's t grid. Replication r draws
/// its data from Philox stream (seed, r), so output does not depend on
/// thread scheduling.
PanelResult simulate_panel_full(const KernelSpec& kernel, const Sampler& sampler, std::size_t n, std::size_t reps,
                                std::uint64_t seed, const PanelOptions& opts = {});
FieldSampleMatrix simulate_panel(const KernelSpec& kernel, const Sampler& sampler, std::size_t n, std::size_t reps,
                                 std::uint64_t seed, const PanelOptions& opts = {});

}  // namespace ustail

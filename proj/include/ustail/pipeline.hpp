#pragma once

// Experiment orchestration: config resolution and the five pipeline stages.
// Every stage reads its inputs from the output directory and writes its
// artifacts back there, so `run` is exactly the staged sequence.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ustail/bounds.hpp"
#include "ustail/config.hpp"
#include "ustail/ustat.hpp"

namespace ustail {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotCertified = 2;

struct ExperimentConfig {
  Config raw;
  KernelSpec kernel;
  Sampler sampler;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 0;
  std::optional<std::uint64_t> seed;
  std::vector<double> p_grid;
  std::vector<double> eps_grid;
  std::vector<double> u_grid;
  std::optional<PsiFunction> psi;
  int degree = 1;
  PanelOptions panel;
  PsiGridOptions psi_grid;
  CoveringEstimator estimator = CoveringEstimator::Greedy;
  MomentOptions moments;
  bool center = true;
  std::optional<ClosedFormSpec> closed_form;
  bool lower = false;
  double beta = 1.0;
  ExponentConvention exponent = ExponentConvention::OnePlusBeta;
  std::optional<PsiFunction> growth_psi;
  std::filesystem::path output_dir;
  bool svg = false;
};

/// Validates and resolves a config. require_seed rejects configs without
/// experiment.seed (every stage that draws random numbers needs one).
ExperimentConfig resolve_config(const Config& cfg, bool require_seed);

Alphabet parse_alphabet(const std::string& spec, const std::string& context);
KernelSpec read_tabulated_kernel(const std::filesystem::path& path, int degree, const Alphabet& alphabet);

/// Artifact names inside the output directory.
std::filesystem::path field_path(const ExperimentConfig& cfg, std::size_t n);
std::filesystem::path artifact(const ExperimentConfig& cfg, const std::string& name);

/// reps draws of the kernel itself on fresh data (for its natural psi).
FieldSampleMatrix kernel_sample(const KernelSpec& kernel, const Sampler& sampler, std::size_t reps,
                                std::uint64_t seed);

/// Log-spaced thresholds from the median to 1.5x the maximum of a sample.
std::vector<double> auto_u_grid(std::span<const double> sup_values, std::size_t points = 32);

int stage_simulate(const ExperimentConfig& cfg, std::ostream& out);
int stage_entropy(const ExperimentConfig& cfg, std::ostream& out);
int stage_bounds(const ExperimentConfig& cfg, std::ostream& out);
int stage_verify(const ExperimentConfig& cfg, std::ostream& out);
int stage_decompose(const ExperimentConfig& cfg, std::ostream& out);
int run_pipeline(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace ustail

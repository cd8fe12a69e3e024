// ustail: simulate U-statistic fields and compare their sup-tails with
// entropy-based bounds.

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ustail/config.hpp"
#include "ustail/io.hpp"
#include "ustail/metric_entropy.hpp"
#include "ustail/pipeline.hpp"

namespace {

using namespace ustail;

struct Common {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_file, "experiment config file (section.key = value lines)");
  for (const auto& k : config_keys()) cmd->add_option("--" + k.name, c.overrides[k.name], k.help);
}

Config load_config(CLI::App* cmd, const Common& c) {
  Config cfg = c.config_file.empty() ? Config{} : Config::load(c.config_file);
  for (const auto& k : config_keys())
    if (cmd->count("--" + k.name) > 0) cfg.set(k.name, c.overrides.at(k.name), "--" + k.name);
  return cfg;
}

int metric_entropy_table(const std::string& metric_file, const std::string& eps_spec, const Config& cfg) {
  const FiniteMetricSpace space = read_metric_csv(metric_file);
  const std::vector<double> eps = eps_spec.empty() ? default_eps_grid(space) : parse_grid(eps_spec, "--eps");
  std::printf("# |T|=%zu diam=%.12g\n", space.size(), space.diameter());
  std::printf("eps,packing_lower,greedy_upper,exact,N,H\n");
  for (double e : eps) {
    const CoveringBounds cb = covering_bounds(space, e);
    const std::size_t n = cb.exact ? *cb.exact : cb.greedy_upper;
    std::printf("%.12g,%zu,%zu,%s,%zu,%.12g\n", e, cb.packing_lower, cb.greedy_upper,
                cb.exact ? std::to_string(*cb.exact).c_str() : "NA", n, std::log(static_cast<double>(n)));
  }
  if (cfg.has("bound.psi")) {
    const PsiFunction psi = PsiFunction::from_record(cfg.get("bound.psi"));
    bool in_unit = true;
    for (double e : eps) in_unit = in_unit && e > 0.0 && e <= 1.0;
    if (in_unit) {
      const EntropyIntegral ei = entropy_integral(space, psi, eps);
      std::printf("# entropy_integral=%.12g finite=%s plateau_fraction=%.6g\n", ei.value, ei.finite ? "true" : "false",
                  ei.plateau_fraction);
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail bounds for suprema of normalised U-statistic fields"};
  app.require_subcommand(1);

  Common run_c, sim_c, ent_c, bnd_c, ver_c, dec_c;
  auto* run = app.add_subcommand("run", "simulate -> entropy -> bounds -> verify");
  auto* sim = app.add_subcommand("simulate", "write field sample CSVs for every n");
  auto* ent = app.add_subcommand("entropy", "natural psi, distance and entropy integral of field.csv");
  auto* bnd = app.add_subcommand("bounds", "bound report and tail curves from field.csv");
  auto* ver = app.add_subcommand("verify", "compare the empirical sup-tail with the bound curves");
  auto* dec = app.add_subcommand("decompose", "Hoeffding decomposition of the configured kernel");
  add_common(run, run_c);
  add_common(sim, sim_c);
  add_common(ent, ent_c);
  add_common(bnd, bnd_c);
  add_common(ver, ver_c);
  add_common(dec, dec_c);
  std::string metric_file, eps_spec;
  ent->add_option("--metric", metric_file, "distance matrix or points CSV; prints covering numbers instead");
  ent->add_option("--eps", eps_spec, "eps grid for --metric (list or log:lo:hi:count)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (run->parsed()) return run_pipeline(resolve_config(load_config(run, run_c), true), std::cout);
    if (sim->parsed()) return stage_simulate(resolve_config(load_config(sim, sim_c), true), std::cout);
    if (ent->parsed()) {
      const Config cfg = load_config(ent, ent_c);
      if (!metric_file.empty()) return metric_entropy_table(metric_file, eps_spec, cfg);
      return stage_entropy(resolve_config(cfg, false), std::cout);
    }
    if (bnd->parsed()) return stage_bounds(resolve_config(load_config(bnd, bnd_c), false), std::cout);
    if (ver->parsed()) return stage_verify(resolve_config(load_config(ver, ver_c), false), std::cout);
    if (dec->parsed()) return stage_decompose(resolve_config(load_config(dec, dec_c), false), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ustail/io.hpp"
#include "ustail/pipeline.hpp"

using namespace ustail;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ustail_pipe_" + name);
  fs::remove_all(d);
  return d;
}

ExperimentConfig make(const std::string& text, const fs::path& dir, bool require_seed = true) {
  std::istringstream in(text + "experiment.output_dir = " + dir.string() + "\n");
  return resolve_config(Config::parse(in, "test.cfg"), require_seed);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const std::string kBase =
    "experiment.seed = 5\n"
    "experiment.reps = 300\n"
    "experiment.n = 8,12,16\n"
    "kernel.name = param_product\n"
    "kernel.degree = 2\n"
    "kernel.shape = sin\n"
    "kernel.t = lin:0.5:1:4\n"
    "grid.p = lin:2:8:7\n";

}  // namespace

TEST_CASE("missing seed is rejected") {
  CHECK_THROWS_AS(make("experiment.reps = 10\n", fresh_dir("noseed")), std::invalid_argument);
  CHECK_NOTHROW(make("experiment.reps = 10\n", fresh_dir("noseed"), false));
}

TEST_CASE("runs are deterministic and run equals the staged sequence") {
  const fs::path a = fresh_dir("a"), b = fresh_dir("b"), c = fresh_dir("c");
  std::ostringstream sink;
  CHECK(run_pipeline(make(kBase, a), sink) == kExitOk);
  CHECK(run_pipeline(make(kBase, b), sink) == kExitOk);
  const ExperimentConfig cc = make(kBase, c);
  CHECK(stage_simulate(cc, sink) == kExitOk);
  CHECK(stage_entropy(cc, sink) == kExitOk);
  CHECK(stage_bounds(cc, sink) == kExitOk);
  CHECK(stage_verify(cc, sink) == kExitOk);
  for (const char* f : {"field.csv", "field_n8.csv", "moments.csv", "distance.csv", "tail_empirical.csv",
                        "tail_upper.csv", "moment_growth.csv", "comparison.csv", "report.txt"}) {
    INFO(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f) == slurp(c / f));
  }
  const FieldSampleMatrix f = read_field_csv(a / "field.csv");
  CHECK(f.replications() == 300);
  CHECK(f.columns() == 4);
}

TEST_CASE("a single parameter point gives a scalar-degenerate report") {
  const fs::path d = fresh_dir("scalar");
  std::ostringstream sink;
  const std::string cfg =
      "experiment.seed = 3\nexperiment.reps = 400\nexperiment.n = 10\n"
      "kernel.name = product\nkernel.degree = 2\nsampler.name = rademacher\n";
  CHECK(run_pipeline(make(cfg, d), sink) == kExitOk);
  const std::string report = slurp(d / "report.txt");
  CHECK(report.find("scalar_degenerate = true") != std::string::npos);
}

TEST_CASE("stale artifacts are refused") {
  const fs::path d = fresh_dir("stale");
  std::ostringstream sink;
  CHECK(stage_simulate(make(kBase, d), sink) == kExitOk);
  std::string changed = kBase;
  changed.replace(changed.find("experiment.reps = 300"), 21, "experiment.reps = 301");
  CHECK_THROWS_WITH_AS(stage_entropy(make(changed, d), sink), doctest::Contains("stale artifact"), std::runtime_error);
  CHECK_THROWS_WITH_AS(stage_verify(make(kBase, fresh_dir("empty")), sink), doctest::Contains("missing artifact"),
                       std::runtime_error);
}

TEST_CASE("decompose reports the textbook degenerate kernel") {
  const fs::path d = fresh_dir("decomp");
  std::ostringstream out;
  const std::string cfg = "kernel.name = product\nkernel.degree = 2\nsampler.name = rademacher\n";
  CHECK(stage_decompose(make(cfg, d, false), out) == kExitOk);
  CHECK(out.str().find("zeta_1=0 zeta_2=1 rank 2") != std::string::npos);
  CHECK(fs::exists(d / "decompose.csv"));
}

TEST_CASE("config validation names the offending key") {
  const fs::path d = fresh_dir("invalid");
  CHECK_THROWS_WITH(make(kBase + "ustat.mode = partial\n", d), doctest::Contains("test.cfg:9: ustat.mode"));
  CHECK_THROWS_WITH(make(kBase + "bound.estimator = magic\n", d), doctest::Contains("bound.estimator"));
  CHECK_THROWS_AS(make("experiment.seed = 1\nexperiment.n = 1\nkernel.degree = 2\n", d), std::invalid_argument);
  CHECK_THROWS_AS(parse_alphabet("1:0.5;2", "ctx"), std::invalid_argument);
}

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ustail/bounds.hpp"
#include "ustail/gls_empirics.hpp"
#include "ustail/metric_entropy.hpp"
#include "ustail/psi.hpp"
#include "ustail/ustat.hpp"

namespace py = pybind11;
using namespace ustail;

namespace {

FieldSampleMatrix to_field(py::array_t<double, py::array::c_style | py::array::forcecast> values,
                           std::vector<std::string> labels) {
  if (values.ndim() != 2) throw std::invalid_argument("field must be a 2-d array (replications x parameters)");
  const auto reps = static_cast<std::size_t>(values.shape(0));
  const auto cols = static_cast<std::size_t>(values.shape(1));
  if (labels.empty())
    for (std::size_t c = 0; c < cols; ++c) labels.push_back("t" + std::to_string(c));
  std::vector<double> v(values.data(), values.data() + reps * cols);
  return FieldSampleMatrix(std::move(labels), reps, std::move(v));
}

py::dict curve_dict(const TailCurve& c) {
  py::dict d;
  d["kind"] = to_string(c.kind);
  d["u"] = c.u_grid;
  d["prob"] = c.probs;
  d["log_prob"] = c.log_probs;
  d["meta"] = c.meta;
  return d;
}

Sampler make_sampler(const std::string& name, const std::vector<double>& values, const std::vector<double>& weights,
                     double tail_index, double sigma) {
  Sampler s = Sampler::parse(name);
  s.tail_index = tail_index;
  s.sigma = sigma;
  if (s.kind == SamplerKind::Alphabet) {
    s.alphabet = {values, weights};
    s.alphabet.validate();
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tail bounds for suprema of U-statistic fields";

  py::class_<PsiFunction>(m, "Psi")
      .def_static("mr", &PsiFunction::mr, py::arg("m"), py::arg("r"))
      .def_static("beta", &PsiFunction::beta, py::arg("c3"), py::arg("beta"))
      .def_static("const_b", &PsiFunction::const_b, py::arg("c"), py::arg("b"))
      .def_static("tabulated", &PsiFunction::tabulated, py::arg("p"), py::arg("values"))
      .def_static("from_record", &PsiFunction::from_record)
      .def("__call__", &PsiFunction::operator())
      .def("lifted", &PsiFunction::lifted, py::arg("d"))
      .def_property_readonly("support_end", &PsiFunction::support_end)
      .def("to_record", &PsiFunction::to_record)
      .def("__repr__", [](const PsiFunction& p) { return "Psi(" + p.to_record() + ")"; });

  m.def(
      "nu_star",
      [](const PsiFunction& psi, double u, double p_max) { return nu_star(psi, u, {257, p_max}); },
      py::arg("psi"), py::arg("u"), py::arg("p_max") = 64.0);
  m.def(
      "v_inf", [](const PsiFunction& psi, double x, double p_max) { return v_inf(psi, x, {257, p_max}); },
      py::arg("psi"), py::arg("x"), py::arg("p_max") = 64.0);
  m.def(
      "tail_bound",
      [](const PsiFunction& psi, double gnorm, double y, double p_max) { return tail_bound(psi, gnorm, y, {257, p_max}); },
      py::arg("psi"), py::arg("gnorm"), py::arg("y"), py::arg("p_max") = 64.0);
  m.def(
      "gls_norm",
      [](const std::vector<double>& samples, const std::vector<double>& p_grid, const PsiFunction& psi) {
        return gls_norm(empirical_moments(samples, p_grid), psi);
      },
      py::arg("samples"), py::arg("p_grid"), py::arg("psi"));
  m.def(
      "empirical_moments",
      [](const std::vector<double>& samples, const std::vector<double>& p_grid) {
        return empirical_moments(samples, p_grid).values;
      },
      py::arg("samples"), py::arg("p_grid"));

  m.def(
      "covering_bounds",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> dist, double eps) {
        if (dist.ndim() != 2 || dist.shape(0) != dist.shape(1)) throw std::invalid_argument("distance matrix must be square");
        const auto n = static_cast<std::size_t>(dist.shape(0));
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back("t" + std::to_string(i));
        FiniteMetricSpace s(labels, std::vector<double>(dist.data(), dist.data() + n * n));
        const CoveringBounds cb = covering_bounds(s, eps);
        py::dict d;
        d["packing_lower"] = cb.packing_lower;
        d["greedy_upper"] = cb.greedy_upper;
        d["exact"] = cb.exact ? py::cast(*cb.exact) : py::none();
        return d;
      },
      py::arg("dist"), py::arg("eps"));
  m.def(
      "grid_covering",
      [](const std::vector<double>& points, double eps) {
        const CoveringBounds cb = covering_bounds(FiniteMetricSpace::from_points(points), eps);
        return cb.exact ? *cb.exact : cb.greedy_upper;
      },
      py::arg("points"), py::arg("eps"));

  py::class_<KernelSpec>(m, "Kernel")
      .def_static("product", &product_kernel, py::arg("degree"), py::arg("center") = 0.0)
      .def_static("sum", &sum_kernel, py::arg("degree"))
      .def_static("half_sq_diff", &half_sq_diff_kernel)
      .def_static(
          "parametric",
          [](int d, const std::string& shape, const std::vector<double>& t, bool product) {
            return parametric_kernel(d, param_shape_from_string(shape), t, product);
          },
          py::arg("degree"), py::arg("shape"), py::arg("t"), py::arg("product") = true)
      .def_static("constant", &constant_kernel, py::arg("degree"), py::arg("value"))
      .def_readonly("name", &KernelSpec::name)
      .def_readonly("degree", &KernelSpec::degree)
      .def_readonly("t_labels", &KernelSpec::t_labels)
      .def(
          "__call__", [](const KernelSpec& k, const std::vector<double>& xs, std::size_t t) { return k.eval(xs, t); },
          py::arg("xs"), py::arg("t_index") = 0);

  m.def(
      "u_stat",
      [](const KernelSpec& k, const std::vector<double>& data, const std::string& mode, std::size_t subsets,
         std::uint64_t seed) {
        UStatOptions o;
        o.mode = mode == "incomplete" ? UStatMode::Incomplete : UStatMode::Exact;
        o.subsets = subsets;
        o.seed = seed;
        return u_stat(k, data, o).values;
      },
      py::arg("kernel"), py::arg("data"), py::arg("mode") = "exact", py::arg("subsets") = 0, py::arg("seed") = 0);

  m.def(
      "hoeffding_decompose",
      [](const KernelSpec& k, const std::vector<double>& values, const std::vector<double>& weights,
         std::size_t t_index) {
        const HoeffdingEntry e = hoeffding_decompose(k, Alphabet{values, weights}, t_index);
        py::dict d;
        d["mean"] = e.mean;
        d["zetas"] = e.zetas;
        d["projection_variances"] = e.projection_variances;
        d["rank"] = e.rank;
        return d;
      },
      py::arg("kernel"), py::arg("values"), py::arg("weights"), py::arg("t_index") = 0);

  m.def(
      "simulate_panel",
      [](const KernelSpec& k, const std::string& sampler, std::size_t n, std::size_t reps, std::uint64_t seed,
         const std::vector<double>& values, const std::vector<double>& weights, double tail_index, double sigma,
         unsigned threads) {
        PanelOptions o;
        o.threads = threads;
        const FieldSampleMatrix f =
            simulate_panel(k, make_sampler(sampler, values, weights, tail_index, sigma), n, reps, seed, o);
        py::array_t<double> out({f.replications(), f.columns()});
        std::copy(f.values().begin(), f.values().end(), out.mutable_data());
        return out;
      },
      py::arg("kernel"), py::arg("sampler"), py::arg("n"), py::arg("reps"), py::arg("seed"),
      py::arg("values") = std::vector<double>{}, py::arg("weights") = std::vector<double>{},
      py::arg("tail_index") = 3.0, py::arg("sigma") = 1.0, py::arg("threads") = 0u);

  m.def(
      "theorem31_bound",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> field, const std::vector<double>& p_grid,
         int degree, const std::vector<double>& u_grid, std::optional<PsiFunction> psi) {
        Theorem31Options o;
        o.psi = psi;
        const BoundReport r = theorem31_bound(to_field(field, {}), p_grid, degree, u_grid, o);
        py::dict d;
        d["certified"] = r.certified;
        d["verdict"] = to_string(r.verdict);
        d["scalar_degenerate"] = r.scalar_degenerate;
        d["entropy_integral"] = r.entropy.value;
        d["diam"] = r.diam;
        d["sup_norm_gnorm"] = r.sup_norm_gnorm;
        d["psi"] = r.psi_used.to_record();
        d["tau"] = r.tau.to_record();
        py::list curves;
        for (const auto& c : r.curves) curves.append(curve_dict(c));
        d["curves"] = curves;
        return d;
      },
      py::arg("field"), py::arg("p_grid"), py::arg("degree"), py::arg("u_grid"), py::arg("psi") = py::none());

  m.def(
      "lower_bound",
      [](double beta, double c1, double u, const std::string& convention) {
        return lower_bound(beta, c1, u, exponent_convention_from_string(convention));
      },
      py::arg("beta"), py::arg("C1"), py::arg("u"), py::arg("convention") = "1+beta");
}

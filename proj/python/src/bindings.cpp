// Python bindings for the sbddc library.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sbddc/errors.hpp"
#include "sbddc/harness.hpp"

namespace py = pybind11;
using namespace sbddc;

namespace {

ExperimentConfig make_config(const py::dict& kw) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : kw) apply_config_value(cfg, py::str(k), py::str(v));
  return cfg;
}

py::dict aggregate_dict(const Aggregate& a) {
  py::dict d;
  d["included"] = a.included;
  d["excluded"] = a.excluded;
  d["converged"] = a.converged;
  d["spd_ok"] = a.spd_ok;
  d["mean_iterations"] = a.mean_iterations;
  d["mean_cond"] = a.mean_cond;
  d["mean_l2_error"] = a.mean_l2_error;
  d["mean_wall_ms"] = a.mean_wall_ms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic BDDC preconditioners";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<Mesh>(m, "Mesh")
      .def(py::init<int, int>(), py::arg("ns"), py::arg("n"))
      .def_property_readonly("ns", &Mesh::ns)
      .def_property_readonly("n", &Mesh::n)
      .def_property_readonly("num_subdomains", &Mesh::num_subdomains)
      .def_property_readonly("num_nodes", &Mesh::num_nodes)
      .def_property_readonly("num_cells", &Mesh::num_cells);

  py::class_<DofPartition>(m, "DofPartition")
      .def(py::init<const Mesh&>())
      .def_property_readonly("num_free", &DofPartition::num_free)
      .def_property_readonly("num_gamma", &DofPartition::num_gamma)
      .def_property_readonly("num_primal", &DofPartition::num_primal)
      .def_property_readonly("num_dual", &DofPartition::num_dual)
      .def_property_readonly("tilde_size", &DofPartition::tilde_size);

  py::class_<CovarianceSpec>(m, "CovarianceSpec")
      .def(py::init([](double sigma2, double ell) { return CovarianceSpec{sigma2, ell}; }),
           py::arg("sigma2") = 0.5, py::arg("ell") = 1.0)
      .def_readwrite("sigma2", &CovarianceSpec::sigma2)
      .def_readwrite("ell", &CovarianceSpec::ell);

  py::class_<KLBasis>(m, "KLBasis")
      .def_readonly("lambdas", &KLBasis::lambdas)
      .def_readonly("modes", &KLBasis::modes)
      .def_readonly("weights", &KLBasis::weights)
      .def_readonly("total_variance", &KLBasis::total_variance)
      .def_property_readonly("count", &KLBasis::count)
      .def("energy_fraction", &KLBasis::energy_fraction);

  m.def("global_kl", &global_kl, py::arg("mesh"), py::arg("spec"), py::arg("m"));
  m.def("local_kl", &local_kl, py::arg("mesh"), py::arg("s"), py::arg("spec"), py::arg("m"));
  m.def("sample_seed", &sample_seed);
  m.def("sample_xi", [](std::uint64_t seed, int count) { return sample_xi(seed, count).xi; });
  m.def("evaluate_field", &evaluate_field);
  m.def("evaluate_coefficient", &evaluate_coefficient);

  m.def("hermite_eval", &hermite_eval);
  m.def("univariate_triple_product", &univariate_triple_product);
  m.def("lognormal_pc_coeff", &lognormal_pc_coeff);
  m.def("multi_index_count", [](int dims, int d) { return multi_index_set(dims, d)->size(); });

  m.def(
      "run_experiment",
      [](const py::kwargs& kw) {
        ExperimentConfig cfg = make_config(kw);
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        std::ostringstream csv;
        write_csv(csv, r);
        py::dict out;
        out["aggregate"] = aggregate_dict(r.agg);
        out["kl_energy"] = r.kl_energy;
        out["csv"] = csv.str();
        py::list iters;
        for (const auto& s : r.samples) iters.append(s.iterations);
        out["iterations"] = iters;
        return out;
      },
      "Runs one experiment; keyword arguments use the CLI option names.");
}

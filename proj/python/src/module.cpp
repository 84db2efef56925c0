#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>
#include <string>

#include "hyperdg/basis.hpp"
#include "hyperdg/bench.hpp"
#include "hyperdg/config.hpp"
#include "hyperdg/dispersion.hpp"
#include "hyperdg/mapping.hpp"
#include "hyperdg/metrics.hpp"
#include "hyperdg/partition.hpp"
#include "hyperdg/runtime.hpp"
#include "hyperdg/timeint.hpp"
#include "hyperdg/verify.hpp"
#include "hyperdg/vlasov.hpp"

namespace py = pybind11;
using namespace hyperdg;

namespace {

using Settings = std::map<std::string, std::string>;

RunConfig to_config(const Settings& s) {
  RunConfig c;
  for (const auto& [key, value] : s) c.set(key, value);
  c.validate();
  return c;
}

Settings from_config(const RunConfig& c) {
  Settings s;
  for (const auto& key : config_keys()) s[key] = config_value(c, key);
  return s;
}

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict counters_dict(const OpCounters& c) {
  py::dict d;
  d["flops"] = c.flops;
  d["modeled_doubles_moved"] = c.modeled_doubles_moved;
  d["wall_seconds"] = c.wall_seconds;
  d["dofs_processed"] = c.dofs_processed;
  d["flux_evals"] = c.flux_evals;
  d["contraction_sweeps"] = c.contraction_sweeps;
  d["data_sweeps"] = c.data_sweeps;
  d["ghost_updates"] = c.ghost_updates;
  d["dense_fallbacks"] = c.dense_fallbacks;
  d["field_lookups"] = c.field_lookups;
  d["operator_applications"] = c.operator_applications;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hyperdg, m) {
  m.doc() = "High-dimensional matrix-free DG advection and Vlasov-Poisson";

  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  m.def("config_keys", &config_keys);
  m.def(
      "default_config", [] { return from_config(RunConfig{}); }, "Every configuration key with its default value.");
  m.def(
      "normalize_config", [](const Settings& s) { return from_config(to_config(s)); }, py::arg("settings"),
      "Parses and validates settings, returning the full configuration.");
  m.def(
      "dump_config",
      [](const Settings& s) {
        std::ostringstream os;
        dump_config(os, to_config(s));
        return os.str();
      },
      py::arg("settings"));
  m.def("split_dimension", &split_dimension, py::arg("d"));

  m.def(
      "random_vector", [](const Settings& s, unsigned seed) { return to_array(random_global_vector(to_config(s), seed)); },
      py::arg("settings"), py::arg("seed") = 1);
  m.def(
      "apply_operator",
      [](const Settings& s, py::array_t<double, py::array::c_style | py::array::forcecast> x) {
        const std::vector<double> in(x.data(), x.data() + x.size());
        ApplyResult r;
        {
          py::gil_scoped_release release;
          r = apply_operator_global(to_config(s), in);
        }
        return py::make_tuple(to_array(r.output), counters_dict(r.counters));
      },
      py::arg("settings"), py::arg("x"), "One operator application to a global cell-major vector.");

  m.def(
      "run_advection",
      [](const Settings& s) {
        AdvectionResult r;
        {
          py::gil_scoped_release release;
          r = run_advection(to_config(s));
        }
        py::dict d;
        d["initial"] = to_array(r.initial);
        d["final"] = to_array(r.final_state);
        d["t_end"] = r.t_end;
        d["dt"] = r.dt;
        d["n_steps"] = r.n_steps;
        d["l2_error"] = r.l2_error;
        d["initial_l2_error"] = r.initial_l2_error;
        d["mass"] = to_array(r.mass);
        d["counters"] = counters_dict(r.counters);
        d["rhs_evaluations"] = r.rhs_evaluations;
        d["ghost_updates"] = r.ghost_updates;
        return d;
      },
      py::arg("settings"));

  m.def(
      "run_landau",
      [](const Settings& s, double fit_t_min) {
        LandauResult r;
        {
          py::gil_scoped_release release;
          r = run_landau(to_config(s), fit_t_min);
        }
        std::vector<double> t, energy, mass;
        for (const auto& row : r.rows) {
          t.push_back(row.t);
          energy.push_back(row.field_energy);
          mass.push_back(row.total_mass);
        }
        py::dict d;
        d["t"] = to_array(t);
        d["field_energy"] = to_array(energy);
        d["total_mass"] = to_array(mass);
        d["dt"] = r.dt;
        d["n_steps"] = r.n_steps;
        d["gamma"] = r.fit.gamma;
        d["omega"] = r.fit.omega;
        d["fit_valid"] = r.fit.valid;
        d["reference_gamma"] = r.reference.gamma;
        d["reference_omega"] = r.reference.omega;
        return d;
      },
      py::arg("settings"), py::arg("fit_t_min") = 1.0);

  m.def(
      "landau_root",
      [](double kappa) {
        const LandauRoot r = landau_root(kappa);
        return py::make_tuple(r.omega, r.gamma);
      },
      py::arg("kappa"), "(omega, gamma) of the least-damped Landau mode.");

  m.def(
      "verify",
      [](const Settings& s) {
        VerifyReport r;
        {
          py::gil_scoped_release release;
          r = run_verify(to_config(s));
        }
        py::list out;
        for (const auto& c : r.checks) {
          py::dict d;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["value"] = c.value;
          d["tolerance"] = c.tolerance;
          d["detail"] = c.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("settings"));

  m.def(
      "quadrature",
      [](const std::string& kind, int n) {
        const auto r = make_rule(parse_quadrature_kind(kind), n);
        return py::make_tuple(to_array(r.points), to_array(r.weights));
      },
      py::arg("kind"), py::arg("n"), "Points and weights on [0, 1].");

  m.def("total_ghost_lower_bound", &total_ghost_lower_bound, py::arg("d"), py::arg("n_dofs"), py::arg("ranks"));
  m.def("mapping_memory_per_dof",
        [](int k, int d_x, int d_v, const std::string& storage) {
          return mapping_memory_per_dof(k, d_x, d_v, parse_mapping_storage(storage));
        },
        py::arg("k"), py::arg("d_x"), py::arg("d_v"), py::arg("storage"));
  m.def("even_odd_flops_model", &even_odd_flops_model, py::arg("k"));

  m.def(
      "bench",
      [](const Settings& s, int min_applications, double min_seconds) {
        BenchRow r;
        {
          py::gil_scoped_release release;
          r = bench_operator(to_config(s), min_applications, min_seconds);
        }
        py::dict d;
        d["n_dofs"] = r.n_dofs;
        d["applications"] = r.applications;
        d["seconds"] = r.seconds;
        d["throughput"] = r.throughput;
        d["flops_per_dof"] = r.flops_per_dof;
        d["modeled_bytes_per_dof"] = r.modeled_bytes_per_dof;
        d["intensity"] = r.intensity;
        d["working_set"] = r.working_set;
        return d;
      },
      py::arg("settings"), py::arg("min_applications") = 3, py::arg("min_seconds") = 0.2);
}

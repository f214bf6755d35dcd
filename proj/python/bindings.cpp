#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cistab/experiment.hpp"
#include "cistab/simulator.hpp"
#include "cistab/spectral.hpp"
#include "cistab/stability_ranges.hpp"
#include "cistab/trace_constants.hpp"

namespace py = pybind11;
using namespace cistab;

namespace {

ModelParams params(double beta, double lambda, double alpha, const std::string& placement) {
  return {beta, lambda, alpha, placement_from_string(placement)};
}

py::dict interval_dict(const IntensityInterval& iv) {
  py::dict d;
  d["lower"] = iv.lower;
  d["upper"] = iv.upper;
  d["lower_closed"] = iv.lower_closed;
  d["case"] = to_string(iv.theorem_case);
  d["theta"] = iv.theta_used;
  return d;
}

SimConfig sim_config(int n_nodes, double dt, double t_final, std::uint64_t seed, bool linearized,
                     const std::string& scheme) {
  SimConfig c;
  c.n_nodes = n_nodes;
  c.dt = dt;
  c.t_final = t_final;
  c.seed = seed;
  c.linearized = linearized;
  c.scheme = scheme_from_string(scheme);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stability ranges, trace constants and SPDE simulation for the Chafee-Infante problem";
  m.attr("__version__") = CISTAB_VERSION;

  py::register_exception<Error>(m, "CistabError");

  m.def("explicit_constant",
        [](double theta, int dimension, double half_diameter) {
          return explicit_constant(theta, {dimension, half_diameter});
        },
        py::arg("theta"), py::arg("dimension") = 1, py::arg("half_diameter") = 0.5);
  m.def("optimal_constant_1d", &optimal_constant_1d, py::arg("theta"), py::arg("length") = 1.0,
        py::arg("tol") = 1e-13);
  m.def("robin_spectrum_fd", &robin_spectrum_fd, py::arg("theta"), py::arg("length") = 1.0,
        py::arg("n_nodes") = 2000, py::arg("n_modes") = 1);

  m.def("theta_feasible_interval_boundary",
        [](double beta, double lambda, int dimension, double half_diameter) -> py::object {
          const auto r = theta_feasible_interval_boundary({beta, lambda, 0.0},
                                                          {dimension, half_diameter});
          if (!r) return py::none();
          return py::make_tuple(r.value->lower, r.value->upper);
        },
        py::arg("beta"), py::arg("lambda_"), py::arg("dimension") = 1,
        py::arg("half_diameter") = 0.5);

  m.def("boundary_noise_range",
        [](double beta, double lambda, double theta, double c) -> py::object {
          const auto iv = boundary_noise_range({beta, lambda, 0.0}, theta, c);
          return iv ? py::object(interval_dict(*iv)) : py::none();
        },
        py::arg("beta"), py::arg("lambda_"), py::arg("theta"), py::arg("c"));
  m.def("interior_noise_range",
        [](double beta, double lambda, double theta, double c) -> py::object {
          const auto iv = interior_noise_range({beta, lambda, 0.0, NoisePlacement::Interior}, theta, c);
          return iv ? py::object(interval_dict(*iv)) : py::none();
        },
        py::arg("beta"), py::arg("lambda_"), py::arg("theta"), py::arg("c"));

  m.def("optimize_range_over_theta",
        [](double beta, double lambda, const std::string& placement, const std::string& source,
           int n_theta) {
          const auto r = optimize_range_over_theta({beta, lambda, 0.0}, DomainGeometry{},
                                                   placement_from_string(placement),
                                                   constant_source_from_string(source), n_theta);
          py::dict d;
          d["theta_lower"] = r.feasible.lower;
          d["theta_upper"] = r.feasible.upper;
          d["envelope_lower"] = r.envelope_lower;
          d["envelope_upper"] = r.envelope_upper;
          d["connected"] = r.connected;
          return d;
        },
        py::arg("beta"), py::arg("lambda_"), py::arg("placement") = "boundary",
        py::arg("source") = "explicit", py::arg("n_theta") = 2000);

  m.def("quadratic_positivity_oracle",
        [](double a, double b, double alpha_sq, const std::string& convention, double z_max, int n_z) {
          const auto conv = convention == "interior" ? QuadraticConvention::Interior
                                                     : QuadraticConvention::Boundary;
          return quadratic_positivity_oracle(a, b, alpha_sq, conv, z_max, n_z);
        },
        py::arg("a"), py::arg("b"), py::arg("alpha_sq"), py::arg("convention") = "boundary",
        py::arg("z_max") = 1e3, py::arg("n_z") = 10000);

  m.def("mu_roots",
        [](double b, int n_roots) {
          std::vector<double> mus;
          for (const auto& mode : mu_roots(b, n_roots)) mus.push_back(mode.mu);
          return mus;
        },
        py::arg("b"), py::arg("n_roots"));
  m.def("instability_predicate",
        [](double beta, double lambda) {
          const auto r = instability_predicate({beta, lambda, 0.0});
          py::dict d;
          d["unstable"] = r.unstable;
          d["mu1_squared"] = r.mu1_squared;
          d["margin"] = r.margin;
          return d;
        },
        py::arg("beta"), py::arg("lambda_"));

  m.def("run_path",
        [](std::vector<double> u0, double beta, double lambda, double alpha,
           const std::string& placement, int n_nodes, double dt, double t_final,
           std::uint64_t seed, bool linearized, const std::string& scheme, std::uint64_t path) {
          const auto cfg = sim_config(n_nodes, dt, t_final, seed, linearized, scheme);
          PathRecord r;
          {
            py::gil_scoped_release release;
            r = run_path(HState(std::move(u0)), params(beta, lambda, alpha, placement), cfg, path);
          }
          py::dict d;
          d["t"] = r.times;
          d["log_h_norm_sq"] = r.log_h_norm_sq;
          d["lyapunov_estimate"] = r.lyapunov_estimate;
          return d;
        },
        py::arg("u0"), py::arg("beta"), py::arg("lambda_"), py::arg("alpha") = 0.0,
        py::arg("placement") = "boundary", py::arg("n_nodes") = 51, py::arg("dt") = 1e-2,
        py::arg("t_final") = 100.0, py::arg("seed") = 0, py::arg("linearized") = false,
        py::arg("scheme") = "semi_implicit", py::arg("path") = 0);

  m.def("run_command",
        [](const std::string& command, const std::string& config_json) {
          const auto cfg = experiment::config_from_json(nlohmann::json::parse(config_json));
          std::ostringstream log;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = experiment::run_command(command, cfg, log);
          }
          return py::make_tuple(code, log.str());
        },
        py::arg("command"), py::arg("config_json"));
}

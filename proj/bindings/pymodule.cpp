#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "spdelab/config.hpp"
#include "spdelab/drift.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/invariant.hpp"
#include "spdelab/io.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/runner.hpp"
#include "spdelab/spectral.hpp"

namespace py = pybind11;
using namespace spdelab;

namespace {

// Thin handle so python can hold the shared immutable space.
struct PySpace {
    SpacePtr ptr;
};

ExperimentConfig config_from_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config JSON: ") + e.what());
    }
    return ExperimentConfig::from_json(j);
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

py::dict split_to_dict(const DriftSplit& s) {
    py::dict d;
    d["zeta1"] = s.zeta1;
    d["zeta2"] = s.zeta2;
    d["slope"] = s.slope;
    d["intercept"] = s.intercept;
    d["kappa"] = s.kappa;
    d["g2_sup"] = s.g2_sup;
    d["degenerate"] = s.degenerate;
    return d;
}

}  // namespace

PYBIND11_MODULE(spdelab, m) {
    m.doc() =
        "Spectral-Galerkin laboratory for dissipative stochastic reaction-diffusion equations";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<BlowUpError>(m, "BlowUpError");

    py::class_<PySpace>(m, "Space")
        .def(py::init([](double length, int modes, int grid_size, double gamma) {
                 return PySpace{make_space(length, modes, grid_size, gamma)};
             }),
             py::arg("length"), py::arg("modes"), py::arg("grid_size"), py::arg("gamma"))
        .def_property_readonly("length", [](const PySpace& s) { return s.ptr->length(); })
        .def_property_readonly("modes", [](const PySpace& s) { return s.ptr->modes(); })
        .def_property_readonly("grid_size", [](const PySpace& s) { return s.ptr->grid_size(); })
        .def_property_readonly("gamma", [](const PySpace& s) { return s.ptr->gamma(); })
        .def_property_readonly("omega", [](const PySpace& s) { return s.ptr->omega(); })
        .def_property_readonly("c_omega", [](const PySpace& s) { return s.ptr->c_omega(); })
        .def_property_readonly("eigenvalues",
                               [](const PySpace& s) { return to_vec(s.ptr->eigenvalues()); })
        .def("grid_point", [](const PySpace& s, int j) { return s.ptr->grid_point(j); })
        .def("to_grid",
             [](const PySpace& s, const std::vector<double>& coeffs) {
                 std::vector<double> values(static_cast<std::size_t>(s.ptr->grid_size()));
                 s.ptr->to_grid(coeffs, values);
                 return values;
             })
        .def("from_grid",
             [](const PySpace& s, const std::vector<double>& values) {
                 std::vector<double> coeffs(static_cast<std::size_t>(s.ptr->modes()));
                 s.ptr->from_grid(values, coeffs);
                 return coeffs;
             })
        .def("norm",
             [](const PySpace& s, const std::vector<double>& coeffs, double g) {
                 return SpectralField(s.ptr, coeffs).norm(g);
             },
             py::arg("coeffs"), py::arg("gamma"))
        .def("semigroup",
             [](const PySpace& s, const std::vector<double>& coeffs, double t) {
                 return to_vec(semigroup_apply(SpectralField(s.ptr, coeffs), t).coeffs());
             });

    m.def("split_drift",
          [](const std::vector<double>& coefficients) {
              return split_to_dict(split_drift(OddPolynomial(coefficients)));
          },
          py::arg("coefficients"),
          "Decompose an odd reaction polynomial into a nonincreasing part plus a "
          "Lipschitz remainder; coefficients[k] multiplies t^(k+1).");

    m.def("rho_certificate",
          [](const std::vector<double>& coefficients, double length) {
              const RhoBound r = rho_certificate(OddPolynomial(coefficients), length);
              py::dict d;
              d["half_degree"] = r.half_degree;
              d["C"] = r.C;
              d["C_sharp"] = r.C_sharp;
              d["C_young"] = r.C_young;
              return d;
          },
          py::arg("coefficients"), py::arg("length"));

    m.def("k_lambda",
          [](const std::vector<double>& coefficients, double length, double lam) {
              return rho_certificate(OddPolynomial(coefficients), length).k_lambda(lam);
          },
          py::arg("coefficients"), py::arg("length"), py::arg("lam"));

    m.def("compute_a",
          [](const std::vector<double>& coefficients, double r) {
              return compute_a(OddPolynomial(coefficients), r);
          },
          py::arg("coefficients"), py::arg("r"),
          "Sup-norm growth modulus of the reaction term.");

    m.def("nemytskii",
          [](const PySpace& s, const std::vector<double>& coefficients,
             const std::vector<double>& u_coeffs) {
              return to_vec(
                  nemytskii_F(OddPolynomial(coefficients), SpectralField(s.ptr, u_coeffs))
                      .coeffs());
          },
          py::arg("space"), py::arg("coefficients"), py::arg("u_coeffs"));

    m.def("ou_oracle",
          [](const PySpace& s, const std::vector<double>& weights) {
              return ou_oracle(*s.ptr, weights);
          },
          py::arg("space"), py::arg("weights"),
          "Exact stationary mode variances of the linear equation with additive "
          "diagonal noise.");

    m.def("preset_names", [] { return ExperimentConfig::preset_names(); });
    m.def("preset",
          [](const std::string& name) {
              return dump_json_17(ExperimentConfig::preset(name).to_json());
          },
          py::arg("name"), "Canonical JSON text of a shipped parameter set.");
    m.def("canonical_config",
          [](const std::string& text) {
              return dump_json_17(config_from_text(text).to_json());
          },
          py::arg("config_json"),
          "Parse, validate, and re-serialize a config (fixed key order, 17 "
          "significant digits).");

    m.def("simulate",
          [](const std::string& config_json, int recorded_modes) {
              const ExperimentConfig cfg = config_from_text(config_json);
              const SpacePtr space = cfg.make_space();
              const Trajectory traj =
                  simulate(cfg.make_sim_params(0), cfg.make_drift(), cfg.make_noise(),
                           cfg.make_x0(space), recorded_modes);
              py::dict d;
              d["times"] = traj.times;
              d["norm0"] = traj.norm0;
              d["norm_gamma"] = traj.norm_gamma;
              d["modes"] = traj.modes;  // row-major (steps+1) x recorded_modes
              d["recorded_modes"] = traj.recorded_modes;
              return d;
          },
          py::arg("config_json"), py::arg("recorded_modes") = 4);

    m.def("run_experiment",
          [](const std::string& verb, const std::string& config_json, const std::string& out_dir,
             bool quiet) {
              Runner runner(config_from_text(config_json), out_dir, quiet);
              const RunOutcome outcome = runner.run(verb);
              py::dict d;
              d["exit_code"] = outcome.exit_code;
              d["verdict"] = outcome.verdict;
              d["report_json"] = dump_json_17(outcome.report);
              return d;
          },
          py::arg("verb"), py::arg("config_json"), py::arg("out_dir"), py::arg("quiet") = true,
          "Execute one CLI verb, writing all artifacts under out_dir.");
}

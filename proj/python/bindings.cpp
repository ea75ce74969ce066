#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gwd/dynamics.hpp"
#include "gwd/heat.hpp"
#include "gwd/mobility.hpp"
#include "gwd/oracle.hpp"
#include "gwd/solver.hpp"

namespace py = pybind11;
using namespace gwd;

namespace {

py::dict diagnostics(const SolverResult& r)
{
  py::dict d;
  d["distance"] = r.distance;
  d["action"] = r.action;
  d["status"] = to_string(r.status);
  d["iterations"] = r.iterations;
  d["residual"] = r.residual;
  d["mass_gap"] = r.mass_gap;
  d["ce_residual"] = r.ce_residual;
  d["mass_trace"] = mass_trace(r.geodesic);
  return d;
}

}  // namespace

PYBIND11_MODULE(gwdpy, m)
{
  m.doc() = "Generalized Wasserstein distances with concave mobility";

  py::class_<MobilitySpec>(m, "Mobility")
      .def_static("quadratic", &MobilitySpec::quadratic, py::arg("a") = 0.0, py::arg("b") = 1.0,
                  py::arg("scale") = 1.0)
      .def_static("power", &MobilitySpec::power, py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("beta"),
                  py::arg("scale") = 1.0)
      .def_static("linear", &MobilitySpec::linear, py::arg("a"), py::arg("b"), py::arg("scale") = 1.0)
      .def_static("tabulated", &MobilitySpec::tabulated, py::arg("a"), py::arg("b"), py::arg("values"))
      .def("__call__", &MobilitySpec::operator())
      .def_property_readonly("lower", &MobilitySpec::lower)
      .def_property_readonly("upper", &MobilitySpec::upper)
      .def_property_readonly("kind", [](const MobilitySpec& h) { return to_string(h.kind()); });

  py::class_<ActionDensity>(m, "ActionDensity")
      .def(py::init<double, MobilitySpec>(), py::arg("p"), py::arg("mobility"))
      .def_property_readonly("p", &ActionDensity::p)
      .def_property_readonly("q", &ActionDensity::q)
      .def_property_readonly("mobility", &ActionDensity::mobility);

  m.def("eval_action",
        [](const ActionDensity& phi, double rho, const std::vector<double>& w) { return eval_action(phi, rho, w); },
        py::arg("phi"), py::arg("rho"), py::arg("w"));
  m.def("eval_conjugate",
        [](const ActionDensity& phi, double rho, const std::vector<double>& z) { return eval_conjugate(phi, rho, z); },
        py::arg("phi"), py::arg("rho"), py::arg("z"));

  py::class_<Grid>(m, "Grid")
      .def_static("uniform", &Grid::uniform, py::arg("d"), py::arg("lo"), py::arg("hi"), py::arg("cells"))
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("cell_count", &Grid::cell_count)
      .def("center", &Grid::center);

  py::class_<ReferenceMeasure>(m, "Reference")
      .def_static("lebesgue", &ReferenceMeasure::lebesgue)
      .def_static("from_weights", &ReferenceMeasure::from_weights)
      .def_property_readonly("grid", &ReferenceMeasure::grid)
      .def_property_readonly("weights",
                             [](const ReferenceMeasure& r) {
                               return std::vector<double>(r.weights().begin(), r.weights().end());
                             });

  py::class_<GridMeasure>(m, "Measure")
      .def(py::init<ReferenceMeasure, std::vector<double>>(), py::arg("reference"), py::arg("density"))
      .def_property_readonly("density",
                             [](const GridMeasure& mu) {
                               return std::vector<double>(mu.density().begin(), mu.density().end());
                             })
      .def_property_readonly("reference", &GridMeasure::reference)
      .def("mass", [](const GridMeasure& mu) { return total_mass(mu); });

  m.def("mollify", &mollify, py::arg("mu"), py::arg("eps"));
  m.def("wasserstein_1d", &wasserstein_1d, py::arg("mu0"), py::arg("mu1"), py::arg("p") = 2.0);
  m.def("c_pd_constant", &c_pd_constant, py::arg("p"), py::arg("d"));
  m.def("dilation_exponent", &dilation_exponent, py::arg("p"), py::arg("d"));
  m.def("comparison_constant", &comparison_constant, py::arg("h"), py::arg("m_prime"), py::arg("p"));

  m.def(
      "distance",
      [](const GridMeasure& mu0, const GridMeasure& mu1, const ActionDensity& phi, int time_steps, double tolerance,
         int max_iterations) {
        SolverConfig cfg;
        cfg.time_steps = time_steps;
        cfg.tolerance = tolerance;
        cfg.max_iterations = max_iterations;
        SolverResult r = [&] {
          py::gil_scoped_release release;
          return compute_distance(mu0, mu1, phi, cfg);
        }();
        return diagnostics(r);
      },
      py::arg("mu0"), py::arg("mu1"), py::arg("phi"), py::arg("time_steps") = 16, py::arg("tolerance") = 1e-7,
      py::arg("max_iterations") = 50000);

  m.def(
      "two_cell_exact",
      [](std::pair<double, double> rho0, std::pair<double, double> rho1, const MobilitySpec& h, double p,
         int time_steps, double weight_left, double weight_right) {
        TwoCellInstance inst{rho0, rho1};
        inst.mobility = h;
        inst.p = p;
        inst.time_steps = time_steps;
        inst.weight_left = weight_left;
        inst.weight_right = weight_right;
        return two_cell_exact(inst);
      },
      py::arg("rho0"), py::arg("rho1"), py::arg("mobility") = MobilitySpec::quadratic(), py::arg("p") = 2.0,
      py::arg("time_steps") = 8, py::arg("weight_left") = 1.0, py::arg("weight_right") = 1.0);

  m.def(
      "heat_decay",
      [](const GridMeasure& rho0, double T, double dt) {
        const HeatTrajectory traj = solve_neumann_heat(rho0, T, dt);
        const DecayReport r = decay_report(traj);
        py::dict d;
        d["l2_rate"] = r.l2_rate ? py::cast(*r.l2_rate) : py::none();
        d["linf_rate"] = r.linf_rate ? py::cast(*r.linf_rate) : py::none();
        d["gradient_ratio"] = r.gradient_ratio;
        d["l2_gap"] = r.l2_gap;
        d["mean"] = traj.mean();
        return d;
      },
      py::arg("rho0"), py::arg("T"), py::arg("dt") = 1e-3);
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "obell/bounds.hpp"
#include "obell/cli.hpp"
#include "obell/experiment.hpp"
#include "obell/lhv.hpp"
#include "obell/quantum.hpp"
#include "obell/serialize.hpp"

namespace py = pybind11;
using namespace obell;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::handle& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

MeasurementSetting setting(const Vec3& v) { return make_setting(v); }

py::dict report(const BoundReport& r) {
  py::dict d;
  d["classical_bound"] = r.classical_bound;
  d["quantum_bound"] = r.quantum_bound;
  d["fraction"] = r.fraction;
  return d;
}

py::dict oracle(const OracleMaximum& r) {
  py::dict d;
  d["maximum"] = r.maximum.str();
  d["maximum_value"] = r.maximum.to_double();
  d["bound"] = r.bound.str();
  d["bound_value"] = r.bound.to_double();
  d["atoms"] = r.atoms;
  d["configurations"] = r.configurations;
  d["witness"] = to_python(to_json(r.witness));
  return d;
}

}  // namespace

PYBIND11_MODULE(obell, m) {
  m.doc() = "Original Bell inequality: bounds, optimizers, LHV oracles and simulation";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<OptimizerShortfall>(m, "OptimizerShortfall", PyExc_RuntimeError);

  // bounds
  m.def("ob_bounds", [] { return report(ob_bounds()); });
  m.def("chsh_bounds", [] { return report(chsh_bounds()); });
  m.def("theorem2_bound", py::overload_cast<double>(&theorem2_bound), py::arg("epsilon"));
  m.def("theorem3_bound", py::overload_cast<double>(&theorem3_bound), py::arg("eta"));
  m.def(
      "theorem4_bound", [](double epsilon, double eta) { return theorem4_bound(NoiseParameters(epsilon, eta)); },
      py::arg("epsilon"), py::arg("eta"));
  m.def("theorem4_bound_gamma", &theorem4_bound_gamma, py::arg("gamma"), py::arg("eta"));
  m.def(
      "violation_feasible",
      [](double gamma, double eta) { return violation_feasible(NoiseParameters::from_gamma(gamma, eta)); },
      py::arg("gamma"), py::arg("eta"));
  m.def("white_noise_quantum_value", &white_noise_quantum_value, py::arg("gamma"));
  m.def(
      "feasibility_grid",
      [](std::pair<double, double> gamma, std::pair<double, double> eta, double step) {
        py::list rows;
        for (const auto& r : feasibility_grid({gamma.first, gamma.second}, {eta.first, eta.second}, step)) {
          py::dict d;
          d["gamma"] = r.gamma;
          d["eta"] = r.eta;
          d["bound"] = r.bound;
          d["feasible"] = r.feasible;
          rows.append(d);
        }
        return rows;
      },
      py::arg("gamma_range"), py::arg("eta_range"), py::arg("step"));

  // quantum
  m.def(
      "singlet_correlation", [](const Vec3& a, const Vec3& b) { return singlet_correlation(setting(a), setting(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "delta_q", [](const Vec3& a, const Vec3& b, const Vec3& c) { return delta_q({setting(a), setting(b), setting(c)}); },
      py::arg("a"), py::arg("b"), py::arg("c"));
  m.def(
      "delta_q_parametrized",
      [](double phi1, double phi2, double theta) { return delta_q_parametrized({phi1, phi2, theta}); },
      py::arg("phi1"), py::arg("phi2"), py::arg("theta"));
  m.def("chsh_statistic", &chsh_statistic);
  m.def(
      "maximize_delta_q",
      [](double tolerance, std::size_t grid_points) {
        OptimizerOptions o;
        o.grid_points = grid_points;
        const auto r = maximize_delta_q(tolerance, o);
        py::dict d;
        d["value"] = r.value;
        d["settings"] = to_python(to_json(r.settings));
        d["angles"] = py::make_tuple(r.angles.phi1, r.angles.phi2, r.angles.theta);
        return d;
      },
      py::arg("tolerance") = 1e-6, py::arg("grid_points") = 64);
  m.def(
      "maximize_chsh",
      [](double tolerance, std::size_t grid_points) {
        OptimizerOptions o;
        o.grid_points = grid_points;
        const auto r = maximize_chsh(tolerance, o);
        py::dict d;
        d["value"] = r.value;
        d["settings"] = to_python(to_json(r.settings));
        return d;
      },
      py::arg("tolerance") = 1e-6, py::arg("grid_points") = 64);

  // lhv
  m.def(
      "classical_ob_maximum",
      [](bool perfect, const std::string& pattern) {
        const auto r = classical_ob_maximum(perfect, parse_pattern(pattern));
        py::dict d;
        d["maximum"] = r.maximum.str();
        d["strategies"] = r.strategies;
        py::list values;
        for (const auto& v : r.values) values.append(v.str());
        d["values"] = values;
        d["witness"] = to_python(to_json(r.witness));
        return d;
      },
      py::arg("perfect_anticorrelation") = true, py::arg("pattern") = "standard");
  m.def(
      "epsilon_ob_maximum",
      [](double epsilon, std::size_t atoms, const std::string& pattern) {
        return oracle(epsilon_ob_maximum(epsilon, atoms, parse_pattern(pattern)));
      },
      py::arg("epsilon"), py::arg("atoms"), py::arg("pattern") = "standard");
  m.def(
      "detection_ob_maximum",
      [](double eta, std::size_t atoms, const std::string& pattern) {
        return oracle(detection_ob_maximum(eta, atoms, parse_pattern(pattern)));
      },
      py::arg("eta"), py::arg("atoms"), py::arg("pattern") = "detection");
  m.def(
      "model_correlations",
      [](const py::object& model, bool conditional) {
        const auto hv = model_from_json(from_python(model));
        const auto t = conditional ? lhv_conditional_correlations(hv) : lhv_correlations(hv);
        return py::make_tuple(t.p_ab, t.p_ac, t.p_bc);
      },
      py::arg("model"), py::arg("conditional") = false);

  // experiment
  m.def(
      "run_experiment",
      [](const py::object& config, std::size_t threads) {
        const auto spec = spec_from_config(from_python(config));
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(spec, threads);
        }
        return to_python(to_json(r));
      },
      py::arg("config"), py::arg("threads") = 0);

  // command line, in process
  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "obell");
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}

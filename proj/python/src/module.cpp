#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "strictlyap/cli.hpp"
#include "strictlyap/examples.hpp"

namespace py = pybind11;
using namespace strictlyap;

namespace {

RunOptions run_options(double alpha, std::uint64_t seed, int n_initial, std::optional<double> t_end) {
  RunOptions o;
  o.alpha = alpha;
  o.seed = seed;
  o.n_initial = n_initial;
  o.t_end = t_end;
  return o;
}

py::tuple simulate(const ExampleBundle& b, double alpha, const Vector& x0, double t_end) {
  const auto traj = integrate(b.sys, alpha, x0, 0.0, t_end);
  Matrix states(static_cast<Eigen::Index>(traj.size()), b.sys.dim);
  for (std::size_t i = 0; i < traj.size(); ++i) states.row(static_cast<Eigen::Index>(i)) = traj.states[i].transpose();
  const Vector times = Eigen::Map<const Vector>(traj.times.data(), static_cast<Eigen::Index>(traj.times.size()));
  return py::make_tuple(times, states);
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"strictlyap"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Strict Lyapunov constructions and falsification checks";
  m.attr("__version__") = STRICTLYAP_VERSION;
  m.attr("artifact_version") = kArtifactVersion;

  py::register_exception<DivergenceError>(m, "DivergenceError");
  py::register_exception<QuadratureError>(m, "QuadratureError");

  py::class_<SamplePoint>(m, "SamplePoint")
      .def_readonly("state", &SamplePoint::state)
      .def_readonly("t", &SamplePoint::t)
      .def_readonly("aux", &SamplePoint::aux);

  py::class_<CertificateReport>(m, "CertificateReport")
      .def_readonly("check_name", &CertificateReport::check_name)
      .def_readonly("passed", &CertificateReport::passed)
      .def_readonly("worst_margin", &CertificateReport::worst_margin)
      .def_readonly("worst_point", &CertificateReport::worst_point)
      .def_readonly("samples_total", &CertificateReport::samples_total)
      .def_readonly("tolerance", &CertificateReport::tolerance)
      .def_readonly("diagnostic", &CertificateReport::diagnostic)
      .def_readonly("parts", &CertificateReport::parts)
      .def("__repr__", [](const CertificateReport& r) {
        return "<CertificateReport " + r.check_name + (r.passed ? " passed>" : " failed>");
      });

  py::class_<ConstructedLyapunov>(m, "ConstructedLyapunov")
      .def("__call__", &ConstructedLyapunov::operator(), py::arg("x"), py::arg("t"))
      .def("grad_x", &ConstructedLyapunov::grad_x, py::arg("x"), py::arg("t"))
      .def("dt", &ConstructedLyapunov::dt, py::arg("x"), py::arg("t"))
      .def_property_readonly("alpha", &ConstructedLyapunov::alpha)
      .def_property_readonly("construction",
                             [](const ConstructedLyapunov& L) { return std::string(to_string(L.construction())); });

  py::class_<ExampleBundle>(m, "Bundle")
      .def_readonly("name", &ExampleBundle::name)
      .def_readonly("description", &ExampleBundle::description)
      .def_property_readonly("dim", [](const ExampleBundle& b) { return b.sys.dim; })
      .def_property_readonly("route", [](const ExampleBundle& b) { return std::string(to_string(b.route)); })
      .def_readonly("expected", &ExampleBundle::expected)
      .def_readonly("notes", &ExampleBundle::notes)
      .def_readonly("preconditions", &ExampleBundle::preconditions)
      .def_readonly("alpha_default", &ExampleBundle::alpha_default)
      .def_readonly("alpha_floor", &ExampleBundle::alpha_floor)
      .def_readonly("t_end", &ExampleBundle::t_end)
      .def("f", [](const ExampleBundle& b, const Vector& x, double t, double tau) { return b.sys.f(x, t, tau); },
           py::arg("x"), py::arg("t"), py::arg("tau"))
      .def("V", [](const ExampleBundle& b, const Vector& x, double t) { return b.V.value(x, t); }, py::arg("x"),
           py::arg("t"))
      .def("lyapunov", [](const ExampleBundle& b, double alpha) { return b.builder(alpha); }, py::arg("alpha"))
      .def("applies", &check_applies, py::arg("check"))
      .def("initial_conditions", &bundle_initial_conditions, py::arg("count"), py::arg("seed") = 42)
      .def(
          "run_check",
          [](const ExampleBundle& b, const std::string& check, double alpha, std::uint64_t seed, int n_initial,
             std::optional<double> t_end) { return run_check(b, check, run_options(alpha, seed, n_initial, t_end)); },
          py::arg("check"), py::arg("alpha"), py::arg("seed") = 42, py::arg("n_initial") = 10,
          py::arg("t_end") = py::none())
      .def("simulate", &simulate, py::arg("alpha"), py::arg("x0"), py::arg("t_end"));

  m.def("list_bundles", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& info : list_bundles()) out.emplace_back(info.name, info.description);
    return out;
  });
  m.def("make_bundle", &make_bundle, py::arg("name"));
  m.def("custom_bundle_from_json", &custom_bundle_from_json, py::arg("text"));
  m.def("load_custom_bundle", &load_custom_bundle, py::arg("path"));
  m.def("report_line", &cli::report_line, py::arg("bundle"), py::arg("alpha"), py::arg("seed"), py::arg("report"));
  m.def(
      "double_time_integral",
      [](const std::function<double(double)>& p, double t, double tau) { return double_time_integral_scalar(p, t, tau); },
      py::arg("p"), py::arg("t"), py::arg("tau"));
  m.def("run_cli", &run_cli, py::arg("args"), "Runs one CLI command line; returns (exit_code, stdout, stderr).");
}

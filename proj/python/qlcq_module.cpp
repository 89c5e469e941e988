#include "qlcq/asymptotics.hpp"
#include "qlcq/cli_reports.hpp"
#include "qlcq/errors.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

qlcq::RunConfig config_from(const std::string& mode, const std::string& config_json) {
  qlcq::RunConfig c;
  qlcq::apply_config_json(c, nlohmann::json::parse(config_json));
  c.mode = mode;
  return c;
}

qlcq::SpacetimeParams params_from(double mass, double spin, double rapidity, const Eigen::Vector3d& translation) {
  qlcq::SpacetimeParams p;
  p.mass = mass;
  p.spin = spin;
  p.rapidity = rapidity;
  p.translation = translation;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "quasi-local energy, angular momentum and center of mass";

  auto base = py::register_exception<qlcq::Error>(m, "QlcqError", PyExc_RuntimeError);
  py::register_exception<qlcq::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<qlcq::GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<qlcq::SolverError>(m, "SolverError", base.ptr());

  m.def("catalog_names", &qlcq::catalog_names);

  // mode is compute, sweep, embed or validate; the config uses the CLI layout
  m.def(
      "run_json",
      [](const std::string& mode, const std::string& config_json) {
        qlcq::RunConfig c;
        try {
          c = config_from(mode, config_json);
        } catch (const nlohmann::json::exception& e) {
          throw qlcq::ValidationError(std::string("config is not valid JSON: ") + e.what());
        }
        py::gil_scoped_release release;
        return qlcq::to_json_text(qlcq::run(c));
      },
      py::arg("mode"), py::arg("config_json"));

  m.def(
      "komar_angular_momentum",
      [](const std::string& spacetime, double radius, double mass, double spin, int band_limit) {
        auto st = qlcq::catalog_get(spacetime, params_from(mass, spin, 0.0, Eigen::Vector3d::Zero()));
        return qlcq::komar_angular_momentum(*st, *st->coordinate_sphere(radius), qlcq::make_grid(band_limit));
      },
      py::arg("spacetime"), py::arg("radius"), py::arg("mass") = 1.0, py::arg("spin") = 0.0,
      py::arg("band_limit") = 16);

  m.def(
      "quasi_local",
      [](const std::string& spacetime, double radius, double mass, double spin, double rapidity,
         const Eigen::Vector3d& translation, int band_limit, double tol) {
        auto st = qlcq::catalog_get(spacetime, params_from(mass, spin, rapidity, translation));
        qlcq::OIEOptions o;
        o.tolerance = tol;
        qlcq::QuasiLocalResult q;
        {
          py::gil_scoped_release release;
          q = qlcq::quasi_local(*st, *st->coordinate_sphere(radius), radius, qlcq::make_grid(band_limit), o);
        }
        py::dict d;
        d["radius"] = q.radius;
        d["energy"] = q.energy;
        d["mass"] = q.rest.m;
        d["p"] = Eigen::Vector4d(q.rest.p);
        d["Phi"] = Eigen::Matrix4d(q.rest.Phi);
        d["J"] = Eigen::Vector3d(q.jc.J);
        d["C"] = Eigen::Vector3d(q.jc.C);
        d["residual"] = q.residual;
        d["iterations"] = q.iterations;
        d["tau"] = Eigen::VectorXd(q.tau);
        return d;
      },
      py::arg("spacetime"), py::arg("radius"), py::arg("mass") = 1.0, py::arg("spin") = 0.0,
      py::arg("rapidity") = 0.0, py::arg("translation") = Eigen::Vector3d::Zero().eval(), py::arg("band_limit") = 16,
      py::arg("tol") = 1e-10);
}

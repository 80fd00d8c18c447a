#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli/config.hpp"
#include "cli/io.hpp"
#include "cli/pipeline.hpp"
#include "mgle/catalogue.hpp"
#include "mgle/error.hpp"
#include "mgle/linops.hpp"
#include "mgle/mori.hpp"
#include "mgle/orthdyn.hpp"
#include "mgle/trajectory.hpp"
#include "mgle/volterra.hpp"

namespace py = pybind11;
using namespace mgle;

namespace {

py::dict to_dict(const CheckResult& r) {
  py::dict d;
  d["name"] = r.name;
  d["status"] = to_string(r.status);
  d["max_deviation"] = r.max_deviation;
  d["tolerance"] = r.tolerance;
  d["t"] = r.t ? py::cast(*r.t) : py::none();
  d["s"] = r.s ? py::cast(*r.s) : py::none();
  d["note"] = r.note;
  return d;
}

hilbert::Space coordinate_space(std::size_t n, const std::optional<Matrix>& weight) {
  return weight ? hilbert::Space::coordinate(*weight) : hilbert::Space::coordinate_identity(n);
}

volterra::Series series(const Eigen::VectorXcd& v, double dt) {
  return {volterra::TimeGrid(0.0, dt, static_cast<std::size_t>(v.size())), v};
}

Eigen::VectorXd nodes(const volterra::TimeGrid& g) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(g.count));
  for (std::size_t k = 0; k < g.count; ++k) t[static_cast<Eigen::Index>(k)] = g.node(k);
  return t;
}

py::dict gle(const Matrix& L, const Vector& z, double t_max, double dt, const std::optional<Matrix>& weight) {
  const linops::OperatorModel model(coordinate_space(static_cast<std::size_t>(L.rows()), weight), L);
  const mori::MatrixDynamics dyn(model, z, volterra::TimeGrid::span(t_max, dt));
  const mori::GleIngredients ing = mori::assemble(dyn);
  py::dict d;
  d["t"] = nodes(dyn.grid());
  d["omega"] = ing.omega;
  d["K"] = ing.K.values;
  d["C"] = ing.C.values;
  d["eta"] = ing.eta.frames;
  d["residual"] = to_dict(mori::verify_gle(dyn, ing, 1e-3));
  return d;
}

py::dict oscillator(double omega, double beta, std::size_t samples, std::uint64_t seed, double t_max, double dt) {
  namespace tj = trajectory;
  const tj::SystemSpec spec = tj::catalogue::harmonic_oscillator(omega, beta);
  const auto grid = volterra::TimeGrid::span(t_max, dt);
  auto ens = std::make_shared<const tj::TrajectoryEnsemble>(
      tj::integrate_flow(spec, tj::sample_initial(spec, samples, seed).states, grid, 10, seed));
  const tj::EnsembleDynamics dyn(ens, spec);
  const mori::GleIngredients ing = mori::assemble(dyn);
  py::dict d;
  d["t"] = nodes(grid);
  d["omega"] = ing.omega;
  d["K"] = ing.K.values;
  d["C"] = ing.C.values;
  return d;
}

py::dict run(const std::string& config, const std::optional<std::string>& out, const std::vector<std::string>& checks) {
  app::RunConfig cfg = app::load_config(config);
  if (!checks.empty()) cfg.checks = checks;
  app::validate(cfg);
  app::RunResult res;
  {
    py::gil_scoped_release release;
    res = app::execute(cfg);
  }
  const int code = app::exit_code(res.checks);
  if (out) {
    std::filesystem::create_directories(*out);
    app::DirectoryLock lock(*out);
    app::write_artifacts(*out, res);
    app::write_report(*out, res.checks, app::environment(cfg), code);
  }
  py::list list;
  for (const auto& c : res.checks) list.append(to_dict(c));
  py::dict d;
  d["exit_code"] = code;
  d["checks"] = list;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mgle, m) {
  m.doc() = "Memory kernels and fluctuating forces of projected linear dynamics";

  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<app::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<AccuracyError>(m, "AccuracyError", base.ptr());
  py::register_exception<ConstructionError>(m, "ConstructionError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

  m.def("expm", &linops::expm, py::arg("A"), "Matrix exponential (scaling and squaring, Pade 13).");
  m.def(
      "adjoint",
      [](const Matrix& weight, const Matrix& A) { return linops::adjoint(hilbert::Space::coordinate(weight), A); },
      py::arg("weight"), py::arg("A"), "W^{-1} A^H W");

  m.def(
      "solve_convolution",
      [](const Eigen::VectorXcd& g, const Eigen::VectorXcd& h, double dt) {
        return volterra::solve_convolution(series(g, dt), series(h, dt)).values;
      },
      py::arg("g"), py::arg("h"), py::arg("dt"), "K(t) = g(t) - int_0^t K(t-s) h(s) ds on a uniform grid from 0.");
  m.def(
      "convolve",
      [](const Eigen::VectorXcd& K, const Eigen::VectorXcd& C, double dt) {
        return volterra::convolve(series(K, dt), series(C, dt)).values;
      },
      py::arg("K"), py::arg("C"), py::arg("dt"));

  m.def("gle", &gle, py::arg("generator"), py::arg("z"), py::arg("t_max"), py::arg("dt"),
        py::arg("weight") = std::nullopt,
        "Drift, memory kernel, autocorrelation and fluctuating forces of a matrix model.");
  m.def(
      "check_dyson",
      [](const Matrix& L, const Vector& z, double t_max, double dt, const std::optional<Matrix>& weight) {
        const linops::OperatorModel model(coordinate_space(static_cast<std::size_t>(L.rows()), weight), L);
        return to_dict(orthdyn::check_dyson(model, mori::MoriProjection(model.space(), z),
                                            volterra::TimeGrid::span(t_max, dt)));
      },
      py::arg("generator"), py::arg("z"), py::arg("t_max"), py::arg("dt"), py::arg("weight") = std::nullopt);
  m.def("oscillator", &oscillator, py::arg("omega") = 2.0, py::arg("beta") = 1.0, py::arg("samples") = 20000,
        py::arg("seed") = 42, py::arg("t_max") = 5.0, py::arg("dt") = 1e-2,
        "Kernel of the harmonic oscillator estimated from a sampled trajectory ensemble.");
  m.def("run", &run, py::arg("config"), py::arg("out") = std::nullopt, py::arg("checks") = std::vector<std::string>{},
        "Runs a JSON configuration; writes report and artifacts when `out` is given.");
  m.def("version", &app::version_string);
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/eigen.h>
#include <pybind11/operators.h>

#include "hmmdiv/errors.hpp"
#include "hmmdiv/forward.hpp"
#include "hmmdiv/fredholm.hpp"
#include "hmmdiv/monte_carlo.hpp"
#include "hmmdiv/study.hpp"

namespace py = pybind11;
using namespace hmmdiv;

namespace {

// Python floats may stand in for the "kl" sentinel.
double parse_alpha(const py::handle& h) {
  if (py::isinstance<py::str>(h)) {
    const auto s = h.cast<std::string>();
    if (s == "kl" || s == "KL") return kKlAlpha;
    throw ConfigError("alpha must be a number or 'kl'");
  }
  return h.cast<double>();
}

std::vector<double> parse_alphas(const py::object& obj) {
  std::vector<double> out;
  if (py::isinstance<py::str>(obj) || py::isinstance<py::float_>(obj) || py::isinstance<py::int_>(obj))
    out.push_back(parse_alpha(obj));
  else
    for (const auto& h : obj) out.push_back(parse_alpha(h));
  return out;
}

py::dict row_to_dict(const ResultRow& r) {
  py::dict d;
  d["case"] = r.case_name;
  d["alpha"] = r.alpha;
  d["fredholm"] = r.fredholm ? py::cast(*r.fredholm) : py::none();
  d["mc_mean"] = r.mc_mean ? py::cast(*r.mc_mean) : py::none();
  d["mc_sd"] = r.mc_sd ? py::cast(*r.mc_sd) : py::none();
  const auto re = r.relative_error_pct();
  d["rel_error_pct"] = re ? py::cast(*re) : py::none();
  d["fredholm_seconds"] = r.fredholm_seconds;
  d["mc_seconds"] = r.mc_seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hmmdiv, m) {
  m.doc() = "Divergence rates between Markov switching models";

  auto base = py::register_exception<Error>(m, "HmmdivError", PyExc_RuntimeError);
  py::register_exception<InvalidModelError>(m, "InvalidModelError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", base.ptr());
  py::register_exception<GridTooCoarseError>(m, "GridTooCoarseError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<ModelAParams>(m, "ModelA")
      .def(py::init([](double p00, double p11, std::array<double, 2> mu,
                       std::array<double, 2> psi, std::array<double, 2> sigma) {
             return ModelAParams{p00, p11, mu, psi, sigma};
           }),
           py::arg("p00"), py::arg("p11"), py::arg("mu"), py::arg("psi"), py::arg("sigma"))
      .def_readwrite("p00", &ModelAParams::p00)
      .def_readwrite("p11", &ModelAParams::p11)
      .def_readwrite("mu", &ModelAParams::mu)
      .def_readwrite("psi", &ModelAParams::psi)
      .def_readwrite("sigma", &ModelAParams::sigma)
      .def(py::self == py::self)
      .def("violations", [](const ModelAParams& p) { return validate_model(p).violations; });

  py::class_<ModelBParams>(m, "ModelB")
      .def(py::init([](double p01, double p10, std::array<double, 2> mu, double phi, double psi1,
                       double psi2, double sigma) {
             return ModelBParams{p01, p10, mu, phi, psi1, psi2, sigma};
           }),
           py::arg("p01"), py::arg("p10"), py::arg("mu"), py::arg("phi"), py::arg("psi1"),
           py::arg("psi2"), py::arg("sigma"))
      .def_readwrite("p01", &ModelBParams::p01)
      .def_readwrite("p10", &ModelBParams::p10)
      .def_readwrite("mu", &ModelBParams::mu)
      .def_readwrite("phi", &ModelBParams::phi)
      .def_readwrite("psi1", &ModelBParams::psi1)
      .def_readwrite("psi2", &ModelBParams::psi2)
      .def_readwrite("sigma", &ModelBParams::sigma)
      .def(py::self == py::self)
      .def("violations", [](const ModelBParams& p) { return validate_model(p).violations; });

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init([](int N, double a, int quad_points) { return GridSpec{N, a, quad_points}; }),
           py::arg("N") = 16, py::arg("a") = 15.0, py::arg("quad_points") = 201)
      .def_readwrite("N", &GridSpec::N)
      .def_readwrite("a", &GridSpec::a)
      .def_readwrite("quad_points", &GridSpec::quad_points);

  py::class_<McConfig>(m, "McConfig")
      .def(py::init([](std::size_t n, std::size_t reps, std::size_t burn_in, std::uint64_t seed) {
             return McConfig{n, reps, burn_in, seed};
           }),
           py::arg("n") = 2000, py::arg("reps") = 100, py::arg("burn_in") = 100,
           py::arg("seed") = McConfig{}.seed)
      .def_readwrite("n", &McConfig::n)
      .def_readwrite("reps", &McConfig::reps)
      .def_readwrite("burn_in", &McConfig::burn_in)
      .def_readwrite("seed", &McConfig::seed);

  m.def(
      "stationary_distribution",
      [](double p01, double p10) {
        return stationary_distribution(TransitionMatrix::two_state(p01, p10));
      },
      py::arg("p01"), py::arg("p10"));

  m.def(
      "sample_path",
      [](const ModelParams& model, std::size_t n, std::size_t burn_in, std::uint64_t seed) {
        const auto p = sample_path(model, n, burn_in, seed);
        return py::make_tuple(p.y, p.x, p.y0);
      },
      py::arg("model"), py::arg("n"), py::arg("burn_in") = 100, py::arg("seed") = 0,
      "Returns (y, x, y0).");

  m.def(
      "log_likelihood",
      [](const ModelParams& model, const std::vector<double>& y, double y0) {
        return log_likelihood(to_chain(model), y, y0);
      },
      py::arg("model"), py::arg("y"), py::arg("y0") = 0.0);

  m.def(
      "divergence_fredholm",
      [](const ModelParams& theta1, const ModelParams& theta, const py::object& alphas,
         const GridSpec& grid) {
        std::vector<double> out;
        for (const auto& r : divergence_fredholm_grid(theta1, theta, parse_alphas(alphas), grid))
          out.push_back(r.value);
        return out;
      },
      py::arg("theta1"), py::arg("theta"), py::arg("alphas"), py::arg("grid") = GridSpec{},
      "Deterministic divergence rates D(theta1 || theta), one per alpha ('kl' for KL).");

  m.def(
      "divergence_mc",
      [](const ModelParams& theta1, const ModelParams& theta, const py::object& alphas,
         const McConfig& cfg) {
        std::vector<std::pair<double, double>> out;
        for (const auto& e : estimate_mc_grid(to_chain(theta1), to_chain(theta),
                                              parse_alphas(alphas), cfg))
          out.emplace_back(e.mean, e.std_dev);
        return out;
      },
      py::arg("theta1"), py::arg("theta"), py::arg("alphas"), py::arg("cfg") = McConfig{},
      "Monte Carlo (mean, sd) pairs, one per alpha.");

  m.def("noncentral_chisq1_cdf", &noncentral_chisq1_cdf, py::arg("x"), py::arg("lam"));

  m.def(
      "run_config",
      [](const std::string& path, const std::string& methods) {
        py::list rows;
        for (const auto& r : run_study(load_config(path), parse_methods(methods)))
          rows.append(row_to_dict(r));
        return rows;
      },
      py::arg("path"), py::arg("methods") = "mc,fredholm");

  m.def("paper_cases_json", [] { return serialize_config(paper_cases()); });
}

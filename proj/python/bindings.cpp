#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>

#include <pybind11/pybind11.h>

#include "lpflow/charpoly.hpp"
#include "lpflow/dyson.hpp"
#include "lpflow/exact_kernels.hpp"
#include "lpflow/harness.hpp"
#include "lpflow/io.hpp"
#include "lpflow/sde_core.hpp"
#include "lpflow/stationary_dpp.hpp"

namespace py = pybind11;
using namespace lpflow;

namespace {

py::dict report_dict(const harness::TestReport& r) {
  py::dict d;
  d["experiment"] = r.experiment;
  d["statistic"] = r.statistic;
  d["value"] = r.value;
  d["threshold"] = r.threshold;
  d["relation"] = r.relation;
  d["passed"] = r.passed;
  d["seed"] = r.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lpflow, m) {
  m.doc() = "Interacting particle flows, characteristic polynomials and stationary point processes";

  py::enum_<Model>(m, "Model")
      .value("GL", Model::GL)
      .value("RV", Model::RV)
      .value("HP", Model::HP)
      .value("DYSON", Model::Dyson);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def(py::init([](Model model, double theta, double nu, double s_re, double s_im, double c) {
             return ModelParams{model, theta, nu, s_re, s_im, c};
           }),
           py::arg("model"), py::arg("theta") = 0.0, py::arg("nu") = 0.0, py::arg("s_re") = 0.0,
           py::arg("s_im") = 0.0, py::arg("c") = 0.0)
      .def_readwrite("model", &ModelParams::model)
      .def_readwrite("theta", &ModelParams::theta)
      .def_readwrite("nu", &ModelParams::nu)
      .def_readwrite("s_re", &ModelParams::s_re)
      .def_readwrite("s_im", &ModelParams::s_im)
      .def_readwrite("c", &ModelParams::c);

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def_readwrite("dt_max", &IntegratorConfig::dt_max)
      .def_readwrite("dt_min", &IntegratorConfig::dt_min)
      .def_readwrite("collision_guard", &IntegratorConfig::collision_guard)
      .def_readwrite("max_substeps", &IntegratorConfig::max_substeps)
      .def_readwrite("seed", &IntegratorConfig::seed);

  m.def("gl_drift_vector", [](const std::vector<double>& x, double theta) { return gl_drift_vector(x, theta); });
  m.def("rv_drift_vector", [](const std::vector<double>& x, double nu) { return rv_drift_vector(x, nu); });
  m.def("hp_drift_vector", [](const std::vector<double>& y, std::complex<double> s) {
    return hp_drift_vector(y, s.real(), s.imag());
  });
  m.def("dyson_drift_vector", [](const std::vector<double>& d, double c) { return dyson_drift_vector(d, c); });

  m.def(
      "simulate",
      [](const std::vector<double>& x0, const ModelParams& params, const std::vector<double>& times,
         std::size_t n_paths, const IntegratorConfig& cfg) {
        const auto ens = simulate_ensemble({x0, model_is_positive(params.model)}, params, cfg, times, n_paths);
        std::vector<std::vector<std::vector<double>>> out(ens.n_paths);
        for (std::size_t p = 0; p < ens.n_paths; ++p)
          for (std::size_t k = 0; k < ens.n_times(); ++k) {
            auto s = ens.at(p, k);
            out[p].emplace_back(s.begin(), s.end());
          }
        return out;
      },
      py::arg("x0"), py::arg("params"), py::arg("times"), py::arg("n_paths"),
      py::arg("config") = IntegratorConfig{},
      "Paths indexed [path][time][particle].");

  m.def("eval_revcharpoly", [](const std::vector<double>& x, int N, std::complex<double> z) {
    return eval_revcharpoly(x, N, z);
  });
  m.def("eval_lp_plus", [](const std::vector<double>& xs, double gamma, std::complex<double> z) {
    return eval_lp_plus({xs, gamma}, z);
  });
  m.def("eval_lp_full", [](const std::vector<double>& xp, const std::vector<double>& xm, double gamma,
                           double delta, std::complex<double> z) {
    return eval_lp_full({xp, xm, gamma, delta}, z);
  });

  m.def("gbm_density", &gbm_density, py::arg("x"), py::arg("y"), py::arg("t"), py::arg("N"), py::arg("theta"));
  m.def("km_transition_density", [](const std::vector<double>& x, const std::vector<double>& y, double t,
                                    double theta) { return km_transition_density(x, y, t, theta); });
  m.def("check_1d_intertwining", &check_1d_intertwining, py::arg("x"), py::arg("y"), py::arg("t"),
        py::arg("N"), py::arg("theta"), py::arg("quadrature_order") = 21);

  m.def("bessel_j", &bessel_j);
  m.def("hp_kernel", &hp_kernel);
  m.def("inverse_bessel_kernel", &inverse_bessel_kernel);
  m.def(
      "sample_dpp",
      [](const std::string& kernel, double param, const std::vector<std::pair<double, double>>& domain,
         int n_nodes, std::uint64_t seed, std::size_t draws) {
        std::function<double(double, double)> k;
        Spacing spacing = Spacing::Log;
        if (kernel == "inverse_bessel") {
          k = [param](double x, double y) { return inverse_bessel_kernel(param, x, y); };
        } else if (kernel == "hp") {
          k = [param](double x, double y) { return hp_kernel(param, x, y); };
          spacing = Spacing::Reciprocal;
        } else {
          throw std::invalid_argument("unknown kernel " + kernel);
        }
        const auto dk = discretize_kernel(k, domain, n_nodes, kernel, spacing);
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < draws; ++i) {
          CounterRng rng(seed, i);
          out.push_back(sample_dpp(dk, rng).points);
        }
        return out;
      },
      py::arg("kernel"), py::arg("param"), py::arg("domain"), py::arg("n_nodes"), py::arg("seed"),
      py::arg("draws") = 1);

  m.def("explicit_solution", &explicit_solution);

  m.def("list_experiments", [] {
    std::vector<std::string> ids;
    for (const auto& e : harness::registry()) ids.push_back(e.id);
    return ids;
  });
  m.def(
      "run_experiment",
      [](const std::string& id, const std::string& overrides_json, std::optional<std::uint64_t> seed) {
        const auto overrides = overrides_json.empty() ? harness::json::object()
                                                      : harness::json::parse(overrides_json);
        std::vector<harness::TestReport> reports;
        {
          py::gil_scoped_release release;
          reports = harness::run_experiment(harness::make_config(id, overrides, seed));
        }
        py::list out;
        for (const auto& r : reports) out.append(report_dict(r));
        return out;
      },
      py::arg("experiment_id"), py::arg("overrides") = "", py::arg("seed") = py::none(),
      "Runs one experiment; overrides is a JSON config document.");
}

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "mlglm/hopf.hpp"
#include "mlglm/model.hpp"
#include "mlglm/potentials.hpp"
#include "mlglm/recursion.hpp"
#include "mlglm/runner.hpp"
#include "mlglm/saddle.hpp"
#include "mlglm/simulate.hpp"

namespace py = pybind11;
using namespace mlglm;

namespace {

ModelSpec make_model(double beta, const std::vector<std::pair<double, double>>& prior_atoms,
                     const std::vector<py::dict>& layers) {
  ModelSpec m;
  m.beta = beta;
  for (auto& [v, w] : prior_atoms) m.prior.atoms.push_back({v, w});
  for (const auto& d : layers) {
    LayerSpec l;
    l.alpha = d["alpha"].cast<double>();
    l.activation.kind = activation_kind_from_string(d["kind"].cast<std::string>());
    l.activation.kappa = d.contains("kappa") ? d["kappa"].cast<double>() : 1.0;
    if (d.contains("side_info"))
      for (const auto& atom : d["side_info"].cast<std::vector<py::dict>>())
        l.activation.side_info.push_back({atom["params"].cast<std::vector<double>>(),
                                          atom["weight"].cast<double>()});
    m.layers.push_back(std::move(l));
  }
  m.validate();
  return m;
}

py::dict saddle_dict(const SaddlePointResult& r) {
  py::dict out;
  out["value"] = r.value;
  out["method"] = r.method == SaddleMethod::kGrid ? "grid" : "fixed-point";
  out["residual"] = r.residual;
  out["iterations"] = r.iterations;
  out["history"] = r.history;
  out["restart_spread"] = r.restart_spread;
  out["restarts_agree"] = r.restarts_agree;
  py::list vars;
  for (const auto& l : r.vars.layers) {
    py::dict lv;
    lv["y1"] = l.y1;
    lv["y2"] = l.y2;
    lv["z1"] = l.z1;
    lv["z2"] = l.z2;
    vars.append(lv);
  }
  out["variables"] = vars;
  return out;
}

}  // namespace

PYBIND11_MODULE(_mlglm, m) {
  m.doc() = "Free-energy limits of multi-layer GLMs: variational formula, "
            "Hopf/HJ verification, exact finite-n Monte Carlo";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError");

  py::class_<ModelSpec>(m, "Model")
      .def(py::init(&make_model), py::arg("beta"), py::arg("prior"), py::arg("layers"))
      .def_property_readonly("num_layers", &ModelSpec::num_layers)
      .def_readonly("beta", &ModelSpec::beta);

  m.def("dims", &dims, py::arg("model"), py::arg("n"));
  m.def(
      "compute_rho",
      [](const ModelSpec& model, int order) {
        return compute_rho(model, gh_rule(order)).values;
      },
      py::arg("model"), py::arg("order") = 200);
  m.def(
      "sample_forward",
      [](const ModelSpec& model, int n, std::uint64_t seed) {
        auto s = sample_forward(model, n, seed);
        py::dict out;
        out["signal"] = s.signal;
        out["layer_signal"] = s.layer_signal;
        out["observation"] = s.observation;
        out["noise"] = s.noise;
        return out;
      },
      py::arg("model"), py::arg("n"), py::arg("seed"));
  m.def(
      "empirical_rho",
      [](const ModelSpec& model, int n, int reps, std::uint64_t seed) {
        auto r = empirical_rho(model, n, reps, seed);
        return py::make_tuple(r.mean, r.variance);
      },
      py::arg("model"), py::arg("n"), py::arg("replications"), py::arg("seed"));

  m.def(
      "psi0",
      [](double r, const ModelSpec& model, int order) {
        return psi0(r, model.prior, gh_rule(order));
      },
      py::arg("r"), py::arg("model"), py::arg("order") = 80);
  m.def(
      "psi_layer",
      [](double h1, double h2, double rho, const ModelSpec& model, int layer) {
        return psi_layer(h1, h2, rho, model.layers.at(layer - 1).activation, default_psi_rules());
      },
      py::arg("h1"), py::arg("h2"), py::arg("rho"), py::arg("model"), py::arg("layer") = 1);
  m.def("hamiltonian", &hamiltonian, py::arg("p1"), py::arg("p2"), py::arg("alpha"));

  m.def(
      "solve_fixed_point",
      [](const ModelSpec& model, double damping, double tol, int max_iter, int restarts,
         std::uint64_t seed) {
        SaddleOptions opts;
        opts.seed = seed;
        auto rho = compute_rho(model);
        return saddle_dict(solve_fixed_point(model, rho, damping, tol, max_iter, restarts, opts));
      },
      py::arg("model"), py::arg("damping") = 0.5, py::arg("tol") = 1e-7,
      py::arg("max_iter") = 400, py::arg("restarts") = 8, py::arg("seed") = 1);
  m.def(
      "solve_grid",
      [](const ModelSpec& model, int resolution, int refine_rounds) {
        auto rho = compute_rho(model);
        return saddle_dict(solve_grid(model, rho, resolution, refine_rounds));
      },
      py::arg("model"), py::arg("resolution") = 16, py::arg("refine_rounds") = 3);

  m.def(
      "hopf_evaluate",
      [](double t, double x1, double x2, const std::string& data, double alpha, double rho,
         double y_max, double r_cap, int inner_grid) {
        auto d = registry_data(data, alpha, rho, y_max <= 0 ? 4.0 * alpha * rho : y_max);
        auto hv = hopf_evaluate(t, x1, x2, d, r_cap <= 0 ? 2.0 * d.psi1.slope_max() + 1.0 : r_cap,
                                inner_grid);
        py::dict out;
        out["f"] = hv.f;
        out["z"] = py::make_tuple(hv.z1, hv.z2);
        out["y"] = py::make_tuple(hv.y1, hv.y2);
        return out;
      },
      py::arg("t"), py::arg("x1"), py::arg("x2"), py::arg("data") = "sqrt1p",
      py::arg("alpha") = 1.0, py::arg("rho") = 1.0, py::arg("y_max") = -1.0,
      py::arg("r_cap") = -1.0, py::arg("inner_grid") = 129);

  m.def(
      "exact_log_partition",
      [](const ModelSpec& model, int n, std::uint64_t seed) {
        auto disorder = sample_forward(model, n, seed);
        return exact_log_partition(model, n, disorder);
      },
      py::arg("model"), py::arg("n"), py::arg("seed"));
  m.def(
      "estimate_free_energy",
      [](const ModelSpec& model, int n, int reps, std::uint64_t seed) {
        auto est = estimate_free_energy(model, n, reps, seed);
        py::dict out;
        out["mean"] = est.mean;
        out["stderr"] = est.stderr_of_mean;
        out["values"] = est.values;
        return out;
      },
      py::arg("model"), py::arg("n"), py::arg("replications"), py::arg("seed"));

  m.def(
      "run_config",
      [](const std::string& config_path, const std::string& out_dir) {
        return run(config_path, out_dir).dump();
      },
      py::arg("config_path"), py::arg("out_dir") = ".");
}

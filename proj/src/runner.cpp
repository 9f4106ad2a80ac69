#include "mlglm/runner.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "mlglm/csv.hpp"
#include "mlglm/errors.hpp"
#include "mlglm/hopf.hpp"
#include "mlglm/model.hpp"
#include "mlglm/potentials.hpp"
#include "mlglm/recursion.hpp"
#include "mlglm/rng.hpp"
#include "mlglm/saddle.hpp"
#include "mlglm/simulate.hpp"
#include "mlglm/stats.hpp"
#include "mlglm/util.hpp"

namespace mlglm {

using json = nlohmann::json;

namespace {

// ------------------------------------------------------- strict json access

void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(path + "." + it.key() + ": unknown key");
}

const json& need(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key + ": missing");
  return *it;
}

double need_num(const json& j, const std::string& path, const char* key) {
  const json& v = need(j, path, key);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

double opt_num(const json& j, const std::string& path, const char* key, double def) {
  auto it = j.find(key);
  if (it == j.end()) return def;
  if (!it->is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return it->get<double>();
}

int need_int(const json& j, const std::string& path, const char* key) {
  const json& v = need(j, path, key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return v.get<int>();
}

int opt_int(const json& j, const std::string& path, const char* key, int def) {
  auto it = j.find(key);
  if (it == j.end()) return def;
  if (!it->is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return it->get<int>();
}

bool opt_bool(const json& j, const std::string& path, const char* key, bool def) {
  auto it = j.find(key);
  if (it == j.end()) return def;
  if (!it->is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
  return it->get<bool>();
}

std::string need_str(const json& j, const std::string& path, const char* key) {
  const json& v = need(j, path, key);
  if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::string opt_str(const json& j, const std::string& path, const char* key, const std::string& def) {
  auto it = j.find(key);
  if (it == j.end()) return def;
  if (!it->is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return it->get<std::string>();
}

// ------------------------------------------------------------- model parse

PriorSpec parse_prior(const json& j, const std::string& path) {
  check_keys(j, path, {"atoms"});
  const json& atoms = need(j, path, "atoms");
  if (!atoms.is_array()) throw ConfigError(path + ".atoms: expected an array");
  PriorSpec p;
  for (size_t i = 0; i < atoms.size(); ++i) {
    std::string ap = path + ".atoms[" + std::to_string(i) + "]";
    check_keys(atoms[i], ap, {"value", "weight"});
    p.atoms.push_back({need_num(atoms[i], ap, "value"), need_num(atoms[i], ap, "weight")});
  }
  p.validate(path);
  return p;
}

ActivationSpec parse_activation(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "kappa", "side_info"});
  ActivationSpec a;
  a.kind = activation_kind_from_string(need_str(j, path, "kind"));
  a.kappa = opt_num(j, path, "kappa", 1.0);
  if (auto it = j.find("side_info"); it != j.end()) {
    if (!it->is_array()) throw ConfigError(path + ".side_info: expected an array");
    for (size_t i = 0; i < it->size(); ++i) {
      std::string sp = path + ".side_info[" + std::to_string(i) + "]";
      check_keys((*it)[i], sp, {"params", "weight"});
      SideInfoAtom atom;
      const json& params = need((*it)[i], sp, "params");
      if (!params.is_array()) throw ConfigError(sp + ".params: expected an array");
      for (const auto& v : params) {
        if (!v.is_number()) throw ConfigError(sp + ".params: expected numbers");
        atom.params.push_back(v.get<double>());
      }
      atom.weight = need_num((*it)[i], sp, "weight");
      a.side_info.push_back(std::move(atom));
    }
  }
  a.validate(path);
  return a;
}

ModelSpec parse_model(const json& j, const std::string& path) {
  check_keys(j, path, {"beta", "prior", "layers"});
  ModelSpec m;
  m.beta = need_num(j, path, "beta");
  m.prior = parse_prior(need(j, path, "prior"), path + ".prior");
  const json& layers = need(j, path, "layers");
  if (!layers.is_array() || layers.empty())
    throw ConfigError(path + ".layers: expected a non-empty array");
  for (size_t i = 0; i < layers.size(); ++i) {
    std::string lp = path + ".layers[" + std::to_string(i) + "]";
    check_keys(layers[i], lp, {"alpha", "activation"});
    LayerSpec l;
    l.alpha = need_num(layers[i], lp, "alpha");
    l.activation = parse_activation(need(layers[i], lp, "activation"), lp + ".activation");
    m.layers.push_back(std::move(l));
  }
  m.validate(path);
  return m;
}

json vars_to_json(const SaddleVariables& v) {
  json out = json::array();
  for (const auto& l : v.layers)
    out.push_back({{"y1", l.y1}, {"y2", l.y2}, {"z1", l.z1}, {"z2", l.z2}});
  return out;
}

json saddle_to_json(const SaddlePointResult& r) {
  json out;
  out["method"] = r.method == SaddleMethod::kGrid ? "grid" : "fixed-point";
  out["value"] = r.value;
  out["residual"] = r.residual;
  out["iterations"] = r.iterations;
  out["history"] = r.history;
  out["restart_spread"] = r.restart_spread;
  out["restarts_agree"] = r.restarts_agree;
  out["diagnostics"] = r.diagnostics;
  out["variables"] = vars_to_json(r.vars);
  return out;
}

void write_saddle_csv(const std::string& path, const std::vector<const SaddlePointResult*>& results) {
  CsvWriter csv(path, "method,kind,index,value");
  for (const auto* r : results) {
    std::string method = r->method == SaddleMethod::kGrid ? "grid" : "fixed-point";
    std::string kind = r->method == SaddleMethod::kGrid ? "round" : "restart";
    for (size_t i = 0; i < r->history.size(); ++i)
      csv.row({method, kind, std::to_string(i), csv_num(r->history[i])});
    csv.row({method, "final", "0", csv_num(r->value)});
  }
}

struct SaddleParams {
  std::string method = "fixed-point";
  int resolution = 16;
  int refine_rounds = 3;
  double damping = 0.5;
  double tol = 1e-7;
  int max_iter = 400;
  int restarts = 8;
  double y_max = -1.0;
  double r_cap = -1.0;
};

SaddleParams parse_saddle_params(const json& j, const std::string& path) {
  check_keys(j, path,
             {"method", "resolution", "refine_rounds", "damping", "tol", "max_iter", "restarts",
              "y_max", "r_cap"});
  SaddleParams p;
  p.method = opt_str(j, path, "method", "fixed-point");
  if (p.method != "grid" && p.method != "fixed-point" && p.method != "both")
    throw ConfigError(path + ".method: expected grid | fixed-point | both");
  p.resolution = opt_int(j, path, "resolution", 16);
  p.refine_rounds = opt_int(j, path, "refine_rounds", 3);
  p.damping = opt_num(j, path, "damping", 0.5);
  p.tol = opt_num(j, path, "tol", 1e-7);
  p.max_iter = opt_int(j, path, "max_iter", 400);
  p.restarts = opt_int(j, path, "restarts", 8);
  p.y_max = opt_num(j, path, "y_max", -1.0);
  p.r_cap = opt_num(j, path, "r_cap", -1.0);
  return p;
}

// ------------------------------------------------------------------- tasks

json task_rho(const json& sec, const ModelSpec& model, std::uint64_t seed, int threads,
              const std::string& out_dir) {
  check_keys(sec, "rho", {"order", "empirical"});
  int order = opt_int(sec, "rho", "order", 200);
  auto rho = compute_rho(model, gh_rule(order));

  CsvWriter csv(out_dir + "/rho.csv", "l,rho");
  for (int l = 0; l < rho.size(); ++l) csv.row({std::to_string(l), csv_num(rho[l])});

  json out;
  out["values"] = rho.values;
  if (auto it = sec.find("empirical"); it != sec.end()) {
    check_keys(*it, "rho.empirical", {"n", "replications"});
    int n = need_int(*it, "rho.empirical", "n");
    int reps = need_int(*it, "rho.empirical", "replications");
    auto emp = empirical_rho(model, n, reps, seed, threads);
    CsvWriter ecsv(out_dir + "/empirical_rho.csv", "rep,value");
    for (size_t i = 0; i < emp.values.size(); ++i)
      ecsv.row({std::to_string(i), csv_num(emp.values[i])});
    out["empirical"] = {{"n", n},
                        {"replications", reps},
                        {"mean", emp.mean},
                        {"variance", emp.variance},
                        {"limit", rho.values.back()},
                        {"mean_vs_limit_stderr",
                         (emp.mean - rho.values.back()) / std::sqrt(emp.variance / reps)}};
  }
  return out;
}

json task_psi_table(const json& sec, const ModelSpec& model, int threads,
                    const std::string& out_dir) {
  check_keys(sec, "psi-table",
             {"layer", "r_min", "r_max", "r_count", "h1_count", "h2_min", "h2_max", "h2_count",
              "outer_order", "inner_order", "prior_order"});
  int layer = need_int(sec, "psi-table", "layer");
  json out;
  out["layer"] = layer;
  if (layer == 0) {
    double r0 = opt_num(sec, "psi-table", "r_min", 0.0);
    double r1 = opt_num(sec, "psi-table", "r_max", 4.0);
    int count = opt_int(sec, "psi-table", "r_count", 65);
    auto rule = gh_rule(opt_int(sec, "psi-table", "prior_order", 80));
    std::vector<double> vals(count);
    parallel_for(count, threads, [&](int i) {
      double r = r0 + (r1 - r0) * i / (count - 1);
      vals[i] = psi0(r, model.prior, rule);
    });
    CsvWriter csv(out_dir + "/psi0.csv", "r,psi0");
    for (int i = 0; i < count; ++i)
      csv.row({csv_num(r0 + (r1 - r0) * i / (count - 1)), csv_num(vals[i])});
    out["rows"] = count;
    return out;
  }
  if (layer < 1 || layer > model.num_layers())
    throw ConfigError("psi-table.layer: out of range for this model");
  auto rho = compute_rho(model);
  PsiRules rules{gh_rule(opt_int(sec, "psi-table", "outer_order", 40)),
                 gh_rule(opt_int(sec, "psi-table", "inner_order", 60))};
  const double rho_prev = rho[layer - 1];
  int n1 = opt_int(sec, "psi-table", "h1_count", 17);
  double h2min = opt_num(sec, "psi-table", "h2_min", 0.0);
  double h2max = opt_num(sec, "psi-table", "h2_max", 4.0);
  int n2 = opt_int(sec, "psi-table", "h2_count", 17);
  std::vector<double> vals(static_cast<size_t>(n1) * n2);
  parallel_for(n1 * n2, threads, [&](int ij) {
    double h1 = rho_prev * (ij / n2) / (n1 - 1);
    double h2 = h2min + (h2max - h2min) * (ij % n2) / (n2 - 1);
    vals[ij] = psi_layer(h1, h2, rho_prev, model.layers[layer - 1].activation, rules, 1);
  });
  CsvWriter csv(out_dir + "/psi_layer.csv", "h1,h2,psi");
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      csv.row({csv_num(rho_prev * i / (n1 - 1)), csv_num(h2min + (h2max - h2min) * j / (n2 - 1)),
               csv_num(vals[static_cast<size_t>(i) * n2 + j])});
  out["rows"] = n1 * n2;
  return out;
}

json task_saddle(const json& sec, const ModelSpec& model, std::uint64_t seed, int threads,
                 const std::string& out_dir) {
  SaddleParams p = parse_saddle_params(sec, "saddle");
  auto rho = compute_rho(model);
  SaddleOptions opts;
  opts.threads = threads;
  opts.seed = seed;
  opts.y_max = p.y_max;
  opts.r_cap = p.r_cap;

  json out;
  std::vector<SaddlePointResult> results;
  if (p.method == "grid" || p.method == "both")
    results.push_back(solve_grid(model, rho, p.resolution, p.refine_rounds, opts));
  if (p.method == "fixed-point" || p.method == "both")
    results.push_back(
        solve_fixed_point(model, rho, p.damping, p.tol, p.max_iter, p.restarts, opts));

  std::vector<const SaddlePointResult*> ptrs;
  for (const auto& r : results) {
    ptrs.push_back(&r);
    out[r.method == SaddleMethod::kGrid ? "grid" : "fixed_point"] = saddle_to_json(r);
  }
  if (results.size() == 2) out["method_difference"] = results[0].value - results[1].value;
  out["rho"] = rho.values;
  write_saddle_csv(out_dir + "/saddle.csv", ptrs);
  return out;
}

json hopf_report(const HopfField& field, const SeparableInitialData& data) {
  auto rep = verify_weak_solution(field);
  double initial_match = 0.0;
  for (int j = 0; j < field.nh1; ++j)
    for (int k = 0; k < field.nh2; ++k) {
      double want = data.psi(field.h1(0, j), field.h2[k]);
      initial_match = std::max(initial_match, std::abs(field.at(0, j, k) - want));
    }
  json out;
  out["hj_residual_max"] = rep.hj_residual_max;
  out["hj_residual_p95"] = rep.hj_residual_p95;
  out["hj_points"] = rep.hj_points;
  out["partial_convexity_min"] = rep.partial_convexity_min;
  out["d1f_min"] = rep.d1f_min;
  out["d1f_max"] = rep.d1f_max;
  out["d2f_min"] = rep.d2f_min;
  out["d2f_max"] = rep.d2f_max;
  out["d2f_cap"] = field.alpha * field.rho / 2.0;
  out["lipschitz"] = rep.lipschitz;
  out["monotone1_min"] = rep.monotone1_min;
  out["monotone2_min"] = rep.monotone2_min;
  out["initial_condition_max_err"] = initial_match;
  return out;
}

void write_hopf_csv(const std::string& path, const HopfField& field,
                    const std::vector<double>& residual) {
  CsvWriter csv(path, "t,h1,h2,f,residual");
  for (int i = 0; i < field.nt; ++i)
    for (int j = 0; j < field.nh1; ++j)
      for (int k = 0; k < field.nh2; ++k) {
        size_t idx = (static_cast<size_t>(i) * field.nh1 + j) * field.nh2 + k;
        csv.row({csv_num(field.t[i]), csv_num(field.h1(i, j)), csv_num(field.h2[k]),
                 csv_num(field.f[idx]), csv_num(residual[idx])});
      }
}

json task_hopf(const json& sec, const ModelSpec& model, int threads, const std::string& out_dir) {
  check_keys(sec, "hopf-check",
             {"data", "alpha", "rho", "nt", "nh1", "nh2", "h2_max", "y_max", "r_cap", "inner_grid",
              "knots", "linkage", "linkage_resolution", "linkage_refine_rounds"});
  std::string name = need_str(sec, "hopf-check", "data");
  int nt = opt_int(sec, "hopf-check", "nt", 33);
  int nh1 = opt_int(sec, "hopf-check", "nh1", 33);
  int nh2 = opt_int(sec, "hopf-check", "nh2", 33);
  int inner_grid = opt_int(sec, "hopf-check", "inner_grid", 129);

  SeparableInitialData data;
  json out;
  RhoSequence rho;
  if (name == "potential") {
    rho = compute_rho(model);
    double alpha = model.alpha(0);
    double def_cap = 4.0 * alpha * rho[0];
    double y_max = opt_num(sec, "hopf-check", "y_max", def_cap);
    int knots = opt_int(sec, "hopf-check", "knots", 257);
    data = make_potential_data(model, rho, knots, knots, y_max, default_psi_rules(),
                               default_prior_rule(), threads);
  } else {
    double alpha = opt_num(sec, "hopf-check", "alpha", 1.0);
    double rho_v = opt_num(sec, "hopf-check", "rho", 1.0);
    double y_max = opt_num(sec, "hopf-check", "y_max", 4.0 * alpha * rho_v);
    data = registry_data(name, alpha, rho_v, y_max);
  }
  double h2_max = opt_num(sec, "hopf-check", "h2_max", 4.0 * data.alpha * data.rho);
  double r_cap = opt_num(sec, "hopf-check", "r_cap", 2.0 * data.psi1.slope_max() + 1.0);

  auto field = build_hopf_field(data, nt, nh1, nh2, h2_max, r_cap, inner_grid, threads);
  auto rep = verify_weak_solution(field);
  out = hopf_report(field, data);
  out["data"] = name;
  out["grid"] = {{"nt", nt}, {"nh1", nh1}, {"nh2", nh2}};
  write_hopf_csv(out_dir + "/hopf_field.csv", field, rep.residual_field);

  if (opt_bool(sec, "hopf-check", "linkage", false)) {
    if (name != "potential")
      throw ConfigError("hopf-check.linkage: requires data = \"potential\"");
    auto hv = hopf_evaluate(1.0, 0.0, 0.0, data, r_cap, inner_grid);
    SaddleOptions opts;
    opts.threads = threads;
    auto grid = solve_grid(model, rho, opt_int(sec, "hopf-check", "linkage_resolution", 48),
                           opt_int(sec, "hopf-check", "linkage_refine_rounds", 4), opts);
    out["linkage"] = {{"hopf_value", hv.f},
                      {"grid_value", grid.value},
                      {"difference", hv.f - grid.value}};
  }
  return out;
}

json simulate_to_json(const FreeEnergyEstimate& est) {
  return {{"n", est.n},
          {"replications", est.replications},
          {"mean", est.mean},
          {"stderr", est.stderr_of_mean},
          {"seed", est.seed}};
}

void write_replications_csv(const std::string& path, const FreeEnergyEstimate& est) {
  CsvWriter csv(path, "rep,F,seed");
  for (size_t i = 0; i < est.values.size(); ++i)
    csv.row({std::to_string(i), csv_num(est.values[i]),
             std::to_string(mix_seed(est.seed, {kTagReplication, static_cast<std::uint64_t>(i)}))});
}

json task_simulate(const json& sec, const ModelSpec& model, std::uint64_t seed, int threads,
                   const std::string& out_dir) {
  check_keys(sec, "simulate", {"n", "replications", "beta_proxy"});
  int n = need_int(sec, "simulate", "n");
  int reps = need_int(sec, "simulate", "replications");
  auto est = estimate_free_energy(model, n, reps, seed, threads);
  write_replications_csv(out_dir + "/replications.csv", est);
  json out = simulate_to_json(est);
  if (opt_bool(sec, "simulate", "beta_proxy", false)) {
    auto proxy = beta_monotone_proxy(model, n, reps, seed, threads);
    out["beta_proxy"] = {{"mean_at_beta", proxy.mean_at_beta},
                         {"mean_at_zero", proxy.mean_at_zero},
                         {"combined_stderr", proxy.combined_stderr},
                         {"raw_direction_ok", proxy.raw_direction_ok},
                         {"shifted_gap", proxy.shifted_gap},
                         {"shifted_direction_ok", proxy.shifted_direction_ok}};
  }
  return out;
}

json task_compare(const json& sec, const ModelSpec& model, std::uint64_t seed, int threads,
                  const std::string& out_dir) {
  check_keys(sec, "compare", {"n", "replications", "slack", "saddle"});
  int n = need_int(sec, "compare", "n");
  int reps = need_int(sec, "compare", "replications");
  double slack = opt_num(sec, "compare", "slack", 0.05);
  json saddle_sec = sec.contains("saddle") ? sec["saddle"] : json::object();
  SaddleParams p = parse_saddle_params(saddle_sec, "compare.saddle");

  auto rho = compute_rho(model);
  SaddleOptions opts;
  opts.threads = threads;
  opts.seed = seed;
  std::vector<SaddlePointResult> results;
  if (p.method == "grid" || p.method == "both")
    results.push_back(solve_grid(model, rho, p.resolution, p.refine_rounds, opts));
  if (p.method == "fixed-point" || p.method == "both")
    results.push_back(solve_fixed_point(model, rho, p.damping, p.tol, p.max_iter, p.restarts, opts));
  const SaddlePointResult& limit = results.back();

  auto est = estimate_free_energy(model, n, reps, seed, threads);
  write_replications_csv(out_dir + "/replications.csv", est);
  std::vector<const SaddlePointResult*> ptrs;
  for (const auto& r : results) ptrs.push_back(&r);
  write_saddle_csv(out_dir + "/saddle.csv", ptrs);

  double gap = est.mean - limit.value;
  bool pass = std::abs(gap) <= 3.0 * est.stderr_of_mean + slack;
  json out;
  out["simulate"] = simulate_to_json(est);
  for (const auto& r : results)
    out[r.method == SaddleMethod::kGrid ? "grid" : "fixed_point"] = saddle_to_json(r);
  out["limit_value"] = limit.value;
  out["difference"] = gap;
  out["tolerance"] = 3.0 * est.stderr_of_mean + slack;
  out["slack"] = slack;
  out["pass"] = pass;
  return out;
}

}  // namespace

// -------------------------------------------------------------- public API

void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--set expects dotted.key=value, got '" + assignment + "'");
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);

  json* cur = &doc;
  size_t pos = 0;
  while (pos < path.size()) {
    size_t dot = path.find('.', pos);
    std::string part = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    size_t br = part.find('[');
    std::string key = br == std::string::npos ? part : part.substr(0, br);
    if (!key.empty()) cur = &(*cur)[key];
    while (br != std::string::npos) {
      size_t close = part.find(']', br);
      if (close == std::string::npos) throw ConfigError("--set: unbalanced [] in '" + path + "'");
      int idx = std::stoi(part.substr(br + 1, close - br - 1));
      if (!cur->is_array() || idx >= static_cast<int>(cur->size()))
        throw ConfigError("--set: index out of range in '" + path + "'");
      cur = &(*cur)[idx];
      br = part.find('[', close);
    }
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  json parsed = json::parse(value, nullptr, false);
  *cur = parsed.is_discarded() ? json(value) : parsed;
}

json run_config(const json& doc, const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();

  std::string task = need_str(doc, "config", "task");
  static const std::set<std::string> kTasks = {"rho", "psi-table", "saddle",
                                               "hopf-check", "simulate", "compare"};
  if (!kTasks.count(task))
    throw ConfigError("config.task: unknown task '" + task +
                      "' (expected rho | psi-table | saddle | hopf-check | simulate | compare)");
  check_keys(doc, "config", {"schema_version", "seed", "threads", "task", "model", "output", task});

  int sv = need_int(doc, "config", "schema_version");
  if (sv != kSchemaVersion)
    throw ConfigError("config.schema_version: expected " + std::to_string(kSchemaVersion));
  auto seed = static_cast<std::uint64_t>(opt_int(doc, "config", "seed", 1));
  int threads = opt_int(doc, "config", "threads", 0);
  if (threads <= 0) threads = default_threads();
  ModelSpec model = parse_model(need(doc, "config", "model"), "model");
  if (auto it = doc.find("output"); it != doc.end()) check_keys(*it, "output", {"dir"});

  std::filesystem::create_directories(out_dir);
  const json sec = doc.contains(task) ? doc[task] : json::object();

  json results;
  if (task == "rho") results = task_rho(sec, model, seed, threads, out_dir);
  else if (task == "psi-table") results = task_psi_table(sec, model, threads, out_dir);
  else if (task == "saddle") results = task_saddle(sec, model, seed, threads, out_dir);
  else if (task == "hopf-check") results = task_hopf(sec, model, threads, out_dir);
  else if (task == "simulate") results = task_simulate(sec, model, seed, threads, out_dir);
  else results = task_compare(sec, model, seed, threads, out_dir);

  auto t1 = std::chrono::steady_clock::now();
  json report;
  report["version"] = kVersion;
  report["task"] = task;
  report["config"] = doc;
  report["results"] = results;
  report["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();

  std::ofstream rf(out_dir + "/report.json");
  if (!rf) throw ConfigError("cannot write report to '" + out_dir + "'");
  rf << report.dump(2) << "\n";
  return report;
}

json run(const std::string& config_path, const std::string& out_dir,
         const std::vector<std::string>& overrides, std::int64_t seed_override,
         int threads_override) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot read config '" + config_path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config '" + config_path + "' is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  if (seed_override >= 0) doc["seed"] = seed_override;
  if (threads_override > 0) doc["threads"] = threads_override;
  if (doc.contains("threads") && doc["threads"].is_number_integer() &&
      doc["threads"].get<int>() > 0)
    set_default_threads(doc["threads"].get<int>());
  std::string dir = out_dir;
  if (dir.empty())
    dir = doc.contains("output") && doc["output"].contains("dir")
              ? doc["output"]["dir"].get<std::string>()
              : ".";
  return run_config(doc, dir);
}

}  // namespace mlglm

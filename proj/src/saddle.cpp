#include "mlglm/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlglm/errors.hpp"
#include "mlglm/rng.hpp"
#include "mlglm/util.hpp"

namespace mlglm {

double hamiltonian(double p1, double p2, double alpha) {
  return 2.0 / alpha * p1 * p2;
}

double default_cap(const ModelSpec& model, const RhoSequence& rho) {
  double amax = 1.0;
  for (const auto& l : model.layers) amax = std::max(amax, l.alpha);
  return 8.0 * std::max(model.beta, 1.0) * amax * std::max(rho.max(), 1.0);
}

namespace {

struct Caps {
  double y_max, r_cap;
};

Caps resolve_caps(const ModelSpec& model, const RhoSequence& rho, const SaddleOptions& opts) {
  double c = default_cap(model, rho);
  return {opts.y_max > 0 ? opts.y_max : c, opts.r_cap > 0 ? opts.r_cap : c};
}

void check_boxes(const SaddleVariables& vars, const ModelSpec& model, const RhoSequence& rho,
                 const Caps& caps) {
  const int L = model.num_layers();
  if (static_cast<int>(vars.layers.size()) != L)
    throw NumericError("saddle variables: expected " + std::to_string(L) + " layers");
  for (int l = 1; l <= L; ++l) {
    const auto& v = vars.layers[l - 1];
    const double z2hi = model.alpha(l - 1) * rho[l - 1] / 2.0;
    const double tol = 1e-9 * std::max({1.0, rho[l - 1], caps.y_max});
    if (v.y1 < -tol || v.y1 > rho[l - 1] + tol || v.y2 < -tol || v.y2 > caps.y_max + tol ||
        v.z1 < -tol || v.z1 > caps.r_cap + tol || v.z2 < -tol || v.z2 > z2hi + tol)
      throw NumericError("saddle variables: layer " + std::to_string(l) + " outside its box");
  }
}

}  // namespace

double phi_objective(const SaddleVariables& vars, const ModelSpec& model,
                     const RhoSequence& rho, const PsiRules& rules,
                     const GaussHermiteRule& prior_rule, const SaddleOptions& opts) {
  const int L = model.num_layers();
  check_boxes(vars, model, rho, resolve_caps(model, rho, opts));

  double val = 0.0;
  for (int l = 1; l <= L; ++l) {
    const auto& v = vars.layers[l - 1];
    const double h2 = (l == L) ? model.beta : vars.layers[l].y2;
    val += model.alpha(l) *
           psi_layer(std::min(v.y1, rho[l - 1]), h2, rho[l - 1],
                     model.layers[l - 1].activation, rules, opts.threads);
  }
  val += psi0(vars.layers[0].y2, model.prior, prior_rule);
  for (int l = 1; l <= L; ++l) {
    const auto& v = vars.layers[l - 1];
    val += -(v.y1 * v.z1 + v.y2 * v.z2) + hamiltonian(v.z1, v.z2, model.alpha(l - 1));
  }
  for (int l = 2; l <= L; ++l)
    val += model.alpha(l - 1) / 2.0 * (1.0 + rho[l - 1] * vars.layers[l - 1].y2);
  return val;
}

// --------------------------------------------------------- stationarity map

namespace {

// Projected first-order update for every variable; the residual is the max
// distance between the current point and its projected update.
struct MapResult {
  SaddleVariables next;
  double residual;
};

MapResult stationarity_map(const SaddleVariables& cur, const ModelSpec& model,
                           const RhoSequence& rho, const PsiRules& rules,
                           const GaussHermiteRule& prior_rule, const Caps& caps,
                           double fd_step, int threads) {
  const int L = model.num_layers();
  SaddleVariables nxt = cur;
  auto clip = [](double x, double lo, double hi) { return std::min(std::max(x, lo), hi); };

  std::vector<double> d1(L), d2(L);  // d{1,2}[l-1] = d Psi_l at (y1_l, h2next_l)
  for (int l = 1; l <= L; ++l) {
    const double h2next = (l == L) ? model.beta : cur.layers[l].y2;
    PotentialPoint p{clip(cur.layers[l - 1].y1, 0.0, rho[l - 1]), h2next, rho[l - 1]};
    const auto& act = model.layers[l - 1].activation;
    d1[l - 1] = psi_partial(PsiVar::kH1, p, act, rules, fd_step, threads);
    if (l < L)  // needed for z2 of layer l+1
      d2[l - 1] = psi_partial(PsiVar::kH2, p, act, rules, fd_step, threads);
  }

  for (int l = 1; l <= L; ++l) {
    auto& v = nxt.layers[l - 1];
    const double a_prev = model.alpha(l - 1);
    v.y1 = clip(2.0 / a_prev * cur.layers[l - 1].z2, 0.0, rho[l - 1]);
    v.y2 = clip(2.0 / a_prev * cur.layers[l - 1].z1, 0.0, caps.y_max);
    v.z1 = clip(model.alpha(l) * d1[l - 1], 0.0, caps.r_cap);
    if (l == 1) {
      v.z2 = clip(psi0_prime(cur.layers[0].y2, model.prior, prior_rule, fd_step), 0.0,
                  a_prev * rho[0] / 2.0);
    } else {
      v.z2 = clip(a_prev * d2[l - 2] + a_prev * rho[l - 1] / 2.0, 0.0, a_prev * rho[l - 1] / 2.0);
    }
  }

  double res = 0.0;
  for (int l = 0; l < L; ++l) {
    res = std::max(res, std::abs(nxt.layers[l].y1 - cur.layers[l].y1));
    res = std::max(res, std::abs(nxt.layers[l].y2 - cur.layers[l].y2));
    res = std::max(res, std::abs(nxt.layers[l].z1 - cur.layers[l].z1));
    res = std::max(res, std::abs(nxt.layers[l].z2 - cur.layers[l].z2));
  }
  return {std::move(nxt), res};
}

void check_interior(const SaddleVariables& vars, const Caps& caps, const std::string& who) {
  for (size_t l = 0; l < vars.layers.size(); ++l) {
    if (vars.layers[l].y2 >= caps.y_max * (1.0 - 1e-6))
      throw NumericError(who + ": optimum touches the Y_MAX truncation at layer " +
                         std::to_string(l + 1) + "; raise y_max");
    if (vars.layers[l].z1 >= caps.r_cap * (1.0 - 1e-6))
      throw NumericError(who + ": optimum touches the R_CAP truncation at layer " +
                         std::to_string(l + 1) + "; raise r_cap");
  }
}

}  // namespace

double stationarity_residual(const SaddleVariables& vars, const ModelSpec& model,
                             const RhoSequence& rho, const PsiRules& rules,
                             const GaussHermiteRule& prior_rule, const SaddleOptions& opts) {
  Caps caps = resolve_caps(model, rho, opts);
  int threads = opts.threads <= 0 ? default_threads() : opts.threads;
  return stationarity_map(vars, model, rho, rules, prior_rule, caps, opts.fd_step, threads).residual;
}

SaddlePointResult solve_fixed_point(const ModelSpec& model, const RhoSequence& rho,
                                    double damping, double tol, int max_iter, int n_restarts,
                                    const SaddleOptions& opts) {
  model.validate();
  if (!(damping > 0.0 && damping <= 1.0))
    throw ConfigError("solve_fixed_point: damping must be in (0, 1]");
  const int L = model.num_layers();
  const Caps caps = resolve_caps(model, rho, opts);
  const PsiRules& rules = default_psi_rules();
  const GaussHermiteRule& prior_rule = default_prior_rule();
  const int threads = opts.threads <= 0 ? default_threads() : opts.threads;

  struct Run {
    SaddleVariables vars;
    double value = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
  };
  std::vector<Run> runs(n_restarts);

  for (int r = 0; r < n_restarts; ++r) {
    RandomStream rs(mix_seed(opts.seed, {kTagRestart, static_cast<std::uint64_t>(r)}));
    SaddleVariables v;
    v.layers.resize(L);
    for (int l = 1; l <= L; ++l) {
      auto& lv = v.layers[l - 1];
      lv.y1 = rs.uniform01() * rho[l - 1];
      lv.y2 = rs.uniform01() * caps.y_max;
      lv.z1 = rs.uniform01() * caps.r_cap;
      lv.z2 = rs.uniform01() * (model.alpha(l - 1) * rho[l - 1] / 2.0);
    }
    Run run;
    run.vars = v;
    for (int it = 1; it <= max_iter; ++it) {
      auto mr = stationarity_map(run.vars, model, rho, rules, prior_rule, caps, opts.fd_step, threads);
      run.residual = mr.residual;
      run.iterations = it;
      for (int l = 0; l < L; ++l) {
        auto& c = run.vars.layers[l];
        const auto& nx = mr.next.layers[l];
        c.y1 += damping * (nx.y1 - c.y1);
        c.y2 += damping * (nx.y2 - c.y2);
        c.z1 += damping * (nx.z1 - c.z1);
        c.z2 += damping * (nx.z2 - c.z2);
      }
      if (mr.residual < tol) {
        run.converged = true;
        break;
      }
    }
    if (run.converged)
      run.value = phi_objective(run.vars, model, rho, rules, prior_rule, opts);
    runs[r] = std::move(run);
  }

  const Run* best = nullptr;
  double best_residual = std::numeric_limits<double>::infinity();
  std::vector<double> converged_values;
  for (const auto& run : runs) {
    best_residual = std::min(best_residual, run.residual);
    if (!run.converged) continue;
    converged_values.push_back(run.value);
    if (best == nullptr || run.value > best->value) best = &run;
  }
  if (best == nullptr)
    throw NonConvergenceError("solve_fixed_point: no restart converged within max_iter (best residual " +
                                  std::to_string(best_residual) + ")",
                              best_residual);

  SaddlePointResult out;
  out.vars = best->vars;
  out.method = SaddleMethod::kFixedPoint;
  out.residual = best->residual;
  out.iterations = best->iterations;
  out.history = converged_values;
  double lo = *std::min_element(converged_values.begin(), converged_values.end());
  double hi = *std::max_element(converged_values.begin(), converged_values.end());
  out.restart_spread = hi - lo;
  out.restarts_agree = out.restart_spread <= 1e-5;
  if (!out.restarts_agree)
    out.diagnostics.push_back("restart-value-disagreement: converged restarts span " +
                              std::to_string(out.restart_spread));
  if (converged_values.size() < static_cast<size_t>(n_restarts))
    out.diagnostics.push_back(std::to_string(n_restarts - converged_values.size()) +
                              " restart(s) did not converge");
  check_interior(best->vars, caps, "solve_fixed_point");
  out.value = phi_objective(best->vars, model, rho, rules, prior_rule, opts);
  return out;
}

// ---------------------------------------------------------------- grid solve

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  v.back() = hi;
  return v;
}

// One sup/inf axis. Refinement keeps a coarse full-range grid for coverage
// (a diverted incumbent self-corrects on the next round) and adds a fine
// cluster around the incumbent whose width shrinks 4x per round.
struct Axis {
  double lo = 0.0, hi = 1.0;
  double focus = 0.0, halfwidth = -1.0;  // halfwidth < 0: no focus yet

  std::vector<double> grid(int res) const {
    if (hi <= lo) return {lo};
    if (halfwidth < 0.0) return linspace(lo, hi, res);
    int nc = std::max(res / 3, 4);
    int nf = std::max(res - nc, 4);
    double flo = std::max(lo, focus - halfwidth);
    double fhi = std::min(hi, focus + halfwidth);
    std::vector<double> g = linspace(lo, hi, nc);
    std::vector<double> f = linspace(flo, fhi, nf);
    g.insert(g.end(), f.begin(), f.end());
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(),
                        [&](double a, double b) { return b - a < 1e-15 * (hi - lo + 1.0); }),
            g.end());
    return g;
  }

  void refine(double incumbent) {
    halfwidth = halfwidth < 0.0 ? (hi - lo) / 8.0 : std::max(halfwidth / 4.0, 1e-13 * (hi - lo));
    focus = incumbent;
  }

  // Local spacing of the current grid next to x (cap-touch resolution).
  double spacing_near(const std::vector<double>& g, double x) const {
    double best = hi - lo;
    for (size_t i = 0; i + 1 < g.size(); ++i)
      if (x >= g[i] - 1e-15 && x <= g[i + 1] + 1e-15) best = std::min(best, g[i + 1] - g[i]);
    return best;
  }
};

// Lowest-index tie-breaks: strict comparisons keep the first optimum.
struct ArgOpt {
  double value;
  int index;
};

template <class F>
ArgOpt min_over(int n, F f) {
  ArgOpt best{std::numeric_limits<double>::infinity(), 0};
  for (int i = 0; i < n; ++i) {
    double v = f(i);
    if (v < best.value) best = {v, i};
  }
  return best;
}

}  // namespace

SaddlePointResult solve_grid(const ModelSpec& model, const RhoSequence& rho, int resolution,
                             int refine_rounds, const SaddleOptions& opts) {
  model.validate();
  const int L = model.num_layers();
  if (L > 2)
    throw ConfigError("solve_grid: L > 2 is unsupported (cost grows as resolution^(4L)); "
                      "use solve_fixed_point");
  if (resolution < 8) throw ConfigError("solve_grid: resolution must be >= 8");
  const Caps caps = resolve_caps(model, rho, opts);
  const PsiRules& rules = default_psi_rules();
  const GaussHermiteRule& prior_rule = default_prior_rule();
  const int threads = opts.threads <= 0 ? default_threads() : opts.threads;
  const int res = resolution;

  // Axes per layer: y1, y2, z1, z2.
  std::vector<std::array<Axis, 4>> axis(L);
  for (int l = 1; l <= L; ++l)
    axis[l - 1] = {Axis{0.0, rho[l - 1]}, Axis{0.0, caps.y_max}, Axis{0.0, caps.r_cap},
                   Axis{0.0, model.alpha(l - 1) * rho[l - 1] / 2.0}};

  SaddleVariables inc;
  inc.layers.resize(L);
  std::vector<double> history;
  std::vector<std::array<std::vector<double>, 4>> g(L);

  for (int round = 0; round <= refine_rounds; ++round) {
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < 4; ++k) g[l][k] = axis[l][k].grid(res);
    auto n = [&](int l, int k) { return static_cast<int>(g[l][k].size()); };

    // Psi tables on the current grids.
    std::vector<double> p0(n(0, 1));  // Psi0 on the y2^(1) grid
    parallel_for(n(0, 1), threads,
                 [&](int i) { p0[i] = psi0(g[0][1][i], model.prior, prior_rule); });

    double incumbent = 0.0;
    if (L == 1) {
      std::vector<double> p1(n(0, 0));  // Psi_1(y1, beta)
      parallel_for(n(0, 0), threads, [&](int i) {
        p1[i] = psi_layer(g[0][0][i], model.beta, rho[0], model.layers[0].activation, rules, 1);
      });
      const double a0 = model.alpha(0), a1 = model.alpha(1);
      ArgOpt best{-std::numeric_limits<double>::infinity(), 0};
      int by1 = 0, by2 = 0, bz1 = 0, bz2 = 0;
      for (int iz1 = 0; iz1 < n(0, 2); ++iz1) {
        const double z1 = g[0][2][iz1];
        auto m1 = min_over(n(0, 0), [&](int i) { return a1 * p1[i] - z1 * g[0][0][i]; });
        for (int iz2 = 0; iz2 < n(0, 3); ++iz2) {
          const double z2 = g[0][3][iz2];
          auto m0 = min_over(n(0, 1), [&](int j) { return p0[j] - z2 * g[0][1][j]; });
          double v = m1.value + m0.value + hamiltonian(z1, z2, a0);
          if (v > best.value) {
            best = {v, 0};
            by1 = m1.index;
            by2 = m0.index;
            bz1 = iz1;
            bz2 = iz2;
          }
        }
      }
      inc.layers[0] = {g[0][0][by1], g[0][1][by2], g[0][2][bz1], g[0][3][bz2]};
      incumbent = best.value;
    } else {
      // Layer-1 inner stage depends on the outer variables only through
      // y2^(2); tabulate G(y2^(2)) with its achieving variables.
      std::vector<double> p2(n(1, 0)), p1(static_cast<size_t>(n(0, 0)) * n(1, 1));
      parallel_for(n(1, 0), threads, [&](int i) {
        p2[i] = psi_layer(g[1][0][i], model.beta, rho[1], model.layers[1].activation, rules, 1);
      });
      parallel_for(n(0, 0) * n(1, 1), threads, [&](int ij) {
        p1[ij] = psi_layer(g[0][0][ij / n(1, 1)], g[1][1][ij % n(1, 1)], rho[0],
                           model.layers[0].activation, rules, 1);
      });
      const double a0 = model.alpha(0), a1 = model.alpha(1), a2 = model.alpha(2);
      std::vector<double> G(n(1, 1));
      std::vector<LayerVars> Garg(n(1, 1));
      parallel_for(n(1, 1), threads, [&](int j2) {
        ArgOpt best{-std::numeric_limits<double>::infinity(), 0};
        LayerVars arg;
        for (int iz1 = 0; iz1 < n(0, 2); ++iz1) {
          const double z1 = g[0][2][iz1];
          auto m1 = min_over(
              n(0, 0), [&](int i) { return a1 * p1[static_cast<size_t>(i) * n(1, 1) + j2] - z1 * g[0][0][i]; });
          for (int iz2 = 0; iz2 < n(0, 3); ++iz2) {
            const double z2 = g[0][3][iz2];
            auto m0 = min_over(n(0, 1), [&](int j) { return p0[j] - z2 * g[0][1][j]; });
            double v = m1.value + m0.value + hamiltonian(z1, z2, a0);
            if (v > best.value) {
              best = {v, 0};
              arg = {g[0][0][m1.index], g[0][1][m0.index], z1, z2};
            }
          }
        }
        G[j2] = best.value;
        Garg[j2] = arg;
      });

      ArgOpt best{-std::numeric_limits<double>::infinity(), 0};
      LayerVars arg2;
      int bj2 = 0;
      for (int iz1 = 0; iz1 < n(1, 2); ++iz1) {
        const double z1 = g[1][2][iz1];
        auto m1 = min_over(n(1, 0), [&](int i) { return a2 * p2[i] - z1 * g[1][0][i]; });
        for (int iz2 = 0; iz2 < n(1, 3); ++iz2) {
          const double z2 = g[1][3][iz2];
          auto m0 = min_over(n(1, 1), [&](int j) {
            return G[j] + a1 / 2.0 * (1.0 + rho[1] * g[1][1][j]) - z2 * g[1][1][j];
          });
          double v = m1.value + m0.value + hamiltonian(z1, z2, a1);
          if (v > best.value) {
            best = {v, 0};
            arg2 = {g[1][0][m1.index], g[1][1][m0.index], z1, z2};
            bj2 = m0.index;
          }
        }
      }
      inc.layers[1] = arg2;
      inc.layers[0] = Garg[bj2];
      incumbent = best.value;
    }
    history.push_back(incumbent);

    if (round < refine_rounds) {
      for (int l = 0; l < L; ++l) {
        const LayerVars& v = inc.layers[l];
        axis[l][0].refine(v.y1);
        axis[l][1].refine(v.y2);
        axis[l][2].refine(v.z1);
        axis[l][3].refine(v.z2);
      }
    }
  }

  SaddlePointResult out;
  out.vars = inc;
  out.method = SaddleMethod::kGrid;
  out.iterations = refine_rounds;
  out.history = history;
  // Cap touch = incumbent within one local cell of a truncation bound.
  for (int l = 0; l < L; ++l) {
    double cell_y2 = axis[l][1].spacing_near(g[l][1], inc.layers[l].y2);
    double cell_z1 = axis[l][2].spacing_near(g[l][2], inc.layers[l].z1);
    if (inc.layers[l].y2 >= caps.y_max - cell_y2 - 1e-15)
      throw NumericError("solve_grid: optimum touches the Y_MAX truncation at layer " +
                         std::to_string(l + 1) + "; raise y_max");
    if (inc.layers[l].z1 >= caps.r_cap - cell_z1 - 1e-15)
      throw NumericError("solve_grid: optimum touches the R_CAP truncation at layer " +
                         std::to_string(l + 1) + "; raise r_cap");
  }
  out.residual =
      stationarity_map(inc, model, rho, rules, prior_rule, caps, opts.fd_step, threads).residual;
  out.value = phi_objective(inc, model, rho, rules, prior_rule, opts);
  return out;
}

}  // namespace mlglm

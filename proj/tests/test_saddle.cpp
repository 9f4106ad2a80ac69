#include <doctest.h>

#include <cmath>

#include "mlglm/errors.hpp"
#include "mlglm/recursion.hpp"
#include "mlglm/saddle.hpp"

using namespace mlglm;

namespace {
ModelSpec tanh_model(double beta, std::vector<double> alphas) {
  ModelSpec m;
  m.prior = PriorSpec::rademacher();
  m.beta = beta;
  for (double a : alphas) m.layers.push_back({a, {ActivationKind::kScaledTanh, 1.0, {}}});
  return m;
}

SaddleVariables zeros(int L) {
  SaddleVariables v;
  v.layers.resize(L);
  return v;
}
}  // namespace

TEST_CASE("hamiltonian formula") {
  CHECK(hamiltonian(1.0, 1.0, 1.0) == 2.0);
  CHECK(hamiltonian(0.0, 123.4, 0.7) == 0.0);
  CHECK(hamiltonian(2.0, 3.0, 4.0) == 3.0);
}

TEST_CASE("objective at the origin: beta = 0 closed forms") {
  const auto& rules = default_psi_rules();
  const auto& prior_rule = default_prior_rule();
  {
    auto m = tanh_model(0.0, {0.8});
    auto rho = compute_rho(m);
    double v = phi_objective(zeros(1), m, rho, rules, prior_rule);
    CHECK(v == doctest::Approx(-0.4).epsilon(1e-10));  // -alpha_1 / 2
  }
  {
    auto m = tanh_model(0.0, {0.5, 1.5});
    auto rho = compute_rho(m);
    double v = phi_objective(zeros(2), m, rho, rules, prior_rule);
    CHECK(v == doctest::Approx(-0.75).epsilon(1e-10));  // -alpha_2 / 2
  }
}

TEST_CASE("coupling terms are plain bilinear bookkeeping") {
  auto m = tanh_model(1.0, {1.0});
  auto rho = compute_rho(m);
  const auto& rules = default_psi_rules();
  const auto& prior_rule = default_prior_rule();
  SaddleVariables v = zeros(1);
  v.layers[0] = {0.3, 0.4, 0.2, 0.1};
  SaddleVariables w = v;
  w.layers[0].z1 *= 2.0;
  w.layers[0].z2 *= 2.0;
  double fv = phi_objective(v, m, rho, rules, prior_rule);
  double fw = phi_objective(w, m, rho, rules, prior_rule);
  // doubling z changes only -y.z + 2 z1 z2 (alpha_0 = 1)
  auto coupling = [&](const LayerVars& l) {
    return -(l.y1 * l.z1 + l.y2 * l.z2) + 2.0 * l.z1 * l.z2;
  };
  CHECK(fw - fv == doctest::Approx(coupling(w.layers[0]) - coupling(v.layers[0])).epsilon(1e-12));
}

TEST_CASE("objective rejects out-of-box variables") {
  auto m = tanh_model(1.0, {1.0});
  auto rho = compute_rho(m);
  SaddleVariables v = zeros(1);
  v.layers[0].y1 = rho[0] * 1.5;
  CHECK_THROWS_AS(phi_objective(v, m, rho, default_psi_rules(), default_prior_rule()),
                  NumericError);
  SaddleVariables w = zeros(1);
  w.layers[0].z2 = rho[0];  // above alpha_0 rho_0 / 2
  CHECK_THROWS_AS(phi_objective(w, m, rho, default_psi_rules(), default_prior_rule()),
                  NumericError);
}

TEST_CASE("beta = 0 fixed point lands on the closed form") {
  for (auto alphas : {std::vector<double>{1.0}, std::vector<double>{0.5, 1.5}}) {
    auto m = tanh_model(0.0, alphas);
    auto rho = compute_rho(m);
    SaddleOptions opts;
    opts.seed = 11;
    auto r = solve_fixed_point(m, rho, 0.5, 1e-7, 400, 3, opts);
    CHECK(r.value == doctest::Approx(-alphas.back() / 2.0).epsilon(1e-5));
    CHECK(r.residual < 1e-7);
    CHECK(r.restarts_agree);
    // stationarity map sends 0 to 0 at beta = 0
    for (const auto& l : r.vars.layers) {
      CHECK(std::abs(l.y2) < 1e-5);
      CHECK(std::abs(l.z1) < 1e-5);
    }
  }
}

TEST_CASE("beta = 0 grid solve lands on the closed form") {
  auto m = tanh_model(0.0, {1.0});
  auto rho = compute_rho(m);
  auto r = solve_grid(m, rho, 16, 3);
  CHECK(r.value == doctest::Approx(-0.5).epsilon(2e-3));
  CHECK(r.method == SaddleMethod::kGrid);
}

TEST_CASE("reported value re-evaluates bit-for-bit") {
  auto m = tanh_model(0.5, {1.0});
  auto rho = compute_rho(m);
  SaddleOptions opts;
  opts.seed = 3;
  auto r = solve_fixed_point(m, rho, 0.5, 1e-6, 300, 2, opts);
  double again = phi_objective(r.vars, m, rho, default_psi_rules(), default_prior_rule(), opts);
  CHECK(r.value == again);
  auto g = solve_grid(m, rho, 16, 2, opts);
  double gagain = phi_objective(g.vars, m, rho, default_psi_rules(), default_prior_rule(), opts);
  CHECK(g.value == gagain);
}

TEST_CASE("box constraints hold exactly on returned points") {
  auto m = tanh_model(1.0, {1.0});
  auto rho = compute_rho(m);
  SaddleOptions opts;
  opts.seed = 5;
  auto r = solve_fixed_point(m, rho, 0.5, 1e-6, 300, 2, opts);
  double cap = default_cap(m, rho);
  for (const auto& l : r.vars.layers) {
    CHECK(l.y1 >= 0.0);
    CHECK(l.y1 <= rho[0]);
    CHECK(l.y2 >= 0.0);
    CHECK(l.y2 <= cap);
    CHECK(l.z1 >= 0.0);
    CHECK(l.z1 <= cap);
    CHECK(l.z2 >= 0.0);
    CHECK(l.z2 <= rho[0] / 2.0);
  }
  // converged point satisfies all four stationarity relations
  CHECK(stationarity_residual(r.vars, m, rho, default_psi_rules(), default_prior_rule(), opts) <=
        1e-6);
}

TEST_CASE("damping 1.0 and 0.5 converge to the same fixed point") {
  auto m = tanh_model(0.5, {1.0});
  auto rho = compute_rho(m);
  SaddleOptions opts;
  opts.seed = 7;
  auto a = solve_fixed_point(m, rho, 0.5, 1e-7, 400, 2, opts);
  try {
    auto b = solve_fixed_point(m, rho, 1.0, 1e-7, 400, 2, opts);
    CHECK(std::abs(a.value - b.value) < 1e-6);
    for (size_t l = 0; l < a.vars.layers.size(); ++l) {
      CHECK(std::abs(a.vars.layers[l].y1 - b.vars.layers[l].y1) < 2e-6);
      CHECK(std::abs(a.vars.layers[l].z2 - b.vars.layers[l].z2) < 2e-6);
    }
  } catch (const NonConvergenceError& e) {
    // undamped divergence is a reported outcome, not a failure
    MESSAGE("undamped iteration did not converge (residual ", e.best_residual, ")");
  }
}

TEST_CASE("grid refinement history contracts") {
  auto m = tanh_model(0.5, {1.0});
  auto rho = compute_rho(m);
  auto r = solve_grid(m, rho, 24, 3);
  REQUIRE(r.history.size() == 4);
  double prev = std::abs(r.history[1] - r.history[0]);
  for (size_t k = 2; k < r.history.size(); ++k) {
    double cur = std::abs(r.history[k] - r.history[k - 1]);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("cheap cross-method agreement") {
  auto m = tanh_model(0.5, {1.0});
  auto rho = compute_rho(m);
  SaddleOptions opts;
  opts.seed = 13;
  auto fp = solve_fixed_point(m, rho, 0.5, 1e-7, 400, 2, opts);
  auto gr = solve_grid(m, rho, 32, 3, opts);
  CHECK(std::abs(fp.value - gr.value) < 3e-3);
}

TEST_CASE("method preconditions") {
  auto m = tanh_model(1.0, {1.0, 1.0, 1.0});
  auto rho = compute_rho(m);
  CHECK_THROWS_WITH_AS(solve_grid(m, rho, 16, 2),
                       doctest::Contains("use solve_fixed_point"), ConfigError);
  auto m1 = tanh_model(1.0, {1.0});
  auto rho1 = compute_rho(m1);
  CHECK_THROWS_AS(solve_grid(m1, rho1, 4, 2), ConfigError);
  CHECK_THROWS_AS(solve_fixed_point(m1, rho1, 0.0, 1e-7, 100, 2), ConfigError);
  CHECK_THROWS_AS(solve_fixed_point(m1, rho1, 1.5, 1e-7, 100, 2), ConfigError);
}

TEST_CASE("non-convergence carries the best residual") {
  auto m = tanh_model(1.0, {1.0});
  auto rho = compute_rho(m);
  SaddleOptions opts;
  opts.seed = 17;
  try {
    solve_fixed_point(m, rho, 0.5, 1e-13, 3, 2, opts);  // impossible budget
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.best_residual > 0.0);
    CHECK(std::isfinite(e.best_residual));
  }
}

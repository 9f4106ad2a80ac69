#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mlglm/model.hpp"
#include "mlglm/potentials.hpp"

namespace mlglm {

// Per-layer optimization variables of the nested sup-inf:
//   y^(l) in [0, rho_{l-1}] x [0, Y_MAX],
//   z^(l) in [0, R_CAP] x [0, alpha_{l-1} rho_{l-1} / 2].
struct LayerVars {
  double y1 = 0.0, y2 = 0.0, z1 = 0.0, z2 = 0.0;
};

struct SaddleVariables {
  std::vector<LayerVars> layers;
};

enum class SaddleMethod { kGrid, kFixedPoint };

struct SaddlePointResult {
  SaddleVariables vars;
  double value = 0.0;
  SaddleMethod method = SaddleMethod::kFixedPoint;
  double residual = 0.0;  // max stationarity violation at the returned point
  int iterations = 0;
  // Grid: incumbent value per refinement round. Fixed point: value per
  // converged restart.
  std::vector<double> history;
  // Fixed point only: spread of converged restart values; flagged when the
  // restarts disagree beyond 1e-5.
  double restart_spread = 0.0;
  bool restarts_agree = true;
  std::vector<std::string> diagnostics;
};

struct SaddleOptions {
  double y_max = -1.0;  // <= 0: 8 * max(beta,1) * max alpha * max rho
  double r_cap = -1.0;  // same default
  double fd_step = 1e-4;
  int threads = -1;
  std::uint64_t seed = 1;
};

// H_L(p) = (2 / alpha) p1 p2.
double hamiltonian(double p1, double p2, double alpha);

double default_cap(const ModelSpec& model, const RhoSequence& rho);

// The objective of the variational formula. Validates the box constraints.
double phi_objective(const SaddleVariables& vars, const ModelSpec& model,
                     const RhoSequence& rho, const PsiRules& rules,
                     const GaussHermiteRule& prior_rule, const SaddleOptions& opts = {});

// Max violation of the four stationarity relations at `vars` (derivatives by
// finite differences, updates projected onto the boxes).
double stationarity_residual(const SaddleVariables& vars, const ModelSpec& model,
                             const RhoSequence& rho, const PsiRules& rules,
                             const GaussHermiteRule& prior_rule, const SaddleOptions& opts = {});

// Nested alternation over a product grid with local refinement. L <= 2 only;
// cost grows as resolution^(4L).
SaddlePointResult solve_grid(const ModelSpec& model, const RhoSequence& rho,
                             int resolution = 16, int refine_rounds = 3,
                             const SaddleOptions& opts = {});

// Damped iteration of the first-order stationarity map with projection and
// uniform random restarts; returns the best converged restart.
SaddlePointResult solve_fixed_point(const ModelSpec& model, const RhoSequence& rho,
                                    double damping = 0.5, double tol = 1e-7,
                                    int max_iter = 400, int n_restarts = 8,
                                    const SaddleOptions& opts = {});

}  // namespace mlglm

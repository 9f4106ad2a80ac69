#pragma once

#include "mlglm/model.hpp"
#include "mlglm/quadrature.hpp"

namespace mlglm {

// Quadrature rules backing the layer potential: a 3-D tensor rule for the
// (V, W, Z) expectation and a 1-D rule for the w-integral inside the log.
struct PsiRules {
  GaussHermiteRule outer;
  GaussHermiteRule inner;
};

// Orders 40 (outer) / 60 (inner); doubling either changes Psi values by
// less than 1e-9 on the test corpus.
const PsiRules& default_psi_rules();

// Order-80 rule for Psi_0.
const GaussHermiteRule& default_prior_rule();

struct PotentialPoint {
  double h1 = 0.0;
  double h2 = 0.0;
  double rho = 1.0;
};

// Scalar channel density P~_{h2}(y | z) = sum_a w_a exp(-(y - sqrt(h2) phi(z,a))^2 / 2).
double channel_density(double y, double z, double h2, const ActivationSpec& act);

// Psi_0(r) = E log int exp(r X x + sqrt(r) Z' x - r x^2 / 2) dP_X(x).
// Returns exact 0 at r = 0.
double psi0(double r, const PriorSpec& prior, const GaussHermiteRule& rule);

// One-sided at r near 0; step is relative (see psi_partial).
double psi0_prime(double r, const PriorSpec& prior, const GaussHermiteRule& rule,
                  double step = 1e-4);

// Psi_l(h; rho) for h = (h1, h2) in [0, rho] x [0, 1e4]. Takes the collapsed
// 2-D path when h1 == rho. Parallelizes over outer nodes; thread count does
// not affect the result.
double psi_layer(double h1, double h2, double rho, const ActivationSpec& act,
                 const PsiRules& rules, int threads = -1);

enum class PsiVar { kH1, kH2 };

// Central finite difference of psi_layer, one-sided (three-point) at box
// edges. `step` is relative: the absolute step is step * rho for h1 and
// step * max(1, |h2|) for h2.
double psi_partial(PsiVar which, const PotentialPoint& point, const ActivationSpec& act,
                   const PsiRules& rules, double step = 1e-4, int threads = -1);

namespace detail {
// Full 3-D + inner-integral path regardless of h1 (test hook for the
// collapsed-path cross-check).
double psi_layer_general(double h1, double h2, double rho, const ActivationSpec& act,
                         const PsiRules& rules, int threads);
double psi_layer_collapsed(double h2, double rho, const ActivationSpec& act,
                           const PsiRules& rules, int threads);
}  // namespace detail

}  // namespace mlglm

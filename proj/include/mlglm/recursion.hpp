#pragma once

#include "mlglm/model.hpp"
#include "mlglm/quadrature.hpp"

namespace mlglm {

// rho_0 = E X_1^2, rho_l = E phi_l(sqrt(rho_{l-1}) G, A)^2 with G standard
// normal and A the layer's side information. Throws NumericError when any
// entry degenerates to <= 1e-14 (inadmissible model).
RhoSequence compute_rho(const ModelSpec& model, const GaussHermiteRule& rule);

// Same with the default order-200 rule.
RhoSequence compute_rho(const ModelSpec& model);

}  // namespace mlglm

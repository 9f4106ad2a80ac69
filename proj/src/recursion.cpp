#include "mlglm/recursion.hpp"

#include <cmath>
#include <string>

#include "mlglm/errors.hpp"

namespace mlglm {

RhoSequence compute_rho(const ModelSpec& model, const GaussHermiteRule& rule) {
  model.validate();
  RhoSequence rho;
  rho.values.push_back(model.prior.second_moment());
  for (int l = 1; l <= model.num_layers(); ++l) {
    const auto& act = model.layers[l - 1].activation;
    const double scale = std::sqrt(rho.values.back());
    double v = 0.0;
    if (act.deterministic()) {
      for (int i = 0; i < rule.order; ++i) {
        double p = act.value(scale * rule.nodes[i]);
        v += rule.weights[i] * p * p;
      }
    } else {
      for (const auto& a : act.side_info) {
        double va = 0.0;
        for (int i = 0; i < rule.order; ++i) {
          double p = act.value(scale * rule.nodes[i], a);
          va += rule.weights[i] * p * p;
        }
        v += a.weight * va;
      }
    }
    rho.values.push_back(v);
  }
  for (int l = 0; l < rho.size(); ++l)
    if (rho.values[l] <= 1e-14)
      throw NumericError("compute_rho: rho_" + std::to_string(l) +
                         " = " + std::to_string(rho.values[l]) + " is degenerate");
  return rho;
}

RhoSequence compute_rho(const ModelSpec& model) {
  static const GaussHermiteRule rule = gh_rule(200);
  return compute_rho(model, rule);
}

}  // namespace mlglm

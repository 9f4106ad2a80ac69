#pragma once

#include <functional>
#include <vector>

namespace mlglm {

// Gauss-Hermite rule normalized for the standard normal density:
// sum_i w_i f(x_i) ~ E f(G), weights sum to 1, nodes symmetric about 0.
struct GaussHermiteRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Builds the rule by the Golub-Welsch eigendecomposition of the Jacobi
// matrix of the probabilists' Hermite recurrence. Valid for 2 <= order <= 512.
GaussHermiteRule gh_rule(int order);

// Tensor-product expectation of f over d <= 3 independent standard Gaussians.
// Throws NumericError if f is non-finite at any node tuple.
double gauss_expect(const std::function<double(const double*)>& f,
                    const GaussHermiteRule& rule, int dim);

}  // namespace mlglm

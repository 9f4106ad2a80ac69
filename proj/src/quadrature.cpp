#include "mlglm/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "mlglm/errors.hpp"

namespace mlglm {

GaussHermiteRule gh_rule(int order) {
  if (order < 2 || order > 512)
    throw ConfigError("gh_rule: order " + std::to_string(order) + " outside [2, 512]");

  // Probabilists' Hermite: a_k = 0, b_k = sqrt(k). First moment mu0 = 1
  // under the standard normal normalization.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order - 1);
  for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericError("gh_rule: eigensolver failed");

  GaussHermiteRule r;
  r.order = order;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    r.nodes[i] = es.eigenvalues()[i];
    double v0 = es.eigenvectors()(0, i);
    r.weights[i] = v0 * v0;
  }

  // Enforce the exact +/- symmetry of the rule; eigensolvers break it at
  // rounding level and downstream sign-flip invariants rely on it.
  for (int i = 0; i < order / 2; ++i) {
    int j = order - 1 - i;
    double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    double w = 0.5 * (r.weights[i] + r.weights[j]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = w;
  }
  if (order % 2 == 1) r.nodes[order / 2] = 0.0;

  double wsum = 0.0;
  for (double w : r.weights) wsum += w;
  for (double& w : r.weights) w /= wsum;
  return r;
}

double gauss_expect(const std::function<double(const double*)>& f,
                    const GaussHermiteRule& rule, int dim) {
  if (dim < 1 || dim > 3) throw ConfigError("gauss_expect: dim must be in {1,2,3}");
  const int m = rule.order;
  double acc = 0.0;
  double x[3];
  auto eval = [&](double w) {
    double v = f(x);
    if (!std::isfinite(v)) throw NumericError("gauss_expect: non-finite integrand value at a node");
    acc += w * v;
  };
  if (dim == 1) {
    for (int i = 0; i < m; ++i) {
      x[0] = rule.nodes[i];
      eval(rule.weights[i]);
    }
  } else if (dim == 2) {
    for (int i = 0; i < m; ++i) {
      x[0] = rule.nodes[i];
      for (int j = 0; j < m; ++j) {
        x[1] = rule.nodes[j];
        eval(rule.weights[i] * rule.weights[j]);
      }
    }
  } else {
    for (int i = 0; i < m; ++i) {
      x[0] = rule.nodes[i];
      for (int j = 0; j < m; ++j) {
        x[1] = rule.nodes[j];
        double wij = rule.weights[i] * rule.weights[j];
        for (int k = 0; k < m; ++k) {
          x[2] = rule.nodes[k];
          eval(wij * rule.weights[k]);
        }
      }
    }
  }
  return acc;
}

}  // namespace mlglm

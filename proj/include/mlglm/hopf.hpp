#pragma once

#include <string>
#include <vector>

#include "mlglm/model.hpp"
#include "mlglm/potentials.hpp"

namespace mlglm {

// Omega_rho = {(t, h1, h2) in R^3_+ : h1 <= rho (1 - t), t <= 1}.
struct DomainOmega {
  double rho = 1.0;
  bool contains(double t, double h1, double h2, double tol = 1e-12) const {
    return t >= -tol && t <= 1.0 + tol && h2 >= -tol && h1 >= -tol &&
           h1 <= rho * (1.0 - t) + tol * rho;
  }
};

// One coordinate of the separable initial datum: convex, nondecreasing,
// Lipschitz on [0, hi]. Closed-form registry entries carry exact conjugates;
// tables are piecewise linear with knot-exact conjugates.
class SeparableComponent {
 public:
  struct Conjugate {
    double value;
    double argmax;
  };

  static SeparableComponent linear(double slope, double hi);
  static SeparableComponent quadratic(double curvature, double hi);
  static SeparableComponent sqrt1p(double scale, double hi);      // scale (sqrt(1+y^2) - 1)
  static SeparableComponent log_cosh(double scale, double hi);    // scale log cosh y
  static SeparableComponent table(std::vector<double> ys, std::vector<double> vals);

  double operator()(double y) const;
  // sup_{y in [0, hi]} (z y - psi(y)), with the leftmost achieving y.
  Conjugate conjugate(double z) const;
  double slope_max() const;  // Lipschitz constant on [0, hi]
  double domain_hi() const { return hi_; }

  // Sampled-grid checks: nondecreasing, convex (second differences >= -1e-9
  // on the natural scale), finite.
  void validate(const std::string& path) const;

 private:
  enum class Kind { kLinear, kQuadratic, kSqrt1p, kLogCosh, kTable };
  Kind kind_ = Kind::kLinear;
  double a_ = 0.0;
  double hi_ = 0.0;
  std::vector<double> ys_, vs_, slopes_;  // table form
};

struct SeparableInitialData {
  SeparableComponent psi1;  // on [0, rho]
  SeparableComponent psi2;  // on [0, y_max]
  double alpha = 1.0;       // the alpha_{L-1} entering H_L and the z2 box
  double rho = 1.0;

  double psi(double y1, double y2) const { return psi1(y1) + psi2(y2); }
  // Component checks plus slope(psi2) <= alpha rho / 2 + 1e-9.
  void validate() const;
};

// Registry of closed-form initial data for the verifier test-bed.
// Names: "linear", "quadratic", "sqrt1p", "logcosh".
SeparableInitialData registry_data(const std::string& name, double alpha, double rho,
                                   double y_max);
std::vector<std::string> registry_names();

// psi1 = alpha_1 Psi_1(., beta; rho_0), psi2 = Psi_0, tabulated; the L = 1
// initial datum whose Hopf solution at (1, 0) is the variational limit.
SeparableInitialData make_potential_data(const ModelSpec& model, const RhoSequence& rho,
                                         int knots1, int knots2, double y_max,
                                         const PsiRules& rules, const GaussHermiteRule& prior_rule,
                                         int threads = -1);

struct HopfValue {
  double f = 0.0;
  double z1 = 0.0, z2 = 0.0;  // achieving sup point
  double y1 = 0.0, y2 = 0.0;  // achieving inf point (conjugate argmax)
};

// f(t,x) = sup_{z in [0,R] x [0, alpha rho / 2]} { z . x - psi1*(z1) - psi2*(z2)
//          + t H_L(z) }, the conjugates over y1 in [0, rho], y2 in [0, y_max].
// z2 by grid + golden refinement, z1 by golden section (concave inner stage).
// Errors when (t,x) leaves Omega_rho or the optimum rides a truncation cap.
HopfValue hopf_evaluate(double t, double x1, double x2, const SeparableInitialData& data,
                        double r_cap, int inner_grid = 129);

// Tabulated Hopf solution on a grid uniform in (t, h1 / (rho (1-t)), h2), so
// the slanted boundary face is a fixed grid face.
struct HopfField {
  int nt = 0, nh1 = 0, nh2 = 0;
  double rho = 0.0, alpha = 0.0, h2_max = 0.0;
  std::vector<double> t, xi, h2;  // axes; h1(i,j) = rho (1 - t[i]) xi[j]
  std::vector<double> f;          // [it][j][k]

  double at(int it, int j, int k) const { return f[(static_cast<size_t>(it) * nh1 + j) * nh2 + k]; }
  double h1(int it, int j) const { return rho * (1.0 - t[it]) * xi[j]; }
};

HopfField build_hopf_field(const SeparableInitialData& data, int nt, int nh1, int nh2,
                           double h2_max, double r_cap, int inner_grid = 129, int threads = -1);

// Numerical checks of the three weak-solution conditions.
struct WeakSolutionReport {
  // (2): |d_t f - H_L(grad f)| at interior points, excluding a 2-cell band
  // around the slanted face h1 = rho (1 - t).
  double hj_residual_max = 0.0;
  double hj_residual_p95 = 0.0;
  int hj_points = 0;
  // (3): min rectangle increment over lambda in {1, 2, 4} cells.
  double partial_convexity_min = 0.0;
  // (1): central-difference derivative ranges and a Lipschitz estimate.
  double d1f_min = 0.0, d1f_max = 0.0;
  double d2f_min = 0.0, d2f_max = 0.0;
  double lipschitz = 0.0;
  // Monotonicity along grid lines (forward differences).
  double monotone1_min = 0.0, monotone2_min = 0.0;
  // Per-point |d_t f - H_L(grad f)| aligned with the field grid; NaN where
  // the stencil does not apply (boundary and excluded band).
  std::vector<double> residual_field;
};

WeakSolutionReport verify_weak_solution(const HopfField& field, int boundary_band = 2);

}  // namespace mlglm

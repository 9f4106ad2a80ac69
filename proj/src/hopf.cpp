#include "mlglm/hopf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlglm/errors.hpp"
#include "mlglm/saddle.hpp"
#include "mlglm/util.hpp"

namespace mlglm {

// -------------------------------------------------------- SeparableComponent

SeparableComponent SeparableComponent::linear(double slope, double hi) {
  SeparableComponent c;
  c.kind_ = Kind::kLinear;
  c.a_ = slope;
  c.hi_ = hi;
  return c;
}

SeparableComponent SeparableComponent::quadratic(double curvature, double hi) {
  SeparableComponent c;
  c.kind_ = Kind::kQuadratic;
  c.a_ = curvature;
  c.hi_ = hi;
  return c;
}

SeparableComponent SeparableComponent::sqrt1p(double scale, double hi) {
  SeparableComponent c;
  c.kind_ = Kind::kSqrt1p;
  c.a_ = scale;
  c.hi_ = hi;
  return c;
}

SeparableComponent SeparableComponent::log_cosh(double scale, double hi) {
  SeparableComponent c;
  c.kind_ = Kind::kLogCosh;
  c.a_ = scale;
  c.hi_ = hi;
  return c;
}

SeparableComponent SeparableComponent::table(std::vector<double> ys, std::vector<double> vals) {
  if (ys.size() < 2 || ys.size() != vals.size())
    throw ConfigError("SeparableComponent::table: need matching knot/value arrays (>= 2 knots)");
  SeparableComponent c;
  c.kind_ = Kind::kTable;
  c.hi_ = ys.back();
  c.ys_ = std::move(ys);
  c.vs_ = std::move(vals);
  c.slopes_.resize(c.ys_.size() - 1);
  for (size_t i = 0; i + 1 < c.ys_.size(); ++i) {
    double dy = c.ys_[i + 1] - c.ys_[i];
    if (!(dy > 0.0)) throw ConfigError("SeparableComponent::table: knots must be strictly increasing");
    c.slopes_[i] = (c.vs_[i + 1] - c.vs_[i]) / dy;
  }
  return c;
}

double SeparableComponent::operator()(double y) const {
  y = std::min(std::max(y, 0.0), hi_);
  switch (kind_) {
    case Kind::kLinear: return a_ * y;
    case Kind::kQuadratic: return 0.5 * a_ * y * y;
    case Kind::kSqrt1p: return a_ * (std::sqrt(1.0 + y * y) - 1.0);
    case Kind::kLogCosh: {
      // log cosh y = |y| + log1p(e^{-2|y|}) - log 2, overflow-safe
      double ay = std::abs(y);
      return a_ * (ay + std::log1p(std::exp(-2.0 * ay)) - 0.6931471805599453094);
    }
    case Kind::kTable: {
      auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
      size_t i = std::min<size_t>(std::max<std::ptrdiff_t>(it - ys_.begin() - 1, 0), ys_.size() - 2);
      return vs_[i] + slopes_[i] * (y - ys_[i]);
    }
  }
  return 0.0;
}

double SeparableComponent::slope_max() const {
  switch (kind_) {
    case Kind::kLinear: return a_;
    case Kind::kQuadratic: return a_ * hi_;
    case Kind::kSqrt1p: return a_ * hi_ / std::sqrt(1.0 + hi_ * hi_);
    case Kind::kLogCosh: return a_ * std::tanh(hi_);
    case Kind::kTable: {
      double m = 0.0;
      for (double s : slopes_) m = std::max(m, s);
      return m;
    }
  }
  return 0.0;
}

SeparableComponent::Conjugate SeparableComponent::conjugate(double z) const {
  // Leftmost maximizer of the concave map y -> z y - psi(y) on [0, hi].
  switch (kind_) {
    case Kind::kLinear: {
      if (z <= a_) return {0.0, 0.0};
      return {(z - a_) * hi_, hi_};
    }
    case Kind::kQuadratic: {
      double y = a_ > 0.0 ? std::min(std::max(z / a_, 0.0), hi_) : (z > 0.0 ? hi_ : 0.0);
      return {z * y - 0.5 * a_ * y * y, y};
    }
    case Kind::kSqrt1p: {
      double y;
      if (z <= 0.0) {
        y = 0.0;
      } else if (z >= slope_max()) {
        y = hi_;
      } else {
        y = std::min(z / std::sqrt(a_ * a_ - z * z), hi_);
      }
      return {z * y - (*this)(y), y};
    }
    case Kind::kLogCosh: {
      double y;
      if (z <= 0.0) {
        y = 0.0;
      } else if (z >= slope_max()) {
        y = hi_;
      } else {
        y = std::atanh(z / a_);
      }
      return {z * y - (*this)(y), y};
    }
    case Kind::kTable: {
      // First knot whose outgoing slope is >= z; exact for piecewise linear.
      size_t j = 0;
      while (j < slopes_.size() && slopes_[j] < z) ++j;
      return {z * ys_[j] - vs_[j], ys_[j]};
    }
  }
  return {0.0, 0.0};
}

void SeparableComponent::validate(const std::string& path) const {
  const int n = 129;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    double y = hi_ * i / (n - 1);
    v[i] = (*this)(y);
    if (!std::isfinite(v[i])) throw ConfigError(path + ": non-finite value at y = " + std::to_string(y));
  }
  double scale = std::max(1.0, std::abs(v[n - 1]) + std::abs(v[0]));
  for (int i = 0; i + 1 < n; ++i)
    if (v[i + 1] - v[i] < -1e-9 * scale)
      throw ConfigError(path + ": not nondecreasing on the sampled grid");
  for (int i = 0; i + 2 < n; ++i)
    if (v[i + 2] - 2.0 * v[i + 1] + v[i] < -1e-9 * scale)
      throw ConfigError(path + ": not convex on the sampled grid");
}

void SeparableInitialData::validate() const {
  if (!(rho > 0.0)) throw ConfigError("initial data: rho must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("initial data: alpha must be > 0");
  psi1.validate("psi1");
  psi2.validate("psi2");
  if (std::abs(psi1.domain_hi() - rho) > 1e-9 * rho)
    throw ConfigError("initial data: psi1 domain must be [0, rho]");
  if (psi2.slope_max() > alpha * rho / 2.0 + 1e-9)
    throw ConfigError("initial data: psi2 slope " + std::to_string(psi2.slope_max()) +
                      " exceeds alpha rho / 2 = " + std::to_string(alpha * rho / 2.0));
}

SeparableInitialData registry_data(const std::string& name, double alpha, double rho,
                                   double y_max) {
  const double cap2 = alpha * rho / 2.0;
  SeparableInitialData d;
  d.alpha = alpha;
  d.rho = rho;
  if (name == "linear") {
    d.psi1 = SeparableComponent::linear(0.7, rho);
    d.psi2 = SeparableComponent::linear(0.6 * cap2, y_max);
  } else if (name == "quadratic") {
    d.psi1 = SeparableComponent::quadratic(1.1 / rho, rho);
    d.psi2 = SeparableComponent::sqrt1p(0.8 * cap2, y_max);
  } else if (name == "sqrt1p") {
    d.psi1 = SeparableComponent::sqrt1p(1.3, rho);
    d.psi2 = SeparableComponent::sqrt1p(0.7 * cap2, y_max);
  } else if (name == "logcosh") {
    d.psi1 = SeparableComponent::log_cosh(1.2, rho);
    d.psi2 = SeparableComponent::log_cosh(0.9 * cap2, y_max);
  } else {
    throw ConfigError("unknown initial-data registry entry '" + name + "'");
  }
  d.validate();
  return d;
}

std::vector<std::string> registry_names() { return {"linear", "quadratic", "sqrt1p", "logcosh"}; }

SeparableInitialData make_potential_data(const ModelSpec& model, const RhoSequence& rho,
                                         int knots1, int knots2, double y_max,
                                         const PsiRules& rules, const GaussHermiteRule& prior_rule,
                                         int threads) {
  if (model.num_layers() != 1)
    throw ConfigError("make_potential_data: the tabulated initial datum is the L = 1 one");
  if (threads <= 0) threads = default_threads();
  const double rho0 = rho[0];
  const double a1 = model.alpha(1);

  std::vector<double> y1(knots1), v1(knots1);
  for (int i = 0; i < knots1; ++i) y1[i] = rho0 * i / (knots1 - 1);
  parallel_for(knots1, threads, [&](int i) {
    v1[i] = a1 * psi_layer(y1[i], model.beta, rho0, model.layers[0].activation, rules, 1);
  });

  std::vector<double> y2(knots2), v2(knots2);
  for (int i = 0; i < knots2; ++i) y2[i] = y_max * i / (knots2 - 1);
  parallel_for(knots2, threads, [&](int i) { v2[i] = psi0(y2[i], model.prior, prior_rule); });

  SeparableInitialData d;
  d.alpha = model.alpha(0);
  d.rho = rho0;
  d.psi1 = SeparableComponent::table(std::move(y1), std::move(v1));
  d.psi2 = SeparableComponent::table(std::move(y2), std::move(v2));
  d.validate();
  return d;
}

// -------------------------------------------------------------- hopf_evaluate

namespace {

constexpr double kGolden = 0.6180339887498948482;

// Golden-section maximization on [lo, hi]; f unimodal (concave stages are).
template <class F>
double golden_max(F&& f, double lo, double hi, int iters) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace

HopfValue hopf_evaluate(double t, double x1, double x2, const SeparableInitialData& data,
                        double r_cap, int inner_grid) {
  DomainOmega omega{data.rho};
  if (!omega.contains(t, x1, x2))
    throw NumericError("hopf_evaluate: (t, x) outside Omega_rho");
  if (inner_grid < 9) throw ConfigError("hopf_evaluate: inner_grid must be >= 9");
  if (!(r_cap > 0.0)) throw ConfigError("hopf_evaluate: r_cap must be > 0");

  const double z2_hi = data.alpha * data.rho / 2.0;
  const double coef = 2.0 * t / data.alpha;

  // Inner stage: sup_{z1} { z1 (x1 + coef z2) - psi1*(z1) }, concave in z1.
  auto inner_at = [&](double z2, double* z1_out) {
    const double u = x1 + coef * z2;
    auto g = [&](double z1) { return z1 * u - data.psi1.conjugate(z1).value; };
    double z1 = golden_max(g, 0.0, r_cap, 64);
    double best = g(z1);
    // Kinked conjugates put the max at an endpoint; compare explicitly.
    if (g(0.0) >= best) {
      z1 = 0.0;
      best = g(0.0);
    }
    if (z1_out) *z1_out = z1;
    return best;
  };
  auto outer_at = [&](double z2) { return z2 * x2 - data.psi2.conjugate(z2).value + inner_at(z2, nullptr); };

  // z2: grid pass, then golden refinement around every local maximum.
  const int m = inner_grid;
  std::vector<double> zs(m), gs(m);
  for (int i = 0; i < m; ++i) {
    zs[i] = z2_hi * i / (m - 1);
    gs[i] = outer_at(zs[i]);
  }
  double best_z2 = zs[0], best_g = gs[0];
  for (int i = 0; i < m; ++i) {
    bool local_max = (i == 0 || gs[i] >= gs[i - 1]) && (i == m - 1 || gs[i] >= gs[i + 1]);
    if (!local_max) continue;
    double lo = zs[std::max(i - 1, 0)];
    double hi = zs[std::min(i + 1, m - 1)];
    double z2 = lo < hi ? golden_max(outer_at, lo, hi, 56) : zs[i];
    double g = outer_at(z2);
    if (g > best_g) {
      best_g = g;
      best_z2 = z2;
    }
    if (gs[i] > best_g) {
      best_g = gs[i];
      best_z2 = zs[i];
    }
  }

  HopfValue out;
  out.f = best_g;
  out.z2 = best_z2;
  inner_at(best_z2, &out.z1);
  out.y1 = data.psi1.conjugate(out.z1).argmax;
  auto c2 = data.psi2.conjugate(best_z2);
  out.y2 = c2.argmax;

  // Truncation soundness: the optimum may sit on a cap only if the objective
  // is flat there (plateau), never if it is still climbing.
  if (out.z1 >= r_cap * (1.0 - 1e-6)) {
    const double u = x1 + coef * best_z2;
    double g_cap = r_cap * u - data.psi1.conjugate(r_cap).value;
    double g_in = (r_cap * 0.995) * u - data.psi1.conjugate(r_cap * 0.995).value;
    if (g_cap - g_in > 1e-10 * (1.0 + std::abs(g_cap)))
      throw NumericError("hopf_evaluate: sup rides the R_cap truncation; raise r_cap");
  }
  if (out.y2 >= data.psi2.domain_hi() * (1.0 - 1e-9) && best_z2 > data.psi2.slope_max() + 1e-9)
    throw NumericError("hopf_evaluate: inf rides the Y_MAX truncation; raise the psi2 domain");
  return out;
}

HopfField build_hopf_field(const SeparableInitialData& data, int nt, int nh1, int nh2,
                           double h2_max, double r_cap, int inner_grid, int threads) {
  if (nt < 3 || nh1 < 3 || nh2 < 3) throw ConfigError("build_hopf_field: need >= 3 points per axis");
  data.validate();
  if (threads <= 0) threads = default_threads();

  HopfField field;
  field.nt = nt;
  field.nh1 = nh1;
  field.nh2 = nh2;
  field.rho = data.rho;
  field.alpha = data.alpha;
  field.h2_max = h2_max;
  field.t.resize(nt);
  field.xi.resize(nh1);
  field.h2.resize(nh2);
  for (int i = 0; i < nt; ++i) field.t[i] = static_cast<double>(i) / (nt - 1);
  for (int j = 0; j < nh1; ++j) field.xi[j] = static_cast<double>(j) / (nh1 - 1);
  for (int k = 0; k < nh2; ++k) field.h2[k] = h2_max * k / (nh2 - 1);

  field.f.resize(static_cast<size_t>(nt) * nh1 * nh2);
  parallel_for(nt * nh1, threads, [&](int ij) {
    const int it = ij / nh1, j = ij % nh1;
    const double t = field.t[it];
    const double h1 = field.h1(it, j);
    for (int k = 0; k < nh2; ++k) {
      auto hv = hopf_evaluate(t, h1, field.h2[k], data, r_cap, inner_grid);
      field.f[(static_cast<size_t>(it) * nh1 + j) * nh2 + k] = hv.f;
    }
  });
  return field;
}

WeakSolutionReport verify_weak_solution(const HopfField& field, int boundary_band) {
  const int nt = field.nt, n1 = field.nh1, n2 = field.nh2;
  if (n1 < 2 * boundary_band + 3)
    throw ConfigError("verify_weak_solution: h1 axis too coarse for the boundary band");
  const double dt = field.t[1] - field.t[0];
  const double dxi = field.xi[1] - field.xi[0];
  const double dh2 = field.h2[1] - field.h2[0];

  WeakSolutionReport r;
  r.partial_convexity_min = std::numeric_limits<double>::infinity();
  r.d1f_min = r.d2f_min = std::numeric_limits<double>::infinity();
  r.d1f_max = r.d2f_max = -std::numeric_limits<double>::infinity();
  r.monotone1_min = r.monotone2_min = std::numeric_limits<double>::infinity();

  std::vector<double> residuals;
  r.residual_field.assign(static_cast<size_t>(nt) * n1 * n2,
                          std::numeric_limits<double>::quiet_NaN());
  auto F = [&](int i, int j, int k) { return field.at(i, j, k); };

  for (int i = 1; i + 1 < nt; ++i) {
    const double t = field.t[i];
    const double width = field.rho * (1.0 - t);  // h1 extent of this slice
    for (int j = 1; j + 1 < n1; ++j) {
      const bool in_band = j + 1 >= n1 - boundary_band;  // near h1 = rho(1-t)
      for (int k = 1; k + 1 < n2; ++k) {
        // Grid-aligned central differences; chain rule maps the slanted
        // coordinates to (t, h1, h2) derivatives:
        //   d1 f = f_xi / (rho (1-t)),  dt f = f_tau + xi f_xi / (1-t).
        const double f_tau = (F(i + 1, j, k) - F(i - 1, j, k)) / (2.0 * dt);
        const double f_xi = (F(i, j + 1, k) - F(i, j - 1, k)) / (2.0 * dxi);
        const double f_h2 = (F(i, j, k + 1) - F(i, j, k - 1)) / (2.0 * dh2);
        const double d1 = width > 0.0 ? f_xi / width : 0.0;
        const double dtf = f_tau + field.xi[j] * f_xi / (1.0 - t);
        r.d1f_min = std::min(r.d1f_min, d1);
        r.d1f_max = std::max(r.d1f_max, d1);
        r.d2f_min = std::min(r.d2f_min, f_h2);
        r.d2f_max = std::max(r.d2f_max, f_h2);
        r.lipschitz = std::max({r.lipschitz, std::abs(dtf), std::abs(d1), std::abs(f_h2)});
        if (!in_band) {
          double res = std::abs(dtf - hamiltonian(d1, f_h2, field.alpha));
          residuals.push_back(res);
          r.residual_field[(static_cast<size_t>(i) * n1 + j) * n2 + k] = res;
        }
      }
    }
  }
  r.hj_points = static_cast<int>(residuals.size());
  if (!residuals.empty()) {
    std::sort(residuals.begin(), residuals.end());
    r.hj_residual_max = residuals.back();
    r.hj_residual_p95 = residuals[static_cast<size_t>(0.95 * (residuals.size() - 1))];
  }

  // Rectangle increments within each t-slice; lambda counted in grid cells.
  for (int lam : {1, 2, 4}) {
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j + lam < n1; ++j)
        for (int k = 0; k + lam < n2; ++k) {
          double inc = F(i, j + lam, k + lam) + F(i, j, k) - F(i, j + lam, k) - F(i, j, k + lam);
          r.partial_convexity_min = std::min(r.partial_convexity_min, inc);
        }
  }

  for (int i = 0; i < nt; ++i)
    for (int k = 0; k < n2; ++k)
      for (int j = 0; j + 1 < n1; ++j)
        r.monotone1_min = std::min(r.monotone1_min, F(i, j + 1, k) - F(i, j, k));
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k + 1 < n2; ++k)
        r.monotone2_min = std::min(r.monotone2_min, F(i, j, k + 1) - F(i, j, k));
  return r;
}

}  // namespace mlglm

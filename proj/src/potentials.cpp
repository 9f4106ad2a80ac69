#include "mlglm/potentials.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mlglm/errors.hpp"
#include "mlglm/util.hpp"

namespace mlglm {

namespace {
constexpr double kH2Cap = 1e4;

void check_point(double h1, double h2, double rho) {
  if (!(rho > 0.0)) throw NumericError("psi_layer: rho must be > 0");
  if (h1 < -1e-12 || h1 > rho * (1.0 + 1e-12))
    throw NumericError("psi_layer: h1 = " + std::to_string(h1) + " outside [0, rho = " +
                       std::to_string(rho) + "]");
  if (h2 < 0.0) throw NumericError("psi_layer: h2 must be >= 0");
  if (h2 > kH2Cap)
    throw NumericError("psi_layer: h2 = " + std::to_string(h2) +
                       " beyond the supported guard range (1e4)");
}

// Side-info atoms as (shift-free) value calls need the atom list; a
// deterministic activation behaves as one atom with weight 1.
struct AtomView {
  const SideInfoAtom* atom = nullptr;  // nullptr: deterministic
  double weight = 1.0;
};

std::vector<AtomView> atom_views(const ActivationSpec& act) {
  std::vector<AtomView> v;
  if (act.deterministic()) {
    v.push_back({nullptr, 1.0});
  } else {
    for (const auto& a : act.side_info) v.push_back({&a, a.weight});
  }
  return v;
}

inline double phi_at(const ActivationSpec& act, double z, const AtomView& a) {
  return a.atom ? act.value(z, *a.atom) : act.value(z);
}
}  // namespace

const PsiRules& default_psi_rules() {
  static const PsiRules rules{gh_rule(40), gh_rule(60)};
  return rules;
}

const GaussHermiteRule& default_prior_rule() {
  static const GaussHermiteRule rule = gh_rule(80);
  return rule;
}

double channel_density(double y, double z, double h2, const ActivationSpec& act) {
  if (h2 < 0.0) throw NumericError("channel_density: h2 must be >= 0");
  const double sh2 = std::sqrt(h2);
  double s = 0.0;
  for (const auto& a : atom_views(act)) {
    double d = y - sh2 * phi_at(act, z, a);
    s += a.weight * std::exp(-0.5 * d * d);
  }
  return s;
}

// ------------------------------------------------------------------- psi0

double psi0(double r, const PriorSpec& prior, const GaussHermiteRule& rule) {
  if (r < 0.0) throw NumericError("psi0: r must be >= 0");
  if (r == 0.0) return 0.0;  // integrand is identically 1
  const double sr = std::sqrt(r);
  const int na = static_cast<int>(prior.atoms.size());
  std::vector<double> logw(na), vals(na), e(na);
  for (int j = 0; j < na; ++j) {
    logw[j] = std::log(prior.atoms[j].weight);
    vals[j] = prior.atoms[j].value;
  }
  double acc = 0.0;
  for (int i = 0; i < na; ++i) {
    const double x1 = vals[i];
    double acc_z = 0.0;
    for (int iz = 0; iz < rule.order; ++iz) {
      const double z = rule.nodes[iz];
      for (int j = 0; j < na; ++j)
        e[j] = logw[j] + r * x1 * vals[j] + sr * z * vals[j] - 0.5 * r * vals[j] * vals[j];
      acc_z += rule.weights[iz] * log_sum_exp(e.data(), na);
    }
    acc += prior.atoms[i].weight * acc_z;
  }
  return acc;
}

double psi0_prime(double r, const PriorSpec& prior, const GaussHermiteRule& rule, double step) {
  if (step <= 0.0) throw NumericError("psi0_prime: step must be > 0");
  const double d = step * std::max(1.0, std::abs(r));
  if (r >= d) {
    return (psi0(r + d, prior, rule) - psi0(r - d, prior, rule)) / (2.0 * d);
  }
  // Three-point one-sided at the r = 0 edge.
  double f0 = psi0(r, prior, rule);
  double f1 = psi0(r + d, prior, rule);
  double f2 = psi0(r + 2.0 * d, prior, rule);
  return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * d);
}

// -------------------------------------------------------------- psi_layer

namespace detail {

// E over (V, W, Z, A) of log of the inner mixture
//   sum_{w-node k, atom a'} win_k w_{a'} exp(-(y* - q_{k,a'})^2 / 2),
// with y* = sqrt(h2) phi(sqrt(h1) V + sqrt(rho-h1) W, A) + Z and
// q_{k,a'} = sqrt(h2) phi(sqrt(h1) V + sqrt(rho-h1) w_k, a').
// Exponents are evaluated as y*q + c with the max subtracted before exp.
double psi_layer_general(double h1, double h2, double rho, const ActivationSpec& act,
                         const PsiRules& rules, int threads) {
  if (threads <= 0) threads = default_threads();
  const auto& outer = rules.outer;
  const auto& inner = rules.inner;
  const int mo = outer.order;
  const int mi = inner.order;
  const auto atoms = atom_views(act);
  const int na = static_cast<int>(atoms.size());
  const int K = mi * na;

  const double a = std::sqrt(std::max(h1, 0.0));
  const double b = std::sqrt(std::max(rho - h1, 0.0));
  const double sh2 = std::sqrt(h2);

  std::vector<double> partial(mo, 0.0);
  parallel_for(mo, threads, [&](int jv) {
    const double av = a * outer.nodes[jv];
    // Mixture centers and offsets for this V node.
    std::vector<double> q(K), c(K);
    for (int k = 0; k < mi; ++k) {
      const double s = av + b * inner.nodes[k];
      for (int ia = 0; ia < na; ++ia) {
        const double qv = sh2 * phi_at(act, s, atoms[ia]);
        q[k * na + ia] = qv;
        c[k * na + ia] = std::log(inner.weights[k] * atoms[ia].weight) - 0.5 * qv * qv;
      }
    }
    std::vector<double> args(K), ex(K);
    double acc = 0.0;
    for (int ia = 0; ia < na; ++ia) {
      double acc_a = 0.0;
      for (int jw = 0; jw < mo; ++jw) {
        const double S = av + b * outer.nodes[jw];
        const double F = sh2 * phi_at(act, S, atoms[ia]);
        double acc_w = 0.0;
        for (int jz = 0; jz < mo; ++jz) {
          const double y = F + outer.nodes[jz];
          double m = -std::numeric_limits<double>::infinity();
          for (int k = 0; k < K; ++k) {
            args[k] = y * q[k] + c[k];
            m = args[k] > m ? args[k] : m;
          }
          for (int k = 0; k < K; ++k) args[k] -= m;
          exp_batch(args.data(), ex.data(), K);
          double s = 0.0;
          for (int k = 0; k < K; ++k) s += ex[k];
          acc_w += outer.weights[jz] * (-0.5 * y * y + m + std::log(s));
        }
        acc_a += outer.weights[jw] * acc_w;
      }
      acc += atoms[ia].weight * acc_a;
    }
    partial[jv] = outer.weights[jv] * acc;
  });

  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// h1 == rho: the w-integral collapses and W drops out; 2-D (V, Z) quadrature.
double psi_layer_collapsed(double h2, double rho, const ActivationSpec& act,
                           const PsiRules& rules, int threads) {
  if (threads <= 0) threads = default_threads();
  const auto& outer = rules.outer;
  const int mo = outer.order;
  const auto atoms = atom_views(act);
  const int na = static_cast<int>(atoms.size());
  const double sr = std::sqrt(rho);
  const double sh2 = std::sqrt(h2);

  std::vector<double> partial(mo, 0.0);
  parallel_for(mo, threads, [&](int jv) {
    const double s = sr * outer.nodes[jv];
    std::vector<double> q(na), c(na), args(na), ex(na);
    for (int ia = 0; ia < na; ++ia) {
      q[ia] = sh2 * phi_at(act, s, atoms[ia]);
      c[ia] = std::log(atoms[ia].weight) - 0.5 * q[ia] * q[ia];
    }
    double acc = 0.0;
    for (int ia = 0; ia < na; ++ia) {
      double acc_a = 0.0;
      for (int jz = 0; jz < mo; ++jz) {
        const double y = q[ia] + outer.nodes[jz];
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < na; ++k) {
          args[k] = y * q[k] + c[k];
          m = args[k] > m ? args[k] : m;
        }
        for (int k = 0; k < na; ++k) args[k] -= m;
        exp_batch(args.data(), ex.data(), na);
        double ssum = 0.0;
        for (int k = 0; k < na; ++k) ssum += ex[k];
        acc_a += outer.weights[jz] * (-0.5 * y * y + m + std::log(ssum));
      }
      acc += atoms[ia].weight * acc_a;
    }
    partial[jv] = outer.weights[jv] * acc;
  });

  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace detail

double psi_layer(double h1, double h2, double rho, const ActivationSpec& act,
                 const PsiRules& rules, int threads) {
  check_point(h1, h2, rho);
  h1 = std::min(std::max(h1, 0.0), rho);
  if (h1 == rho) return detail::psi_layer_collapsed(h2, rho, act, rules, threads);
  return detail::psi_layer_general(h1, h2, rho, act, rules, threads);
}

double psi_partial(PsiVar which, const PotentialPoint& point, const ActivationSpec& act,
                   const PsiRules& rules, double step, int threads) {
  if (step <= 0.0) throw NumericError("psi_partial: step must be > 0");
  check_point(point.h1, point.h2, point.rho);
  auto eval = [&](double h1, double h2) { return psi_layer(h1, h2, point.rho, act, rules, threads); };

  if (which == PsiVar::kH1) {
    const double d = step * point.rho;
    if (point.h1 >= d && point.h1 + d <= point.rho)
      return (eval(point.h1 + d, point.h2) - eval(point.h1 - d, point.h2)) / (2.0 * d);
    const double sgn = point.h1 < d ? 1.0 : -1.0;  // forward at 0, backward at rho
    double f0 = eval(point.h1, point.h2);
    double f1 = eval(point.h1 + sgn * d, point.h2);
    double f2 = eval(point.h1 + 2.0 * sgn * d, point.h2);
    return sgn * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * d);
  }

  const double d = step * std::max(1.0, std::abs(point.h2));
  if (point.h2 >= d)
    return (eval(point.h1, point.h2 + d) - eval(point.h1, point.h2 - d)) / (2.0 * d);
  double f0 = eval(point.h1, point.h2);
  double f1 = eval(point.h1, point.h2 + d);
  double f2 = eval(point.h1, point.h2 + 2.0 * d);
  return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * d);
}

}  // namespace mlglm

#include "mlglm/simulate.hpp"

#include <cmath>
#include <string>

#include "mlglm/errors.hpp"
#include "mlglm/recursion.hpp"
#include "mlglm/rng.hpp"
#include "mlglm/util.hpp"

namespace mlglm {

namespace {

// Streaming log-sum-exp accumulator.
struct RunningLse {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;  // sum of exp(e - max)

  void add(double e) {
    if (e <= max) {
      sum += std::exp(e - max);
    } else {
      sum = sum * std::exp(max - e) + 1.0;
      max = e;
    }
  }
  double value() const { return max + std::log(sum); }
};

// Propagates the tail of the chain (layers 2..L) and returns the
// log observation density given the maintained first-layer product v1.
double log_density_from_v1(const ModelSpec& model, const std::vector<int>& sizes,
                           const ForwardSample& disorder, const Eigen::VectorXd& v1,
                           Eigen::VectorXd& scratch) {
  const int L = model.num_layers();
  const double sb = std::sqrt(model.beta);
  Eigen::VectorXd cur = v1 / std::sqrt(static_cast<double>(sizes[0]));
  for (int l = 1; l < L; ++l) {
    const auto& act = model.layers[l - 1].activation;
    scratch.resize(sizes[l]);
    for (int i = 0; i < sizes[l]; ++i) scratch[i] = act.value(cur[i]);
    cur = (disorder.matrix[l] * scratch) / std::sqrt(static_cast<double>(sizes[l]));
  }
  const auto& actL = model.layers[L - 1].activation;
  double ss = 0.0;
  for (int i = 0; i < sizes[L]; ++i) {
    double d = disorder.observation[i] - sb * actL.value(cur[i]);
    ss += d * d;
  }
  return -0.5 * ss;
}

}  // namespace

double exact_log_partition(const ModelSpec& model, int n, const ForwardSample& disorder) {
  model.validate();
  const int L = model.num_layers();
  for (int l = 0; l < L; ++l)
    if (!model.layers[l].activation.deterministic())
      throw ConfigError("exact_log_partition: layers[" + std::to_string(l) +
                        "] has side information; enumeration over A is unsupported");
  const int K = static_cast<int>(model.prior.atoms.size());
  if (n * std::log2(static_cast<double>(K)) > 24.0 + 1e-9)
    throw ConfigError("exact_log_partition: |support|^n exceeds the 2^24 state cap");
  const auto sizes = dims(model, n);
  if (disorder.matrix.empty() || disorder.matrix[0].cols() != n ||
      disorder.observation.size() != sizes[L])
    throw ConfigError("exact_log_partition: disorder does not match (model, n)");

  std::vector<double> vals(K), logw(K);
  for (int k = 0; k < K; ++k) {
    vals[k] = model.prior.atoms[k].value;
    logw[k] = std::log(model.prior.atoms[k].weight);
  }

  // State: all digits at 0.
  std::vector<int> digit(n, 0);
  Eigen::VectorXd v1 = Eigen::VectorXd::Zero(sizes[1]);
  double log_prior = 0.0;
  for (int j = 0; j < n; ++j) log_prior += logw[0];
  if (vals[0] != 0.0) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(n, vals[0]);
    v1 = disorder.matrix[0] * x0;
  }

  Eigen::VectorXd scratch;
  RunningLse lse;
  lse.add(log_prior + log_density_from_v1(model, sizes, disorder, v1, scratch));

  if (K > 1) {
    // Reflected mixed-radix Gray enumeration (Knuth 7.2.1.1 Algorithm H):
    // each step changes one digit by +-1, so v1 updates with one column.
    std::vector<int> focus(n + 1), dir(n, 1);
    for (int j = 0; j <= n; ++j) focus[j] = j;
    while (true) {
      int j = focus[0];
      focus[0] = 0;
      if (j == n) break;
      int old = digit[j];
      digit[j] += dir[j];
      if (digit[j] == 0 || digit[j] == K - 1) {
        dir[j] = -dir[j];
        focus[j] = focus[j + 1];
        focus[j + 1] = j + 1;
      }
      v1 += (vals[digit[j]] - vals[old]) * disorder.matrix[0].col(j);
      log_prior += logw[digit[j]] - logw[old];
      lse.add(log_prior + log_density_from_v1(model, sizes, disorder, v1, scratch));
    }
  }
  return lse.value();
}

FreeEnergyEstimate estimate_free_energy(const ModelSpec& model, int n, int replications,
                                        std::uint64_t seed, int threads) {
  if (replications < 2) throw ConfigError("estimate_free_energy: replications must be >= 2");
  if (threads <= 0) threads = default_threads();

  FreeEnergyEstimate est;
  est.n = n;
  est.replications = replications;
  est.seed = seed;
  est.values.resize(replications);
  parallel_for(replications, threads, [&](int rep) {
    auto disorder =
        sample_forward(model, n, mix_seed(seed, {kTagReplication, static_cast<std::uint64_t>(rep)}));
    est.values[rep] = exact_log_partition(model, n, disorder) / n;
  });

  double m = 0.0;
  for (double v : est.values) m += v;
  m /= replications;
  double var = 0.0;
  for (double v : est.values) var += (v - m) * (v - m);
  var /= (replications - 1);
  est.mean = m;
  est.stderr_of_mean = std::sqrt(var / replications);
  return est;
}

BetaMonotoneProxy beta_monotone_proxy(const ModelSpec& model, int n, int replications,
                                      std::uint64_t seed, int threads) {
  ModelSpec zero = model;
  zero.beta = 0.0;
  auto at_beta = estimate_free_energy(model, n, replications, seed, threads);
  auto at_zero = estimate_free_energy(zero, n, replications, seed, threads);

  BetaMonotoneProxy p;
  p.mean_at_beta = at_beta.mean;
  p.mean_at_zero = at_zero.mean;
  p.combined_stderr = std::hypot(at_beta.stderr_of_mean, at_zero.stderr_of_mean);
  p.raw_direction_ok = p.mean_at_beta >= p.mean_at_zero - 4.0 * p.combined_stderr;
  const auto rho = compute_rho(model);
  const auto sizes = dims(model, n);
  const double baseline = static_cast<double>(sizes.back()) / (2.0 * n) *
                          model.beta * rho.values.back();
  p.shifted_gap = (p.mean_at_beta + baseline) - p.mean_at_zero;
  p.shifted_direction_ok = p.shifted_gap >= -4.0 * p.combined_stderr;
  return p;
}

}  // namespace mlglm

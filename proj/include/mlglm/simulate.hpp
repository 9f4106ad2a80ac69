#pragma once

#include <cstdint>
#include <vector>

#include "mlglm/model.hpp"

namespace mlglm {

struct FreeEnergyEstimate {
  int n = 0;
  int replications = 0;
  double mean = 0.0;
  double stderr_of_mean = 0.0;  // sample std / sqrt(replications)
  std::vector<double> values;   // per-replication free energies
  std::uint64_t seed = 0;
};

// log Z = log sum_x P(x) exp(-|Y - sqrt(beta) phi_L(Phi^(L) x^(L-1) / sqrt(n_{L-1}))|^2 / 2)
// by exact enumeration of all prior-support^n signal vectors, Gray-code
// ordered so the first-layer product updates incrementally. Requires
// deterministic activations and |support|^n <= 2^24.
double exact_log_partition(const ModelSpec& model, int n, const ForwardSample& disorder);

// Monte Carlo over disorder: mean and stderr of F = log(Z)/n across
// independent replications (split seeds, parallel).
FreeEnergyEstimate estimate_free_energy(const ModelSpec& model, int n, int replications,
                                        std::uint64_t seed, int threads = -1);

// Direction probe reported alongside comparisons: the free energy itself
// decreases in beta (the observation kernel is the squared-distance form);
// the monotone object is F plus the (n_L / 2n)(1 + beta rho_L) baseline.
struct BetaMonotoneProxy {
  double mean_at_beta = 0.0;
  double mean_at_zero = 0.0;
  double combined_stderr = 0.0;
  bool raw_direction_ok = false;       // mean_at_beta >= mean_at_zero - 4 se
  double shifted_gap = 0.0;            // baseline-corrected difference
  bool shifted_direction_ok = false;   // shifted_gap >= -4 se
};

BetaMonotoneProxy beta_monotone_proxy(const ModelSpec& model, int n, int replications,
                                      std::uint64_t seed, int threads = -1);

}  // namespace mlglm

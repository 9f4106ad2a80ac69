#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace mlglm {

// Seed-derivation tags; every random stream is keyed by (seed, tag path).
enum StreamTag : std::uint64_t {
  kTagSignal = 1,
  kTagMatrix = 2,
  kTagSideInfo = 3,
  kTagNoise = 4,
  kTagReplication = 5,
  kTagRestart = 6,
  kTagBootstrap = 7,
};

struct PriorAtom {
  double value = 0.0;
  double weight = 0.0;
};

// Finite discrete signal prior supported on [-1, 1].
struct PriorSpec {
  std::vector<PriorAtom> atoms;

  void validate(const std::string& path = "prior") const;
  double mean() const;
  double second_moment() const;

  static PriorSpec rademacher();
  static PriorSpec point_mass(double value);
};

enum class ActivationKind { kScaledTanh, kScaledSine, kScaledErf };

const char* to_string(ActivationKind k);
ActivationKind activation_kind_from_string(const std::string& name);

// One side-information atom: a parameter vector a in R^k with a weight.
// params[0] shifts the pre-activation, params[1] (optional) scales the output.
struct SideInfoAtom {
  std::vector<double> params;
  double weight = 0.0;
};

// Componentwise nonlinearity phi(z, a) = gain(a) * base(kappa * z + shift(a))
// with base in {tanh, sin, erf}: smooth, bounded, with bounded derivatives of
// every order.
struct ActivationSpec {
  ActivationKind kind = ActivationKind::kScaledTanh;
  double kappa = 1.0;
  std::vector<SideInfoAtom> side_info;  // empty: deterministic phi(z)

  bool deterministic() const { return side_info.empty(); }
  int param_dim() const { return side_info.empty() ? 0 : static_cast<int>(side_info[0].params.size()); }

  double value(double z) const;
  double value(double z, const SideInfoAtom& a) const;
  // d phi / d z in closed form.
  double derivative(double z) const;
  double derivative(double z, const SideInfoAtom& a) const;
  // Exact bound on |phi| over all inputs and side-info atoms.
  double sup_abs() const;

  void validate(const std::string& path = "activation") const;
};

struct LayerSpec {
  double alpha = 1.0;
  ActivationSpec activation;

  void validate(const std::string& path = "layer") const;
};

struct ModelSpec {
  std::vector<LayerSpec> layers;  // layers[l-1] holds layer l; L = layers.size()
  PriorSpec prior;
  double beta = 0.0;

  int num_layers() const { return static_cast<int>(layers.size()); }
  // alpha_l with alpha_0 = 1.
  double alpha(int l) const { return l == 0 ? 1.0 : layers[l - 1].alpha; }
  void validate(const std::string& path = "model") const;
};

// Limiting second moments rho_0 .. rho_L.
struct RhoSequence {
  std::vector<double> values;

  double operator[](int l) const { return values[l]; }
  int size() const { return static_cast<int>(values.size()); }
  double max() const;
};

// Layer sizes n_0 .. n_L with n_l = round(alpha_l * n), half away from zero.
std::vector<int> dims(const ModelSpec& model, int n);

// One draw of the full signal chain and observation.
struct ForwardSample {
  Eigen::VectorXd signal;                    // X
  std::vector<Eigen::VectorXd> layer_signal; // X^(1..L)
  std::vector<Eigen::MatrixXd> matrix;       // Phi^(1..L)
  std::vector<std::vector<int>> side_info;   // atom index per unit, empty when deterministic
  Eigen::VectorXd noise;                     // Z
  Eigen::VectorXd observation;               // Y = sqrt(beta) X^(L) + Z
};

ForwardSample sample_forward(const ModelSpec& model, int n, std::uint64_t seed);

struct EmpiricalRho {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::vector<double> values;  // |X^(L)|^2 / n_L per replication
};

EmpiricalRho empirical_rho(const ModelSpec& model, int n, int replications,
                           std::uint64_t seed, int threads = -1);

}  // namespace mlglm

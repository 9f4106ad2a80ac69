#include "mlglm/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "mlglm/errors.hpp"
#include "mlglm/rng.hpp"
#include "mlglm/util.hpp"

namespace mlglm {

namespace {
std::atomic<int> g_threads{0};

constexpr double kTwoOverSqrtPi = 1.1283791670955125739;
}  // namespace

int default_threads() {
  int t = g_threads.load();
  if (t > 0) return t;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void set_default_threads(int n) { g_threads.store(n); }

// ---------------------------------------------------------------- PriorSpec

void PriorSpec::validate(const std::string& path) const {
  if (atoms.empty()) throw ConfigError(path + ".atoms: empty");
  double wsum = 0.0;
  bool has_signal = false;
  for (size_t i = 0; i < atoms.size(); ++i) {
    const auto& a = atoms[i];
    std::string p = path + ".atoms[" + std::to_string(i) + "]";
    if (!(a.weight > 0.0)) throw ConfigError(p + ".weight: must be strictly positive");
    if (!(a.value >= -1.0 && a.value <= 1.0)) throw ConfigError(p + ".value: must lie in [-1, 1]");
    wsum += a.weight;
    if (a.value != 0.0) has_signal = true;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw ConfigError(path + ".atoms: weights sum to " + std::to_string(wsum) + ", expected 1");
  if (!has_signal)
    throw ConfigError(path + ".atoms: needs at least one atom with nonzero value (zero-signal model)");
}

double PriorSpec::mean() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.weight * a.value;
  return m;
}

double PriorSpec::second_moment() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.weight * a.value * a.value;
  return m;
}

PriorSpec PriorSpec::rademacher() { return PriorSpec{{{1.0, 0.5}, {-1.0, 0.5}}}; }

PriorSpec PriorSpec::point_mass(double value) { return PriorSpec{{{value, 1.0}}}; }

// ----------------------------------------------------------- ActivationSpec

const char* to_string(ActivationKind k) {
  switch (k) {
    case ActivationKind::kScaledTanh: return "scaled-tanh";
    case ActivationKind::kScaledSine: return "scaled-sine";
    case ActivationKind::kScaledErf: return "scaled-erf";
  }
  return "?";
}

ActivationKind activation_kind_from_string(const std::string& name) {
  if (name == "scaled-tanh") return ActivationKind::kScaledTanh;
  if (name == "scaled-sine") return ActivationKind::kScaledSine;
  if (name == "scaled-erf") return ActivationKind::kScaledErf;
  throw ConfigError("unknown activation kind '" + name + "'");
}

namespace {
inline double base_value(ActivationKind k, double u) {
  switch (k) {
    case ActivationKind::kScaledTanh: return std::tanh(u);
    case ActivationKind::kScaledSine: return std::sin(u);
    case ActivationKind::kScaledErf: return std::erf(u);
  }
  return 0.0;
}

inline double base_derivative(ActivationKind k, double u) {
  switch (k) {
    case ActivationKind::kScaledTanh: {
      double t = std::tanh(u);
      return 1.0 - t * t;
    }
    case ActivationKind::kScaledSine: return std::cos(u);
    case ActivationKind::kScaledErf: return kTwoOverSqrtPi * std::exp(-u * u);
  }
  return 0.0;
}

inline void shift_gain(const SideInfoAtom& a, double& shift, double& gain) {
  shift = a.params.empty() ? 0.0 : a.params[0];
  gain = a.params.size() >= 2 ? a.params[1] : 1.0;
}
}  // namespace

double ActivationSpec::value(double z) const { return base_value(kind, kappa * z); }

double ActivationSpec::value(double z, const SideInfoAtom& a) const {
  double shift, gain;
  shift_gain(a, shift, gain);
  return gain * base_value(kind, kappa * z + shift);
}

double ActivationSpec::derivative(double z) const { return kappa * base_derivative(kind, kappa * z); }

double ActivationSpec::derivative(double z, const SideInfoAtom& a) const {
  double shift, gain;
  shift_gain(a, shift, gain);
  return gain * kappa * base_derivative(kind, kappa * z + shift);
}

double ActivationSpec::sup_abs() const {
  if (side_info.empty()) return 1.0;  // sup |tanh| = sup |sin| = sup |erf| = 1
  double m = 0.0;
  for (const auto& a : side_info) {
    double shift, gain;
    shift_gain(a, shift, gain);
    m = std::max(m, std::abs(gain));
  }
  return m;
}

void ActivationSpec::validate(const std::string& path) const {
  if (kappa == 0.0) throw ConfigError(path + ".kappa: must be nonzero (phi would be identically zero)");
  if (!std::isfinite(kappa)) throw ConfigError(path + ".kappa: must be finite");
  if (side_info.empty()) return;
  size_t k = side_info[0].params.size();
  if (k < 1 || k > 2) throw ConfigError(path + ".side_info: parameter dimension must be 1 or 2");
  double wsum = 0.0;
  double max_gain = 0.0;
  for (size_t i = 0; i < side_info.size(); ++i) {
    const auto& a = side_info[i];
    std::string p = path + ".side_info[" + std::to_string(i) + "]";
    if (a.params.size() != k) throw ConfigError(p + ".params: inconsistent dimension");
    for (double v : a.params)
      if (!std::isfinite(v)) throw ConfigError(p + ".params: must be finite");
    if (!(a.weight > 0.0)) throw ConfigError(p + ".weight: must be strictly positive");
    wsum += a.weight;
    max_gain = std::max(max_gain, std::abs(a.params.size() >= 2 ? a.params[1] : 1.0));
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw ConfigError(path + ".side_info: weights sum to " + std::to_string(wsum) + ", expected 1");
  if (max_gain == 0.0) throw ConfigError(path + ".side_info: all gains are zero (phi identically zero)");
}

void LayerSpec::validate(const std::string& path) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError(path + ".alpha: must be > 0");
  activation.validate(path + ".activation");
}

void ModelSpec::validate(const std::string& path) const {
  if (layers.empty()) throw ConfigError(path + ".layers: need at least one layer");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError(path + ".beta: must be >= 0");
  prior.validate(path + ".prior");
  for (size_t i = 0; i < layers.size(); ++i)
    layers[i].validate(path + ".layers[" + std::to_string(i) + "]");
}

double RhoSequence::max() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

// --------------------------------------------------------------------- dims

std::vector<int> dims(const ModelSpec& model, int n) {
  if (n < 1) throw ConfigError("dims: n must be >= 1");
  std::vector<int> out;
  out.reserve(model.layers.size() + 1);
  out.push_back(n);
  for (size_t l = 0; l < model.layers.size(); ++l) {
    double target = model.layers[l].alpha * n;
    if (target < 0.5)
      throw ConfigError("dims: layers[" + std::to_string(l) + "] would round to an empty layer (alpha*n = " +
                        std::to_string(target) + ")");
    out.push_back(static_cast<int>(std::floor(target + 0.5)));
  }
  return out;
}

// ----------------------------------------------------------- sample_forward

namespace {
int sample_atom_index(RandomStream& rs, const std::vector<double>& cumw) {
  double u = rs.uniform01();
  auto it = std::lower_bound(cumw.begin(), cumw.end(), u);
  int idx = static_cast<int>(it - cumw.begin());
  return std::min<int>(idx, static_cast<int>(cumw.size()) - 1);
}

std::vector<double> cumulative_weights(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double s = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    s += w[i];
    c[i] = s;
  }
  c.back() = 1.0;
  return c;
}
}  // namespace

ForwardSample sample_forward(const ModelSpec& model, int n, std::uint64_t seed) {
  model.validate();
  const auto sizes = dims(model, n);
  const int L = model.num_layers();

  ForwardSample s;
  s.signal.resize(n);
  {
    std::vector<double> w;
    for (const auto& a : model.prior.atoms) w.push_back(a.weight);
    auto cumw = cumulative_weights(w);
    RandomStream rs(mix_seed(seed, {kTagSignal}));
    for (int i = 0; i < n; ++i) s.signal[i] = model.prior.atoms[sample_atom_index(rs, cumw)].value;
  }

  s.layer_signal.resize(L);
  s.matrix.resize(L);
  s.side_info.resize(L);
  Eigen::VectorXd cur = s.signal;
  for (int l = 1; l <= L; ++l) {
    const auto& act = model.layers[l - 1].activation;
    const int rows = sizes[l], cols = sizes[l - 1];
    Eigen::MatrixXd& phi = s.matrix[l - 1];
    phi.resize(rows, cols);
    {
      RandomStream rs(mix_seed(seed, {kTagMatrix, static_cast<std::uint64_t>(l)}));
      for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) phi(i, j) = rs.normal();
    }
    Eigen::VectorXd pre = (phi * cur) / std::sqrt(static_cast<double>(cols));
    Eigen::VectorXd& out = s.layer_signal[l - 1];
    out.resize(rows);
    if (act.deterministic()) {
      for (int i = 0; i < rows; ++i) out[i] = act.value(pre[i]);
    } else {
      std::vector<double> w;
      for (const auto& a : act.side_info) w.push_back(a.weight);
      auto cumw = cumulative_weights(w);
      RandomStream rs(mix_seed(seed, {kTagSideInfo, static_cast<std::uint64_t>(l)}));
      auto& idx = s.side_info[l - 1];
      idx.resize(rows);
      for (int i = 0; i < rows; ++i) {
        idx[i] = sample_atom_index(rs, cumw);
        out[i] = act.value(pre[i], act.side_info[idx[i]]);
      }
    }
    cur = out;
  }

  {
    RandomStream rs(mix_seed(seed, {kTagNoise}));
    s.noise.resize(sizes[L]);
    for (int i = 0; i < sizes[L]; ++i) s.noise[i] = rs.normal();
  }
  s.observation = std::sqrt(model.beta) * s.layer_signal[L - 1] + s.noise;
  return s;
}

EmpiricalRho empirical_rho(const ModelSpec& model, int n, int replications,
                           std::uint64_t seed, int threads) {
  if (replications < 2) throw ConfigError("empirical_rho: replications must be >= 2");
  model.validate();
  if (threads <= 0) threads = default_threads();

  EmpiricalRho r;
  r.values.resize(replications);
  parallel_for(replications, threads, [&](int rep) {
    auto s = sample_forward(model, n, mix_seed(seed, {kTagReplication, static_cast<std::uint64_t>(rep)}));
    const auto& xl = s.layer_signal.back();
    r.values[rep] = xl.squaredNorm() / xl.size();
  });

  double m = 0.0;
  for (double v : r.values) m += v;
  m /= replications;
  double var = 0.0;
  for (double v : r.values) var += (v - m) * (v - m);
  var /= (replications - 1);
  r.mean = m;
  r.variance = var;
  return r;
}

}  // namespace mlglm

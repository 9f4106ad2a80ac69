#include <doctest.h>

#include <cmath>

#include "mlglm/errors.hpp"
#include "mlglm/model.hpp"
#include "mlglm/recursion.hpp"
#include "mlglm/stats.hpp"

using namespace mlglm;

namespace {
ModelSpec tanh_model(double beta, std::vector<double> alphas, double kappa = 1.0) {
  ModelSpec m;
  m.prior = PriorSpec::rademacher();
  m.beta = beta;
  for (double a : alphas) m.layers.push_back({a, {ActivationKind::kScaledTanh, kappa, {}}});
  return m;
}
}  // namespace

TEST_CASE("dims rounding rule") {
  CHECK(dims(tanh_model(0, {1.0}), 8) == std::vector<int>{8, 8});
  CHECK(dims(tanh_model(0, {0.5}), 8) == std::vector<int>{8, 4});
  CHECK(dims(tanh_model(0, {0.3}), 10) == std::vector<int>{10, 3});
  CHECK(dims(tanh_model(0, {0.55}), 10) == std::vector<int>{10, 6});  // half rounds up
  CHECK_THROWS_AS(dims(tanh_model(0, {0.04}), 10), ConfigError);     // rounds to zero
  CHECK_THROWS_AS(dims(tanh_model(0, {1.0}), 0), ConfigError);
}

TEST_CASE("prior and activation validation") {
  PriorSpec bad{{{0.0, 1.0}}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);  // zero-signal prior rejected
  PriorSpec off{{{1.0, 0.6}, {-1.0, 0.5}}};
  CHECK_THROWS_AS(off.validate(), ConfigError);  // weights don't sum to 1
  PriorSpec range{{{1.5, 1.0}}};
  CHECK_THROWS_AS(range.validate(), ConfigError);  // outside [-1,1]
  CHECK(PriorSpec::rademacher().second_moment() == 1.0);
  CHECK(PriorSpec::point_mass(0.5).second_moment() == 0.25);

  ActivationSpec a{ActivationKind::kScaledTanh, 0.0, {}};
  CHECK_THROWS_AS(a.validate(), ConfigError);  // kappa = 0 identically zero
  ActivationSpec b{ActivationKind::kScaledSine, 1.0, {{{0.5}, 0.5}, {{-0.5}, 0.4}}};
  CHECK_THROWS_AS(b.validate(), ConfigError);  // side-info weights don't sum to 1
  ActivationSpec c{ActivationKind::kScaledErf, 2.0, {{{0.1, 0.0}, 1.0}}};
  CHECK_THROWS_AS(c.validate(), ConfigError);  // all gains zero
}

TEST_CASE("activation closed-form derivative matches finite differences") {
  for (auto kind : {ActivationKind::kScaledTanh, ActivationKind::kScaledSine,
                    ActivationKind::kScaledErf}) {
    ActivationSpec act{kind, 1.3, {{{0.4, 0.8}, 1.0}}};
    for (double z : {-1.7, -0.2, 0.0, 0.9, 2.4}) {
      double h = 1e-6;
      double fd = (act.value(z + h, act.side_info[0]) - act.value(z - h, act.side_info[0])) / (2 * h);
      CHECK(act.derivative(z, act.side_info[0]) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("seed determinism and shapes") {
  auto m = tanh_model(1.0, {0.7, 1.2});
  auto a = sample_forward(m, 20, 42);
  auto b = sample_forward(m, 20, 42);
  auto c = sample_forward(m, 20, 43);
  CHECK((a.signal - b.signal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.observation - b.observation).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.matrix[1] - b.matrix[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.observation - c.observation).cwiseAbs().maxCoeff() > 0.0);

  auto sizes = dims(m, 20);
  CHECK(a.signal.size() == sizes[0]);
  for (int l = 1; l <= 2; ++l) {
    CHECK(a.layer_signal[l - 1].size() == sizes[l]);
    CHECK(a.matrix[l - 1].rows() == sizes[l]);
    CHECK(a.matrix[l - 1].cols() == sizes[l - 1]);
  }
}

TEST_CASE("boundedness |X^(l)| <= sup|phi| exactly") {
  ModelSpec m = tanh_model(1.0, {1.0});
  m.layers[0].activation.side_info = {{{0.3, 0.6}, 0.5}, {{-0.1, 0.9}, 0.5}};
  auto s = sample_forward(m, 50, 7);
  double cap = m.layers[0].activation.sup_abs();
  CHECK(cap == 0.9);
  for (int i = 0; i < s.layer_signal[0].size(); ++i)
    CHECK(std::abs(s.layer_signal[0][i]) <= cap);
}

TEST_CASE("beta = 0 observation is exactly the noise") {
  auto s = sample_forward(tanh_model(0.0, {1.0}), 12, 3);
  CHECK((s.observation - s.noise).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("point-mass prior gives the all-ones chain") {
  ModelSpec m = tanh_model(1.0, {1.0});
  m.prior = PriorSpec::point_mass(1.0);
  const int n = 10;
  auto s = sample_forward(m, n, 5);
  for (int i = 0; i < n; ++i) CHECK(s.signal[i] == 1.0);
  Eigen::VectorXd pre = s.matrix[0] * Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  for (int i = 0; i < n; ++i)
    CHECK(s.layer_signal[0][i] == doctest::Approx(std::tanh(pre[i])).epsilon(1e-15));
}

TEST_CASE("sampled second moment matches the limit recursion") {
  auto m = tanh_model(1.0, {1.0});
  auto rho = compute_rho(m);
  auto emp = empirical_rho(m, 200, 1000, 17);
  double se = std::sqrt(emp.variance / 1000);
  CHECK(std::abs(emp.mean - rho[1]) <= 3 * se);
}

TEST_CASE("empirical variance shrinks with n (bootstrap band)") {
  auto m = tanh_model(1.0, {1.0, 1.0});
  auto lo = empirical_rho(m, 100, 400, 23);
  auto hi = empirical_rho(m, 200, 400, 29);
  double sd = std::hypot(bootstrap_sd_of_variance(lo.values, 300, 1),
                         bootstrap_sd_of_variance(hi.values, 300, 2));
  CHECK(hi.variance <= lo.variance + 3 * sd);
}

TEST_CASE("empirical_rho needs two replications") {
  CHECK_THROWS_AS(empirical_rho(tanh_model(0, {1.0}), 10, 1, 1), ConfigError);
}

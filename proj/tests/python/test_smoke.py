"""Smoke tests for the Python bindings; the numerical heavy lifting is
covered by the C++ suites."""
import math

import pytest

mlglm = pytest.importorskip("mlglm")


def rademacher_tanh(beta=1.0, alpha=1.0):
    return mlglm.Model(
        beta=beta,
        prior=[(1.0, 0.5), (-1.0, 0.5)],
        layers=[{"alpha": alpha, "kind": "scaled-tanh", "kappa": 1.0}],
    )


def test_dims_and_rho():
    m = rademacher_tanh()
    assert mlglm.dims(m, 8) == [8, 8]
    rho = mlglm.compute_rho(m)
    assert rho[0] == pytest.approx(1.0, abs=1e-15)
    assert rho[1] == pytest.approx(0.39429449039784117, abs=1e-10)


def test_potentials():
    m = rademacher_tanh()
    assert mlglm.psi0(0.0, m) == 0.0
    assert mlglm.psi0(1.0, m) == pytest.approx(0.163169179653168388, abs=1e-9)
    assert mlglm.psi_layer(0.3, 0.0, 1.0, m) == pytest.approx(-0.5, abs=1e-10)
    assert mlglm.hamiltonian(1.0, 1.0, 1.0) == 2.0


def test_sampling_determinism():
    m = rademacher_tanh()
    a = mlglm.sample_forward(m, 16, seed=7)
    b = mlglm.sample_forward(m, 16, seed=7)
    assert list(a["observation"]) == list(b["observation"])
    mean, var = mlglm.empirical_rho(m, 50, 20, seed=3)
    assert 0.0 < mean < 1.0 and var >= 0.0


def test_simulate_beta_zero_exact():
    m = rademacher_tanh(beta=0.0)
    est = mlglm.estimate_free_energy(m, 8, 10, seed=11)
    assert len(est["values"]) == 10
    # at beta = 0 every replication is exactly -|Z|^2 / (2n)
    assert est["mean"] < 0.0


def test_fixed_point_beta_zero():
    m = rademacher_tanh(beta=0.0, alpha=0.75)
    res = mlglm.solve_fixed_point(m, restarts=2, seed=5)
    assert res["value"] == pytest.approx(-0.375, abs=1e-5)


def test_hopf_initial_condition():
    out = mlglm.hopf_evaluate(0.0, 0.4, 1.0, data="sqrt1p")
    # f(0, x) = psi(x) by biconjugation of the convex datum
    psi = 1.3 * (math.sqrt(1.0 + 0.16) - 1.0) + 0.35 * (math.sqrt(2.0) - 1.0)
    assert out["f"] == pytest.approx(psi, abs=1e-6)

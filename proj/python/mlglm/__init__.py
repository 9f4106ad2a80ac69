"""Free-energy limits of multi-layer generalized linear models.

Thin Python surface over the C++ core: model construction, the limiting
second-moment recursion, scalar potentials, the variational saddle solvers,
Hopf evaluation, and exact finite-n Monte Carlo.
"""

from ._mlglm import (  # noqa: F401
    ConfigError,
    Model,
    NonConvergenceError,
    NumericError,
    __version__,
    compute_rho,
    dims,
    empirical_rho,
    estimate_free_energy,
    exact_log_partition,
    hamiltonian,
    hopf_evaluate,
    psi0,
    psi_layer,
    run_config,
    sample_forward,
    solve_fixed_point,
    solve_grid,
)

__all__ = [
    "ConfigError",
    "Model",
    "NonConvergenceError",
    "NumericError",
    "__version__",
    "compute_rho",
    "dims",
    "empirical_rho",
    "estimate_free_energy",
    "exact_log_partition",
    "hamiltonian",
    "hopf_evaluate",
    "psi0",
    "psi_layer",
    "run_config",
    "sample_forward",
    "solve_fixed_point",
    "solve_grid",
]

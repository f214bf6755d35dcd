"""Python bindings for the cistab C++ core."""

from ._core import (
    CistabError,
    __version__,
    boundary_noise_range,
    explicit_constant,
    instability_predicate,
    interior_noise_range,
    mu_roots,
    optimal_constant_1d,
    optimize_range_over_theta,
    quadratic_positivity_oracle,
    robin_spectrum_fd,
    run_command,
    run_path,
    theta_feasible_interval_boundary,
)

__all__ = [
    "CistabError",
    "__version__",
    "boundary_noise_range",
    "explicit_constant",
    "instability_predicate",
    "interior_noise_range",
    "mu_roots",
    "optimal_constant_1d",
    "optimize_range_over_theta",
    "quadratic_positivity_oracle",
    "robin_spectrum_fd",
    "run_command",
    "run_path",
    "theta_feasible_interval_boundary",
]

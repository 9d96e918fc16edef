"""Quaternionic exterior calculus and instanton verification for the
Bryant-Salamon G2 / Spin(7) manifolds."""

from ._core import (
    Quaternion,
    __version__,
    connection_decay_exponent,
    g2_instanton_residual,
    g2_ode_residual,
    g2_profile,
    hym_residual,
    metric_decay_exponent,
    metric_deviation,
    run_suite,
    spin7_instanton_residual,
    spin7_profile_f,
    spin7_profile_g,
    structure_residuals,
    two_form_eigenvalues,
)

__all__ = [
    "Quaternion",
    "__version__",
    "connection_decay_exponent",
    "g2_instanton_residual",
    "g2_ode_residual",
    "g2_profile",
    "hym_residual",
    "metric_decay_exponent",
    "metric_deviation",
    "run_suite",
    "spin7_instanton_residual",
    "spin7_profile_f",
    "spin7_profile_g",
    "structure_residuals",
    "two_form_eigenvalues",
]

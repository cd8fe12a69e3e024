"""Tail bounds for suprema of normalised U-statistic fields."""

from ._core import (
    Kernel,
    Psi,
    covering_bounds,
    empirical_moments,
    gls_norm,
    grid_covering,
    hoeffding_decompose,
    lower_bound,
    nu_star,
    simulate_panel,
    tail_bound,
    theorem31_bound,
    u_stat,
    v_inf,
)

__all__ = [
    "Kernel",
    "Psi",
    "covering_bounds",
    "empirical_moments",
    "gls_norm",
    "grid_covering",
    "hoeffding_decompose",
    "lower_bound",
    "nu_star",
    "simulate_panel",
    "tail_bound",
    "theorem31_bound",
    "u_stat",
    "v_inf",
]

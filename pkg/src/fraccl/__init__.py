"""Numerical laboratory for the fractional conservation law
``u_t + |u|^(q-1) u_x = D[u]`` with a Riesz-Feller type operator ``D``."""
from .fractional_ops import FractionalOperatorSpec, Field, Grid, SpectralMultiplier, make_symbol
from .kernel import KernelField, kernel_field
from .solver import Box, Gaussian, SolverConfig, Trajectory, solve, solve_rescaled
from .entropy_ref import Bump, NWaveParams, nwave_lp_norm, nwave_value

__all__ = [
    "Box", "Bump", "Field", "FractionalOperatorSpec", "Gaussian", "Grid", "KernelField",
    "NWaveParams", "SolverConfig", "SpectralMultiplier", "Trajectory", "kernel_field",
    "make_symbol", "nwave_lp_norm", "nwave_value", "solve", "solve_rescaled",
]
__version__ = "0.1.0"

"""Fourier analysis, wave packets and filtering for the P1 SIPG
semi-discretisation of the 1-d wave equation."""

__version__ = "0.1.0"

from .lattice import DGState, GridSpec, Spectrum, sdft_forward, sdft_inverse  # noqa: E402
from .symbols import (  # noqa: E402
    branch_curve,
    eigen_branches,
    find_critical_points,
    group_velocity,
    reference_dispersions,
    symbols,
)

__all__ = [
    "DGState",
    "GridSpec",
    "Spectrum",
    "sdft_forward",
    "sdft_inverse",
    "branch_curve",
    "eigen_branches",
    "find_critical_points",
    "group_velocity",
    "reference_dispersions",
    "symbols",
]

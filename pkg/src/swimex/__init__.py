"""Semi-implicit IMEX-RK WENO finite-difference solver for the shallow
water equations with bottom topography and Manning friction."""

__version__ = "0.1.0"

from .core import (Bathymetry, DoubleTableau, Grid, PhysParams, RunReport,
                   State, grid_1d, grid_2d, surface_level, tableau_si_imex_443,
                   validate_tableau)
from .kernels import BACKEND as kernel_backend

__all__ = [
    "Bathymetry", "DoubleTableau", "Grid", "PhysParams", "RunReport", "State",
    "grid_1d", "grid_2d", "surface_level", "tableau_si_imex_443",
    "validate_tableau", "kernel_backend",
]

"""Free-boundary Willmore toolkit: discrete geometry on parametrised
half-strips, energies and their variations, reflection, boundary residuals
and half-plane biharmonic extensions."""

from __future__ import annotations

from . import convergence, energies, free_boundary, gallery, kernels, reflection, spectral
from .energies import (energy_report, first_variation_willmore, l2_energy, thomsen_energy,
                       willmore_energy)
from .errors import WillmoreFBError
from .free_boundary import SupportSurface, free_bc_residuals
from .geometry import SurfaceGeometry, compute_geometry
from .grid import Immersion, ParamGrid, read_surface, write_surface
from .reflection import reflect

__version__ = "0.1.0"

__all__ = [
    "Immersion", "ParamGrid", "SupportSurface", "SurfaceGeometry", "WillmoreFBError",
    "compute_geometry", "convergence", "energies", "energy_report",
    "first_variation_willmore", "free_bc_residuals", "free_boundary", "gallery", "kernels",
    "l2_energy", "read_surface", "reflect", "reflection", "spectral", "thomsen_energy",
    "willmore_energy", "write_surface",
]

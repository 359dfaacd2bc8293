"""Refinement ladders, observed orders and the run configuration."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonMonotone

DEFAULT_LADDER = ((65, 33), (129, 65), (257, 129))


@dataclass(frozen=True)
class RunConfig:
    command: str
    tol_constraint: float = 1e-8
    tol_quadrature: float = 1e-3
    tol_spectral: float = 1e-8
    ladder: tuple = DEFAULT_LADDER
    seed: int = 0
    out: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("tol_constraint", "tol_quadrature", "tol_spectral"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        ladder = tuple(tuple(int(v) for v in rung) for rung in self.ladder)
        for (a, b), (c, d) in zip(ladder, ladder[1:]):
            if not (c > a and d > b):
                raise ValueError(f"refinement ladder must be strictly increasing: {ladder}")
        object.__setattr__(self, "ladder", ladder)


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    value: float
    error: float
    order: float | None


@dataclass(frozen=True)
class ConvergenceTable:
    quantity: str
    target: float | None
    rows: tuple[ConvergenceRow, ...]

    @property
    def orders(self) -> list[float]:
        return [r.order for r in self.rows if r.order is not None]

    @property
    def final_order(self) -> float | None:
        orders = self.orders
        return orders[-1] if orders else None

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "target": self.target,
                "rows": [r.__dict__ for r in self.rows], "final_order": self.final_order}

    def csv_rows(self):
        yield ["h", "value", "error", "order"]
        for r in self.rows:
            yield [repr(r.h), repr(r.value), repr(r.error), "" if r.order is None else repr(r.order)]


def observed_orders(hs: Sequence[float], errors: Sequence[float]) -> list[float | None]:
    """log(e_{i-1}/e_i) / log(h_{i-1}/h_i) per rung; needs at least three rungs."""
    out: list[float | None] = [None] * len(hs)
    if len(hs) < 3:
        return out
    for i in range(1, len(hs)):
        e0, e1 = errors[i - 1], errors[i]
        if e0 > 0 and e1 > 0:
            out[i] = math.log(e0 / e1) / math.log(hs[i - 1] / hs[i])
    return out


def convergence_table(quantity: str, hs: Sequence[float], values: Sequence[float],
                      target: float | None = None) -> ConvergenceTable:
    """Errors against ``target`` or, without one, against the finest rung."""
    hs = [float(h) for h in hs]
    values = [float(v) for v in values]
    if target is None:
        ref = values[-1]
        errors = [abs(v - ref) for v in values[:-1]] + [float("nan")]
        orders = observed_orders(hs[:-1], errors[:-1]) + [None] if len(hs) >= 4 else [None] * len(hs)
    else:
        errors = [abs(v - target) for v in values]
        orders = observed_orders(hs, errors)
    finite = [e for e in errors if np.isfinite(e)]
    if any(b > a for a, b in zip(finite, finite[1:])):
        warnings.warn(f"errors of {quantity} do not decrease along the ladder", NonMonotone,
                      stacklevel=2)
    rows = tuple(ConvergenceRow(h, v, e, o) for h, v, e, o in zip(hs, values, errors, orders))
    return ConvergenceTable(quantity, target, rows)


# ---------------------------------------------------------------- standard studies

def _hemisphere_energy(nx, ny, which="W", scheme="fd"):
    from . import energies, gallery
    from .geometry import compute_geometry

    g = compute_geometry(gallery.sample("hemisphere", nx=nx, ny=ny), scheme=scheme)
    return {"W": energies.willmore_energy, "E": energies.l2_energy,
            "T": energies.thomsen_energy}[which](g)


def _sphere_operator(nx, ny):
    from . import energies, gallery
    from .geometry import compute_geometry

    g = compute_geometry(gallery.sample("mercator_sphere", nx=nx, ny=ny), scheme="fd")
    X, Y = g.grid.mesh()
    # a fixed interior window: the one-sided edge stencils do not converge in sup norm
    inner = (np.abs(X) <= math.pi - 0.5) & (Y >= 0.25) & (Y <= 0.75)
    return float(np.max(np.abs(energies.willmore_operator(g)[inner])))


def _parity(nx, ny):
    from . import gallery, reflection

    full = reflection.reflect(gallery.sample("mercator_sphere", nx=nx, ny=ny), "plane")
    return reflection.parity_audit(full, "plane").sup


def _density_identity(nx, ny):
    from . import gallery
    from .grid import ParamGrid

    grid = ParamGrid(nx, ny, (-math.pi, math.pi), (0.2, 1.0))
    return gallery.inversion_density_identity(gallery.sample("catenoid", grid=grid)).sup_residual


def _bilaplacian(nx, ny):
    from . import spectral

    phi = spectral.from_coefficients(a=[1.0, 0.5, 0.0, 0.25], b=[0.0, 0.3, 0.2])
    psi = spectral.from_coefficients(a=[0.0, 0.4], b=[0.5, 0.0, 0.1, 0.2])
    u = spectral.biharmonic_extension(phi, psi, spectral.periodic_nodes(nx), np.linspace(0, 1, ny))
    return spectral.bilaplacian_residual(u)


STUDIES: dict[str, tuple[Callable[[int, int], float], float | None, str]] = {
    "hemisphere_W": (lambda nx, ny: _hemisphere_energy(nx, ny, "W"), 2 * math.pi * math.tanh(6.0),
                     "Willmore energy of the hemisphere chart (finite differences)"),
    "hemisphere_E": (lambda nx, ny: _hemisphere_energy(nx, ny, "E"), 2 * math.pi * math.tanh(6.0),
                     "L2 curvature energy of the hemisphere chart"),
    "hemisphere_T": (lambda nx, ny: _hemisphere_energy(nx, ny, "T"), 0.0,
                     "Thomsen energy of the hemisphere chart"),
    "sphere_operator": (_sphere_operator, 0.0, "sup of the Willmore operator on an interior window of the sphere band"),
    "parity": (_parity, 0.0, "parity residual of the reflected sphere band"),
    "density_identity": (_density_identity, 0.0, "inversion density identity, catenoid"),
    "bilaplacian": (_bilaplacian, 0.0, "13-point bilaplacian of a biharmonic extension"),
}


def convergence_study(quantity: str, ladder: Sequence[tuple[int, int]] = DEFAULT_LADDER,
                      target: float | None = None, x_span: float = 2 * math.pi,
                      fn: Callable[[int, int], float] | None = None) -> ConvergenceTable:
    """Evaluate a quantity along a ladder of grids and tabulate observed orders."""
    if fn is None:
        fn, default_target, _ = STUDIES[quantity]
        target = default_target if target is None else target
    RunConfig("converge", ladder=tuple(ladder))      # validates the ladder
    hs = [x_span / (nx - 1) for nx, _ in ladder]
    values = [fn(nx, ny) for nx, ny in ladder]
    return convergence_table(quantity, hs, values, target)

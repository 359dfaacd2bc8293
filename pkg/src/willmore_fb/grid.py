"""Structured parameter grids, finite differences and the Immersion type.

Arrays sampled on a grid have shape ``(ny, nx, ...)``: axis 0 runs over y,
axis 1 over x. Stencils are written so that mirroring an array in y negates
first differences and preserves second differences bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import NonFinite

# jet keys: "" is the position, then partial derivatives by sorted axis letters
JET_KEYS_2 = ("", "x", "y", "xx", "xy", "yy")
JET_KEYS_3 = JET_KEYS_2 + ("xxx", "xxy", "xyy", "yyy")

Jet = dict  # key -> array (..., 3)
JetFn = Callable[[np.ndarray, np.ndarray], Jet]


def _nodes(lo: float, hi: float, n: int) -> np.ndarray:
    """Uniform nodes; symmetric ranges are built by exact mirroring."""
    if lo == -hi and n % 2 == 1:
        m = (n + 1) // 2
        pos = hi * (np.arange(m) / (m - 1))
        return np.concatenate([-pos[:0:-1], pos])
    return lo + (hi - lo) * (np.arange(n) / (n - 1))


@dataclass(frozen=True)
class ParamGrid:
    nx: int
    ny: int
    x_range: tuple[float, float] = (-math.pi, math.pi)
    y_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.nx < 5 or self.ny < 5:
            raise ValueError(f"grid needs at least 5x5 nodes, got {self.nx}x{self.ny}")
        object.__setattr__(self, "x_range", tuple(float(v) for v in self.x_range))
        object.__setattr__(self, "y_range", tuple(float(v) for v in self.y_range))
        if not (self.x_range[1] > self.x_range[0] and self.y_range[1] > self.y_range[0]):
            raise ValueError("grid ranges must be increasing")

    @property
    def hx(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_range[1] - self.y_range[0]) / (self.ny - 1)

    @property
    def x(self) -> np.ndarray:
        return _nodes(*self.x_range, self.nx)

    @property
    def y(self) -> np.ndarray:
        return _nodes(*self.y_range, self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y)

    @property
    def boundary_row(self) -> int | None:
        """Index of the row y = 0 (the boundary I), if the grid has one."""
        hits = np.flatnonzero(self.y == 0.0)
        return int(hits[0]) if hits.size else None

    def refined(self, factor: int = 2) -> "ParamGrid":
        return ParamGrid(factor * (self.nx - 1) + 1, factor * (self.ny - 1) + 1,
                         self.x_range, self.y_range)

    def trapezoid_weights(self) -> np.ndarray:
        wx = np.full(self.nx, self.hx)
        wx[[0, -1]] *= 0.5
        wy = np.full(self.ny, self.hy)
        wy[[0, -1]] *= 0.5
        return np.outer(wy, wx)

    def line_weights(self) -> np.ndarray:
        w = np.full(self.nx, self.hx)
        w[[0, -1]] *= 0.5
        return w

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "x_range": list(self.x_range),
                "y_range": list(self.y_range)}


# ---------------------------------------------------------------- differences

def d1(u: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order first derivative; one-sided second order at the ends."""
    u = np.moveaxis(np.asarray(u, dtype=float), axis, 0)
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    out[0] = ((-3.0 * u[0] + 4.0 * u[1]) - u[2]) / (2.0 * h)
    out[-1] = ((3.0 * u[-1] - 4.0 * u[-2]) + u[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def d2(u: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order second derivative; four-point one-sided at the ends."""
    u = np.moveaxis(np.asarray(u, dtype=float), axis, 0)
    out = np.empty_like(u)
    out[1:-1] = ((u[2:] + u[:-2]) - 2.0 * u[1:-1]) / (h * h)
    out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h)
    out[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / (h * h)
    return np.moveaxis(out, 0, axis)


def fd_gradient(u: np.ndarray, grid: ParamGrid) -> tuple[np.ndarray, np.ndarray]:
    return d1(u, grid.hx, 1), d1(u, grid.hy, 0)


def fd_jet(values: np.ndarray, grid: ParamGrid) -> Jet:
    """Finite-difference 2-jet of a grid field of shape (ny, nx, ...)."""
    fx = d1(values, grid.hx, 1)
    return {
        "": np.asarray(values, dtype=float),
        "x": fx,
        "y": d1(values, grid.hy, 0),
        "xx": d2(values, grid.hx, 1),
        "xy": d1(fx, grid.hy, 0),
        "yy": d2(values, grid.hy, 0),
    }


# ---------------------------------------------------------------- immersion

@dataclass(frozen=True)
class Immersion:
    """Samples of f on a grid, optionally with an exact jet evaluator.

    ``analytic_jet(X, Y)`` returns a dict keyed like ``JET_KEYS_2`` (and
    optionally third derivatives) with arrays of shape ``X.shape + (3,)``.
    """

    grid: ParamGrid
    positions: np.ndarray
    source: str = "numeric"
    analytic_jet: JetFn | None = None
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.shape != (self.grid.ny, self.grid.nx, 3):
            raise ValueError(f"positions shape {pos.shape} does not match grid "
                             f"({self.grid.ny}, {self.grid.nx}, 3)")
        bad = np.argwhere(~np.isfinite(pos).all(axis=-1))
        if bad.size:
            j, i = (int(v) for v in bad[0])
            raise NonFinite(f"non-finite position at node (j={j}, i={i})", node=[j, i])
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_jet(cls, grid: ParamGrid, jet_fn: JetFn, meta: Mapping | None = None) -> "Immersion":
        X, Y = grid.mesh()
        return cls(grid, jet_fn(X, Y)[""], source="analytic", analytic_jet=jet_fn,
                   meta=dict(meta or {}))

    def jet(self, scheme: str = "auto") -> Jet:
        """Derivative jet at the nodes ('analytic', 'fd' or 'auto')."""
        if scheme == "auto":
            scheme = "analytic" if self.analytic_jet is not None else "fd"
        if scheme == "analytic":
            if self.analytic_jet is None:
                raise ValueError("immersion has no analytic jet")
            X, Y = self.grid.mesh()
            jet = dict(self.analytic_jet(X, Y))
            jet[""] = self.positions
            return jet
        if scheme == "fd":
            return fd_jet(self.positions, self.grid)
        raise ValueError(f"unknown derivative scheme {scheme!r}")

    def with_positions(self, positions: np.ndarray, **meta) -> "Immersion":
        return Immersion(self.grid, positions, meta={**self.meta, **meta})

    def scale(self) -> float:
        """Bounding-box diameter, the reference length for relative gates."""
        p = self.positions.reshape(-1, 3)
        return float(np.linalg.norm(p.max(axis=0) - p.min(axis=0))) or 1.0


# ---------------------------------------------------------------- file format

def immersion_to_dict(f: Immersion) -> dict:
    meta = {"name": f.meta.get("name", "surface")}
    for key in ("analytic_id", "params"):
        if key in f.meta:
            meta[key] = f.meta[key]
    return {
        "grid": f.grid.to_dict(),
        "positions": f.positions.reshape(-1, 3).tolist(),
        "meta": meta,
    }


def immersion_from_dict(data: dict, attach_jet: bool = True) -> Immersion:
    g = data["grid"]
    grid = ParamGrid(int(g["nx"]), int(g["ny"]), tuple(g["x_range"]), tuple(g["y_range"]))
    pos = np.asarray(data["positions"], dtype=float).reshape(grid.ny, grid.nx, 3)
    meta = dict(data.get("meta", {}))
    jet_fn = None
    if attach_jet and meta.get("analytic_id"):
        from . import gallery

        surf = gallery.get(meta["analytic_id"], **meta.get("params", {}))
        X, Y = grid.mesh()
        # reattach only if the stored samples really come from that surface
        if np.array_equal(surf.jet(X, Y)[""], pos):
            jet_fn = surf.jet
    return Immersion(grid, pos, source="analytic" if jet_fn else "numeric",
                     analytic_jet=jet_fn, meta=meta)


def write_surface(f: Immersion, path) -> None:
    with open(path, "w") as fh:
        json.dump(immersion_to_dict(f), fh)


def read_surface(path, attach_jet: bool = True) -> Immersion:
    with open(path) as fh:
        return immersion_from_dict(json.load(fh), attach_jet=attach_jet)

"""Extension by reflection across the plane z = 0 and the x3-axis.

An immersion of the half-strip y >= 0 is continued to y < 0 by
f(x, -y) = M f(x, y) with M = diag(1, 1, -1) (plane) or diag(-1, -1, 1)
(line). The lower half is an exact index mirror of the upper half, so every
parity statement holds bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolated
from .geometry import compute_geometry, conformality_residual
from .grid import JET_KEYS_2, Immersion, ParamGrid

E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class ReflectionKind:
    kind: str
    matrix: np.ndarray
    constrained: tuple[int, ...]     # components that vanish along y = 0

    @classmethod
    def parse(cls, kind: "str | ReflectionKind") -> "ReflectionKind":
        if isinstance(kind, ReflectionKind):
            return kind
        if kind == "plane":
            return cls("plane", np.diag([1.0, 1.0, -1.0]), (2,))
        if kind == "line":
            return cls("line", np.diag([-1.0, -1.0, 1.0]), (0, 1))
        raise ValueError(f"unknown reflection kind {kind!r}; use plane or line")

    @property
    def odd_traces(self) -> tuple[tuple[str, int], ...]:
        """(derivative, component) pairs that must vanish on y = 0."""
        if self.kind == "plane":
            return (("x", 2), ("y", 0), ("y", 1))
        return (("x", 0), ("x", 1), ("y", 2))


@dataclass(frozen=True)
class TraceReport:
    kind: str
    constraint: np.ndarray          # f3 (plane) or (f1, f2) (line) along y = 0
    normal_constraint: np.ndarray | None   # <nu, e3> (plane only)
    odd_traces: dict                # label -> trace along y = 0
    conformality: np.ndarray        # |f_x|^2 - |f_y|^2 along y = 0
    jacobian_floor: float           # min |f_x x f_y| along y = 0
    scale: float

    @property
    def lambda_low(self) -> float:
        return 0.5 * float(np.log(self.jacobian_floor)) if self.jacobian_floor > 0 else -np.inf

    @property
    def sup(self) -> dict:
        out = {"constraint": float(np.max(np.abs(self.constraint)))}
        if self.normal_constraint is not None:
            out["normal_constraint"] = float(np.max(np.abs(self.normal_constraint)))
        out.update({k: float(np.max(np.abs(v))) for k, v in self.odd_traces.items()})
        out["conformality"] = float(np.max(np.abs(self.conformality)))
        return out

    @property
    def residual(self) -> float:
        """The gated residual: positions relative to scale, normals absolute."""
        r = float(np.max(np.abs(self.constraint))) / self.scale
        if self.normal_constraint is not None:
            r = max(r, float(np.max(np.abs(self.normal_constraint))))
        return r

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sup": self.sup, "residual": self.residual,
                "jacobian_floor": self.jacobian_floor, "scale": self.scale}


def check_constraints(f: Immersion, kind: str | ReflectionKind = "plane",
                      scheme: str = "auto") -> TraceReport:
    """Boundary constraints and the odd-derivative traces they imply."""
    rk = ReflectionKind.parse(kind)
    j = f.grid.boundary_row
    if j is None:
        raise ValueError("grid has no boundary row y = 0")
    geom = compute_geometry(f, scheme=scheme, allow_degenerate=True)
    jet = geom.jet
    pos = f.positions[j]
    constraint = pos[:, list(rk.constrained)]
    normal = geom.nu[j] @ E3 if rk.kind == "plane" else None
    odd = {f"d{d}_f{c + 1}": jet[d][j, :, c] for d, c in rk.odd_traces}
    fx, fy = jet["x"][j], jet["y"][j]
    conf = np.einsum("ic,ic->i", fx, fx) - np.einsum("ic,ic->i", fy, fy)
    jac = float(np.min(np.linalg.norm(np.cross(fx, fy), axis=-1)))
    return TraceReport(rk.kind, constraint, normal, odd, conf, jac, f.scale())


def mirror_grid(grid: ParamGrid) -> ParamGrid:
    if grid.y_range[0] != 0.0:
        raise ValueError("reflection needs a grid starting at y = 0")
    Y = grid.y_range[1]
    return ParamGrid(grid.nx, 2 * grid.ny - 1, grid.x_range, (-Y, Y))


def _mirror(values: np.ndarray, matrix: np.ndarray | float) -> np.ndarray:
    """Stack mirrored lower rows under ``values`` (rows y >= 0)."""
    lower = values[:0:-1] * (np.diag(matrix) if np.ndim(matrix) else matrix)
    return np.concatenate([lower, values], axis=0)


def _reflected_jet(base, rk: ReflectionKind):
    M = np.diag(rk.matrix)

    def jet(X, Y):
        Y = np.asarray(Y, dtype=float)
        raw = base(X, np.abs(Y))
        neg = (Y < 0)[..., None]
        out = {}
        for key, val in raw.items():
            sign = -1.0 if key.count("y") % 2 else 1.0
            out[key] = np.where(neg, sign * val * M, val)
        return out

    return jet


def reflect(f: Immersion, kind: str | ReflectionKind = "plane", tol: float = 1e-8,
            scheme: str = "auto") -> Immersion:
    """Extend f from y >= 0 to the full strip by reflection.

    The constrained components are set to exactly zero on y = 0 before
    mirroring, which is justified once the constraint residual is below
    ``tol`` (positions relative to the bounding-box diameter).
    """
    rk = ReflectionKind.parse(kind)
    report = check_constraints(f, rk, scheme=scheme)
    if report.residual > tol:
        raise ConstraintViolated(f"{rk.kind} constraint residual {report.residual:.3g} exceeds "
                                 f"{tol:g}", kind=rk.kind, residual=report.residual,
                                 report=report.sup)
    upper = f.positions.copy()
    upper[0, :, list(rk.constrained)] = 0.0
    full = _mirror(upper, rk.matrix)
    jet = _reflected_jet(f.analytic_jet, rk) if f.analytic_jet is not None else None
    meta = {**f.meta, "name": f"{f.meta.get('name', 'surface')} reflected ({rk.kind})"}
    return Immersion(mirror_grid(f.grid), full, source="analytic" if jet else "numeric",
                     analytic_jet=jet, meta=meta)


def reflect_field(values: np.ndarray, kind: str | ReflectionKind = "plane",
                  parity: str = "even") -> np.ndarray:
    """Continue a field from y >= 0 with phi(x, -y) = +-M phi(x, y).

    Components that must vanish on y = 0 for the chosen parity are zeroed
    there first.
    """
    rk = ReflectionKind.parse(kind)
    sign = {"even": 1.0, "odd": -1.0}[parity]
    upper = np.array(values, dtype=float)
    fixed = sign * np.diag(rk.matrix)
    upper[0, :, fixed < 0] = 0.0
    return _mirror(upper, sign * rk.matrix)


def restrict_upper(f: Immersion) -> Immersion:
    """The half y >= 0 of an immersion on a symmetric grid."""
    grid = f.grid
    m = grid.ny // 2
    half = ParamGrid(grid.nx, m + 1, grid.x_range, (0.0, grid.y_range[1]))
    return Immersion(half, f.positions[m:], source=f.source, analytic_jet=f.analytic_jet,
                     meta=dict(f.meta))


@dataclass(frozen=True)
class ParityTable:
    kind: str
    residuals: dict   # derivative key -> sup deviation from its parity class

    @property
    def sup(self) -> float:
        return max(self.residuals.values())


def parity_audit(f: Immersion, kind: str | ReflectionKind = "plane",
                 scheme: str = "fd") -> ParityTable:
    """Deviation of f and its derivatives from their parity classes under y -> -y.

    Derivatives with an odd number of y's should satisfy J(x, -y) = -M J(x, y),
    the others J(x, -y) = M J(x, y).
    """
    rk = ReflectionKind.parse(kind)
    lo, hi = f.grid.y_range
    if lo != -hi or f.grid.ny % 2 == 0:
        raise ValueError("parity audit needs a grid symmetric about y = 0")
    jet = f.jet(scheme)
    M = np.diag(rk.matrix)
    out = {}
    for key in JET_KEYS_2:
        sign = -1.0 if key.count("y") % 2 else 1.0
        J = jet[key]
        out[key or "f"] = float(np.max(np.abs(J[::-1] - sign * J * M)))
    return ParityTable(rk.kind, out)


@dataclass(frozen=True)
class ConformalityComparison:
    full: float
    half: float
    mirror_defect: float    # sup |R(x, -y) - R(x, y)| of the residual fields on the full strip

    @property
    def preserved(self) -> bool:
        return self.full <= self.half


def conformality_preserved(f_full: Immersion, f_half: Immersion | None = None,
                           scheme: str = "auto") -> ConformalityComparison:
    """Conformality residual on the full strip against that on y >= 0."""
    f_half = f_half or restrict_upper(f_full)
    full = conformality_residual(compute_geometry(f_full, scheme=scheme, allow_degenerate=True))
    half = conformality_residual(compute_geometry(f_half, scheme=scheme, allow_degenerate=True))
    # g11 - g22 is even in y and g12 odd
    defect = max(float(np.max(np.abs(full.diag[::-1] - full.diag))),
                 float(np.max(np.abs(full.off[::-1] + full.off))))
    return ConformalityComparison(full.sup, half.sup, defect)

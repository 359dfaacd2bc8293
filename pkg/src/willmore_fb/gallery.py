"""Closed-form example surfaces with exact jets, and ambient inversion.

Every surface is written in its natural axes and carried into the toolkit's
canonical convention (constraint plane z = 0, constraint line = x3-axis) by a
fixed rotation. Jets up to third order come from sympy and are compiled once
per parameter set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import NotMinimal, SingularityHit, SingularitySampled, WindowTooWide
from .geometry import compute_geometry, geometry_from_jet, laplace_beltrami
from .grid import JET_KEYS_3, Immersion, Jet, ParamGrid

_X, _Y = sp.symbols("x y", real=True)
_W = sp.symbols("w")

CYCLE_231 = ((0, 1, 0), (0, 0, 1), (1, 0, 0))   # (F1, F2, F3) -> (F2, F3, F1)
CYCLE_312 = ((0, 0, 1), (1, 0, 0), (0, 1, 0))   # (F1, F2, F3) -> (F3, F1, F2)
IDENTITY = ((1, 0, 0), (0, 1, 0), (0, 0, 1))

MORIN_EXCLUSION = 0.05
CATENOID_EXCLUSION = 0.05


def morin_poles() -> np.ndarray:
    """Zeros of w^4 + 2 sqrt(3) w^2 - 1: w^2 = -sqrt(3) +- 2."""
    r = math.sqrt(2.0 - math.sqrt(3.0))
    s = math.sqrt(2.0 + math.sqrt(3.0))
    return np.array([r, -r, 1j * s, -1j * s])


@dataclass(frozen=True)
class SurfaceSpec:
    id: str
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    rotation: tuple = IDENTITY
    constraint: str | None = None          # 'plane' | 'line' | None
    support: str | None = None             # support surface for free-boundary checks
    singular_set: tuple = ()
    exclusion: float = 0.0
    minimal: bool = False
    chi: int | None = None
    description: str = ""


SPECS = {
    "mercator_sphere": SurfaceSpec(
        "mercator_sphere", (-math.pi, math.pi), (0.0, 1.0), constraint="plane",
        support="plane", chi=1, description="unit sphere, Mercator chart"),
    "hemisphere": SurfaceSpec(
        "hemisphere", (-math.pi, math.pi), (0.0, 6.0), constraint="plane", support="plane",
        chi=1, description="upper unit hemisphere, Mercator chart up to y = 6"),
    "catenoid": SurfaceSpec(
        "catenoid", (-math.pi, math.pi), (0.0, 1.0), constraint="plane", support="plane",
        minimal=True, description="2(cosh y cos x, cosh y sin x, y)"),
    "inverted_catenoid": SurfaceSpec(
        "inverted_catenoid", (CATENOID_EXCLUSION, math.pi), (0.0, 1.0), rotation=CYCLE_231,
        constraint="plane", support="plane", singular_set=((0.0, 0.0),),
        exclusion=CATENOID_EXCLUSION,
        description="catenoid inverted in the unit sphere, chart w = y + i x"),
    "helicoid": SurfaceSpec(
        "helicoid", (-math.pi, math.pi), (0.0, 1.0), constraint="line", support="line",
        minimal=True, description="(sinh y cos x, sinh y sin x, x)"),
    "morin": SurfaceSpec(
        "morin", (-0.4, 0.4), (0.0, 0.4), rotation=CYCLE_312, constraint="line",
        support="line", exclusion=MORIN_EXCLUSION, minimal=True,
        singular_set=tuple((p.real, p.imag) for p in morin_poles()),
        description="minimal surface whose inversion is the Morin surface, w = x + i y"),
    "flat_disk": SurfaceSpec(
        "flat_disk", (-math.pi, math.pi), (0.0, 1.0), chi=1,
        description="(e^-y cos x, e^-y sin x, 0): unit disk minus a small disk"),
    "spherical_cap": SurfaceSpec(
        "spherical_cap", (-math.pi, math.pi), (0.0, 1.0), support="sphere:1",
        description="cap of a sphere of radius r meeting the unit sphere orthogonally"),
    "offset_plane": SurfaceSpec(
        "offset_plane", (-math.pi, math.pi), (0.0, 1.0), minimal=True,
        description="the plane z = d"),
}


def _natural_expression(sid: str, params: dict):
    """(kind, expression) with kind 'real' (3-vector in x, y) or 'holo' (in w)."""
    x, y = _X, _Y
    if sid in ("mercator_sphere", "hemisphere"):
        return "real", [sp.sech(y) * sp.cos(x), sp.sech(y) * sp.sin(x), sp.tanh(y)]
    if sid == "catenoid":
        return "real", [2 * sp.cosh(y) * sp.cos(x), 2 * sp.cosh(y) * sp.sin(x), 2 * y]
    if sid == "inverted_catenoid":
        u, v = y, x
        r2 = u**2 + v**2
        den = (1 + r2) ** 2 + r2 * sp.log(r2) ** 2
        return "real", [(1 + r2) * u / den, (1 + r2) * v / den, r2 * sp.log(r2) / den]
    if sid == "helicoid":
        return "real", [sp.sinh(y) * sp.cos(x), sp.sinh(y) * sp.sin(x), x]
    if sid == "morin":
        w = _W
        den = w**4 + 2 * sp.sqrt(3) * w**2 - 1
        return "holo", [sp.I * (w**3 - w) / den, (w**3 + w) / den,
                        sp.I / 2 * (w**4 + 1) / den]
    if sid == "flat_disk":
        return "real", [sp.exp(-y) * sp.cos(x), sp.exp(-y) * sp.sin(x), sp.Integer(0)]
    if sid == "spherical_cap":
        r = sp.nsimplify(params.get("r", 1))
        c = sp.sqrt(1 + r**2)
        t = y + sp.atanh(r / c)
        return "real", [r * sp.sech(t) * sp.cos(x), r * sp.sech(t) * sp.sin(x),
                        c - r * sp.tanh(t)]
    if sid == "offset_plane":
        d = sp.nsimplify(params.get("d", 1))
        return "real", [x, y, d]
    raise KeyError(f"unknown gallery surface {sid!r}; have {sorted(SPECS)}")


@lru_cache(maxsize=None)
def _compiled(sid: str, frozen_params: tuple):
    params = dict(frozen_params)
    kind, expr = _natural_expression(sid, params)
    if kind == "real":
        table = {}
        for key in JET_KEYS_3:
            comps = [sp.diff(e, *[{"x": _X, "y": _Y}[c] for c in key]) if key else e
                     for e in expr]
            table[key] = sp.lambdify((_X, _Y), comps, "numpy", cse=True)
        return kind, table
    derivs = [sp.lambdify(_W, [sp.diff(e, _W, n) if n else e for e in expr], "numpy", cse=True)
              for n in range(4)]
    return kind, derivs


def _holo_jet(derivs, X, Y) -> Jet:
    w = X + 1j * Y
    F = [np.stack(np.broadcast_arrays(*[np.asarray(c, dtype=complex) for c in d(w)]), -1)
         for d in derivs]
    return {
        "": F[0].real,
        "x": F[1].real, "y": -F[1].imag,
        "xx": F[2].real, "xy": -F[2].imag, "yy": -F[2].real,
        "xxx": F[3].real, "xxy": -F[3].imag, "xyy": -F[3].real, "yyy": F[3].imag,
    }


def _rotation_about_e1(deg: float) -> np.ndarray:
    a = math.radians(deg)
    return np.array([[1.0, 0.0, 0.0], [0.0, math.cos(a), -math.sin(a)],
                     [0.0, math.sin(a), math.cos(a)]])


@dataclass(frozen=True)
class AnalyticSurface:
    """A gallery surface with parameters.

    Recognised params: ``scale`` (ambient dilation), ``tilt_deg`` (rotation
    about e1 after the canonical permutation), ``offset`` (translation), plus
    shape parameters ``r`` (spherical_cap) and ``d`` (offset_plane).
    """

    spec: SurfaceSpec
    params: dict = field(default_factory=dict)

    @property
    def id(self) -> str:
        return self.spec.id

    @property
    def motion(self) -> np.ndarray:
        rot = np.asarray(self.spec.rotation, dtype=float)
        rot = _rotation_about_e1(self.params.get("tilt_deg", 0.0)) @ rot
        return float(self.params.get("scale", 1.0)) * rot

    @property
    def natural_axis(self) -> np.ndarray:
        """Image of the natural e3 axis in canonical coordinates (unit)."""
        a = self.motion @ np.array([0.0, 0.0, 1.0])
        return a / np.linalg.norm(a)

    def jet(self, X, Y) -> Jet:
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        shape_params = tuple(sorted((k, v) for k, v in self.params.items() if k in ("r", "d")))
        kind, table = _compiled(self.id, shape_params)
        if kind == "holo":
            raw = _holo_jet(table, X, Y)
        else:
            raw = {}
            for key, fn in table.items():
                comps = [np.broadcast_to(np.asarray(c, dtype=float), X.shape) for c in fn(X, Y)]
                raw[key] = np.stack(comps, axis=-1)
        M = self.motion
        out = {key: val @ M.T for key, val in raw.items()}
        offset = self.params.get("offset")
        if offset is not None:
            out[""] = out[""] + np.asarray(offset, dtype=float)
        return out

    def default_grid(self, nx: int = 65, ny: int = 33) -> ParamGrid:
        return ParamGrid(nx, ny, self.spec.x_range, self.spec.y_range)


def get(sid: str, **params) -> AnalyticSurface:
    if sid not in SPECS:
        raise KeyError(f"unknown gallery surface {sid!r}; have {sorted(SPECS)}")
    return AnalyticSurface(SPECS[sid], dict(params))


def list_surfaces() -> list[dict]:
    return [{"id": s.id, "x_range": list(s.x_range), "y_range": list(s.y_range),
             "constraint": s.constraint, "support": s.support, "description": s.description}
            for s in SPECS.values()]


def sample(sid: str, grid: ParamGrid | None = None, nx: int = 65, ny: int = 33,
           **params) -> Immersion:
    """Sample a gallery surface on ``grid`` (default: its natural ranges)."""
    surf = get(sid, **params)
    grid = grid or surf.default_grid(nx, ny)
    if surf.spec.singular_set:
        X, Y = grid.mesh()
        for px, py in surf.spec.singular_set:
            dist = np.hypot(X - px, Y - py)
            if dist.min() < surf.spec.exclusion * (1.0 - 1e-9):
                raise SingularitySampled(
                    f"grid node within {surf.spec.exclusion} of singular point ({px}, {py})",
                    point=[px, py], distance=float(dist.min()))
    return Immersion.from_jet(grid, surf.jet,
                              meta={"name": sid, "analytic_id": sid, "params": dict(params)})


# ---------------------------------------------------------------- inversion

def _inversion_tensors(d: np.ndarray, r2: float):
    """Callables for the first three derivatives of p -> c + r2 (p-c)/|p-c|^2."""
    q = np.einsum("...c,...c->...", d, d)[..., None]
    dot = lambda a, b: np.einsum("...c,...c->...", a, b)[..., None]

    def D1(v):
        return r2 * (v / q - 2.0 * d * dot(d, v) / q**2)

    def D2(v, w):
        return r2 * (-2.0 * (v * dot(d, w) + w * dot(d, v) + d * dot(v, w)) / q**2
                     + 8.0 * d * dot(d, v) * dot(d, w) / q**3)

    def D3(u, v, w):
        du, dv, dw = dot(d, u), dot(d, v), dot(d, w)
        return r2 * (-2.0 * (v * dot(u, w) + w * dot(u, v) + u * dot(v, w)) / q**2
                     + 8.0 * (v * du * dw + w * du * dv + u * dv * dw
                              + d * (du * dot(v, w) + dv * dot(u, w) + dw * dot(u, v))) / q**3
                     - 48.0 * d * du * dv * dw / q**4)

    return D1, D2, D3


def invert_jet(jet: Jet, center=(0.0, 0.0, 0.0), radius: float = 1.0) -> Jet:
    """Push a jet through the inversion by the chain rule (to third order)."""
    c = np.asarray(center, dtype=float)
    d = jet[""] - c
    D1, D2, D3 = _inversion_tensors(d, radius * radius)
    q = np.einsum("...c,...c->...", d, d)[..., None]
    out = {"": c + radius * radius * d / q}
    for a in "xy":
        out[a] = D1(jet[a])
    for key in ("xx", "xy", "yy"):
        out[key] = D1(jet[key]) + D2(jet[key[0]], jet[key[1]])
    if "xxx" in jet:
        for key in ("xxx", "xxy", "xyy", "yyy"):
            i, j, k = key
            srt = lambda s: "".join(sorted(s))
            out[key] = (D1(jet[key]) + D2(jet[srt(i + j)], jet[k]) + D2(jet[srt(i + k)], jet[j])
                        + D2(jet[srt(j + k)], jet[i]) + D3(jet[i], jet[j], jet[k]))
    return out


def invert(f: Immersion, center=(0.0, 0.0, 0.0), radius: float = 1.0,
           delta: float | None = None) -> Immersion:
    """Apply x -> c + r^2 (x - c)/|x - c|^2 nodewise; jets follow by the chain rule."""
    c = np.asarray(center, dtype=float)
    delta = 1e-6 * f.scale() if delta is None else delta
    dist = np.linalg.norm(f.positions - c, axis=-1)
    if dist.min() < delta:
        j, i = np.unravel_index(int(np.argmin(dist)), dist.shape)
        raise SingularityHit(f"surface passes within {delta:g} of the inversion center",
                             node=[int(j), int(i)], distance=float(dist.min()))
    jet_fn = None
    if f.analytic_jet is not None:
        base = f.analytic_jet
        jet_fn = lambda X, Y: invert_jet(base(X, Y), c, radius)
    pos = invert_jet({"": f.positions, "x": f.positions, "y": f.positions,
                      "xx": f.positions, "xy": f.positions, "yy": f.positions}, c, radius)[""]
    meta = {"name": f"inverted {f.meta.get('name', 'surface')}"}
    return Immersion(f.grid, pos, source="analytic" if jet_fn else "numeric",
                     analytic_jet=jet_fn, meta=meta)


def inverted_catenoid_metric_factor(rho):
    """Conformal factor of the inverted catenoid in the w chart (closed form)."""
    rho = np.asarray(rho, dtype=float)
    a = 1.0 + 2.0 * rho**2 + rho**4
    return a / (a + 4.0 * rho**2 * np.log(rho) ** 2) ** 2


@dataclass(frozen=True)
class InversionDensityReport:
    left: np.ndarray          # 1/4 |H+|^2 dmu+
    right: np.ndarray         # (Laplace-Beltrami of log|f-|^2) dmu-
    perp: np.ndarray          # 4 |f-^perp|^2 / |f-|^4 dmu-
    residual: np.ndarray      # left - right
    perp_residual: np.ndarray  # right - perp
    sup_residual: float       # over nodes two away from the edges
    sup_perp_residual: float


def inversion_density_identity(f_minus: Immersion, f_plus: Immersion | None = None,
                               scheme: str = "auto", minimal_tol: float = 1e-6
                               ) -> InversionDensityReport:
    """Nodewise check of the inversion identity for a minimal surface f-.

    The left side is computed from the curvature of the inverted surface, the
    right side by the divergence-form Laplace-Beltrami stencil on f-.
    """
    f_plus = f_plus or invert(f_minus)
    gm = compute_geometry(f_minus, scheme=scheme)
    if np.max(np.abs(gm.H)) > minimal_tol * max(1.0, 1.0 / f_minus.scale()) and scheme != "fd":
        raise NotMinimal("f- is not minimal", sup_H=float(np.max(np.abs(gm.H))))
    gp = compute_geometry(f_plus, scheme=scheme)
    r2 = np.einsum("...c,...c->...", f_minus.positions, f_minus.positions)
    left = 0.25 * gp.H**2 * gp.area_elem
    right = laplace_beltrami(np.log(r2), gm) * gm.area_elem
    perp = 4.0 * np.einsum("...c,...c->...", f_minus.positions, gm.nu) ** 2 / r2**2 * gm.area_elem
    res, pres = left - right, right - perp
    inner = (slice(2, -2), slice(2, -2))
    return InversionDensityReport(left, right, perp, res, pres,
                                  float(np.max(np.abs(res[inner]))),
                                  float(np.max(np.abs(pres[inner]))))


# ---------------------------------------------------------------- log fit

@dataclass(frozen=True)
class LogFit:
    slope: float
    intercept: float
    rms_residual: float
    rho: np.ndarray
    values: np.ndarray


def mean_curvature_log_fit(surface: AnalyticSurface | str = "inverted_catenoid",
                           window=(1e-3, 1e-2), n: int = 24, center=(0.0, 0.0),
                           angle: float = 0.0, axis=None, scalar: bool = False) -> LogFit:
    """Least-squares slope of <H vec, axis> against log rho near ``center``.

    Points are taken at parameter distance rho from ``center`` along the
    direction ``angle``; ``axis`` defaults to the surface's natural e3. With
    ``scalar`` the fitted quantity is H itself.
    """
    surf = get(surface) if isinstance(surface, str) else surface
    rho = np.geomspace(window[0], window[1], n)
    X = center[0] + rho * math.sin(angle)
    Y = center[1] + rho * math.cos(angle)
    geom = geometry_from_jet(surf.jet(X, Y))
    axis = surf.natural_axis if axis is None else np.asarray(axis, dtype=float)
    vals = geom.H if scalar else geom.mean_curvature_vector @ axis
    A = np.stack([np.log(rho), np.ones_like(rho)], axis=1)
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - vals) ** 2)))
    span = abs(coef[0]) * (math.log(window[1]) - math.log(window[0]))
    if rms > 0.05 * span + 1e-9 * max(1.0, float(np.max(np.abs(vals)))):
        raise WindowTooWide("affine fit in log(rho) does not capture the data",
                            slope=float(coef[0]), rms=rms)
    return LogFit(float(coef[0]), float(coef[1]), rms, rho, vals)

"""Boundary conditions along y = 0 and the trace/extension operator pair.

The support surface S bounds a region and N^S is its unit normal pointing
into that region; the constraint is Df.eta = N^S along the boundary. The form
h^S(v, w) = -<v, DN^S w> makes a sphere of radius R give |v|^2 / R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .energies import VariationField, _normal_dy
from .errors import DegenerateMetric, NotConformal, NotOrthogonal
from .geometry import SurfaceGeometry, tangent_frame
from .grid import d1

E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class SupportSurface:
    kind: str               # 'plane' | 'sphere' | 'line'
    radius: float = 1.0

    @classmethod
    def parse(cls, text: "str | SupportSurface") -> "SupportSurface":
        if isinstance(text, SupportSurface):
            return text
        text = text.strip().lower()
        if text in ("plane", "line"):
            return cls(text)
        if text.startswith("sphere"):
            _, _, r = text.partition(":")
            radius = float(r) if r else 1.0
            if not radius > 0:
                raise ValueError("sphere radius must be positive")
            return cls("sphere", radius)
        raise ValueError(f"unknown support {text!r}; use plane, sphere:R or line")

    @property
    def is_surface(self) -> bool:
        return self.kind != "line"

    def normal(self, p: np.ndarray) -> np.ndarray:
        """Unit normal N^S at points p, pointing into the enclosed region."""
        p = np.asarray(p, dtype=float)
        if self.kind == "plane":
            return np.broadcast_to(E3, p.shape).copy()
        if self.kind == "sphere":
            return -p / np.linalg.norm(p, axis=-1, keepdims=True)
        raise ValueError("a line has no unit normal")

    def h_s(self, p: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Second fundamental form -<v, DN^S w>."""
        if self.kind == "plane":
            return np.zeros(np.shape(v)[:-1])
        if self.kind == "sphere":
            return np.einsum("...c,...c->...", v, w) / self.radius
        raise ValueError("a line has no second fundamental form")

    def distance(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.kind == "plane":
            return np.abs(p[..., 2])
        if self.kind == "sphere":
            return np.abs(np.linalg.norm(p, axis=-1) - self.radius)
        return np.hypot(p[..., 0], p[..., 1])

    def __str__(self) -> str:
        return f"sphere:{self.radius:g}" if self.kind == "sphere" else self.kind


def _row(geom: SurfaceGeometry) -> int:
    j = geom.grid.boundary_row if geom.grid is not None else None
    if j is None:
        raise ValueError("grid has no boundary row y = 0")
    return j


def conormal(geom: SurfaceGeometry) -> np.ndarray:
    """Inward unit conormal along y = 0 as coefficients (eta^1, eta^2)."""
    j = _row(geom)
    g = geom.g[j]
    g11, g12, det = g[:, 0, 0], g[:, 0, 1], geom.det_g[j]
    if np.any(~(g11 * det > 0)):
        i = int(np.argmax(~(g11 * det > 0)))
        raise DegenerateMetric("metric degenerates on the boundary row", node=[j, i])
    return np.stack([-g12, g11], axis=-1) / np.sqrt(g11 * det)[:, None]


def unit_tangent(geom: SurfaceGeometry) -> np.ndarray:
    j = _row(geom)
    out = np.zeros((geom.grid.nx, 2))
    out[:, 0] = 1.0 / np.sqrt(geom.g[j, :, 0, 0])
    return out


def orthogonality_residual(geom: SurfaceGeometry, support: SupportSurface | str) -> float:
    """Relative sup of dist(f, S) / scale and |<nu, N^S>| along y = 0."""
    support = SupportSurface.parse(support)
    j = _row(geom)
    p = geom.jet[""][j]
    scale = geom.immersion.scale() if geom.immersion is not None else 1.0
    res = float(np.max(support.distance(p))) / scale
    if support.is_surface:
        res = max(res, float(np.max(np.abs(np.einsum("ic,ic->i", geom.nu[j], support.normal(p))))))
    return res


@dataclass(frozen=True)
class ResidualReport:
    support: str
    x: np.ndarray
    traces: dict           # name -> per-node residual along y = 0
    sup: dict              # name -> sup norm
    orthogonality: float

    def to_dict(self) -> dict:
        return {"support": self.support, "orthogonality": self.orthogonality, "sup": self.sup}

    def csv_rows(self):
        names = list(self.traces)
        yield ["x"] + names
        for i, x in enumerate(self.x):
            yield [repr(float(x))] + [repr(float(self.traces[n][i])) for n in names]


def free_bc_residuals(geom: SurfaceGeometry, support: SupportSurface | str = "plane",
                      tol_orth: float = 1e-8, check: bool = True) -> ResidualReport:
    """Boundary residuals of the free-boundary problems for W, E and T.

    For a line only the Navier condition H = 0 applies. Surface supports need
    orthogonal contact; otherwise NotOrthogonal is raised (``check=False``
    reports anyway).
    """
    support = SupportSurface.parse(support)
    j = _row(geom)
    H = geom.H[j]
    orth = orthogonality_residual(geom, support)
    traces = {"navier": H}
    if support.is_surface:
        if check and orth > tol_orth:
            raise NotOrthogonal("surface does not meet the support orthogonally along y = 0",
                                residual=orth, support=str(support))
        p = geom.jet[""][j]
        nu = geom.nu[j]
        eta = conormal(geom)
        H_eta = np.einsum("ia,ia->i", geom.dH[j], eta)
        hs_nn = support.h_s(p, nu, nu)
        speed = np.sqrt(geom.g[j, :, 0, 0])
        ds_f = geom.jet["x"][j] / speed[:, None]
        q = support.h_s(p, nu, ds_f)
        ds_q = d1(q, geom.grid.hx, 0) / speed
        h_ee = np.einsum("ia,iab,ib->i", eta, geom.h[j], eta)
        h_tt = geom.h[j, :, 0, 0] / geom.g[j, :, 0, 0]
        traces["willmore"] = H_eta + hs_nn * H
        traces["l2"] = H_eta + hs_nn * h_ee - ds_q
        traces["thomsen_1"] = traces["willmore"]
        traces["thomsen_2"] = H_eta + hs_nn * (h_ee - h_tt) - ds_q
    sup = {k: float(np.max(np.abs(v))) for k, v in traces.items()}
    return ResidualReport(str(support), geom.grid.x, traces, sup, orth)


# ---------------------------------------------------------------- admissibility

def _dy_trace(geom: SurfaceGeometry, phi: VariationField) -> np.ndarray:
    j = _row(geom)
    if phi.dy_trace is not None:
        return phi.dy_trace
    return d1(phi.values, geom.grid.hy, 0)[j]


def normal_derivative_trace(geom: SurfaceGeometry, phi: VariationField) -> np.ndarray:
    """d phi / d eta along y = 0 (vector valued)."""
    j = _row(geom)
    eta = conormal(geom)
    dx = d1(phi.values, geom.grid.hx, 1)[j]
    return eta[:, :1] * dx + eta[:, 1:] * _dy_trace(geom, phi)


@dataclass(frozen=True)
class AdmissibilityReport:
    a_resid: float
    b_resid: float
    tol: float
    kind: str

    @property
    def passed(self) -> bool:
        return self.a_resid < self.tol and self.b_resid < self.tol


def admissibility(geom: SurfaceGeometry, phi: VariationField, kind: str = "plane",
                  tol: float = 1e-8) -> AdmissibilityReport:
    """Linearised boundary constraints of a variation field.

    plane: <phi, e3> = 0 and <d_eta phi, nu> = 0; line: phi_1 = phi_2 = 0;
    sphere:R: <phi, N^S> = 0 and d_eta phi_n + h^S(nu, nu) phi_n = 0.
    """
    support = SupportSurface.parse(kind)
    j = _row(geom)
    vals = phi.values[j]
    if support.kind == "line":
        a = float(np.max(np.abs(vals[:, 0])))
        b = float(np.max(np.abs(vals[:, 1])))
    elif support.kind == "plane":
        a = float(np.max(np.abs(vals[:, 2])))
        b = float(np.max(np.abs(np.einsum("ic,ic->i", normal_derivative_trace(geom, phi),
                                          geom.nu[j]))))
    else:
        p = geom.jet[""][j]
        nu = geom.nu[j]
        a = float(np.max(np.abs(np.einsum("ic,ic->i", vals, support.normal(p)))))
        eta = conormal(geom)
        dnu_x = d1(geom.nu, geom.grid.hx, 1)[j]
        dnu_y = _normal_dy(geom)[j]
        dnu_eta = eta[:, :1] * dnu_x + eta[:, 1:] * dnu_y
        dpn = (np.einsum("ic,ic->i", normal_derivative_trace(geom, phi), nu)
               + np.einsum("ic,ic->i", vals, dnu_eta))
        pn = phi.normal_part[j]
        b = float(np.max(np.abs(dpn + support.h_s(p, nu, nu) * pn)))
    return AdmissibilityReport(a, b, tol, str(support))


# ---------------------------------------------------------------- L_f and Phi_f

def lf_operator(geom: SurfaceGeometry, phi: VariationField) -> tuple[np.ndarray, np.ndarray]:
    """(<phi, e3>, e^{-u} <d_y phi, nu>) along y = 0 for a conformal chart."""
    j = _row(geom)
    u = geom.u_conf[j]
    if np.isnan(u).any():
        raise NotConformal("conformal factor undefined on the boundary row",
                           nodes=int(np.isnan(u).sum()))
    a = phi.values[j, :, 2]
    b = np.exp(-u) * np.einsum("ic,ic->i", _dy_trace(geom, phi), geom.nu[j])
    return a, b


def phi_extension(geom: SurfaceGeometry, a, b, modes: int = spectral.DEFAULT_MODES,
                  support_tol: float = 1e-12, cut: bool = True) -> VariationField:
    """Right inverse of L_f built from biharmonic extensions.

    Components 1, 2 are BH(0, e^u b nu_i) and component 3 is BH(a, 0), all
    multiplied by the fixed cutoff. The exact y-derivative along y = 0 is
    attached so L_f can read it back without a difference quotient.
    """
    grid = geom.grid
    j = _row(geom)
    if grid.x_range != (-math.pi, math.pi) or j != 0:
        raise ValueError("the extension needs x in [-pi, pi] and y starting at 0")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, y = grid.x, grid.y
    spectral.check_support(a, x, tol=support_tol, name="a")
    spectral.check_support(b, x, tol=support_tol, name="b")
    u = geom.u_conf[j]
    if np.isnan(u).any():
        raise NotConformal("conformal factor undefined on the boundary row")
    nu = geom.nu[j]
    zero = spectral.from_coefficients(K=modes)
    eta = spectral.cutoff(x, y) if cut else np.ones((grid.ny, grid.nx))
    chi = eta[0]
    values = np.zeros((grid.ny, grid.nx, 3))
    dy = np.zeros((grid.nx, 3))
    for i in range(2):
        psi = spectral.fourier_decompose(np.exp(u) * b * nu[:, i], modes)
        values[..., i] = spectral.biharmonic_extension(zero, psi, x, y).values
        dy[:, i] = chi * psi.evaluate(x)
    phi3 = spectral.fourier_decompose(a, modes)
    values[..., 2] = spectral.biharmonic_extension(phi3, zero, x, y).values
    values *= eta[..., None]
    return VariationField.from_values(values, geom, dy_trace=dy, name="phi_extension")

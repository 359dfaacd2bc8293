"""First and second order geometry of a sampled immersion.

Conventions: ``nu = f_x x f_y / |f_x x f_y|``, ``h_ab = <f_ab, nu>`` and
``H = g^ab h_ab`` (sum of principal curvatures), so ``H nu`` is the mean
curvature vector. With these conventions the outward-oriented Mercator sphere
has ``H = -2``; H only enters the energies squared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateMetric
from .grid import Immersion, Jet, ParamGrid, fd_gradient

DEFAULT_EPS = 1e-6
CONFORMAL_TOL = 1e-8


def _sym(packed: np.ndarray) -> np.ndarray:
    out = np.empty(packed.shape[:-1] + (2, 2))
    out[..., 0, 0] = packed[..., 0]
    out[..., 0, 1] = out[..., 1, 0] = packed[..., 1]
    out[..., 1, 1] = packed[..., 2]
    return out


def inverse_2x2(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.empty_like(g)
        inv[..., 0, 0] = g[..., 1, 1] / det
        inv[..., 1, 1] = g[..., 0, 0] / det
        inv[..., 0, 1] = -g[..., 0, 1] / det
        inv[..., 1, 0] = -g[..., 1, 0] / det
    return det, inv


def tangent_frame(jet: Jet) -> np.ndarray:
    """Stack (f_x, f_y) into shape (..., 2, 3)."""
    return np.stack([jet["x"], jet["y"]], axis=-2)


def hessian_frame(jet: Jet) -> np.ndarray:
    """Stack the second derivatives into shape (..., 2, 2, 3)."""
    row0 = np.stack([jet["xx"], jet["xy"]], axis=-2)
    row1 = np.stack([jet["xy"], jet["yy"]], axis=-2)
    return np.stack([row0, row1], axis=-3)


def _third_frame(jet: Jet) -> np.ndarray:
    key = lambda i, j, k: "".join(sorted("xy"[i] + "xy"[j] + "xy"[k]))
    return np.stack([np.stack([np.stack([jet[key(i, j, k)] for k in range(2)], axis=-2)
                               for j in range(2)], axis=-3) for i in range(2)], axis=-4)


def christoffel(jet: Jet, inv_g: np.ndarray) -> np.ndarray:
    """Gamma^k_ij = g^kl <f_ij, f_l>, shape (..., k, i, j)."""
    df = tangent_frame(jet)
    d2f = hessian_frame(jet)
    lower = np.einsum("...ijc,...lc->...lij", d2f, df)
    return np.einsum("...kl,...lij->...kij", inv_g, lower)


@dataclass(frozen=True)
class SurfaceGeometry:
    g: np.ndarray
    det_g: np.ndarray
    inv_g: np.ndarray
    nu: np.ndarray
    h: np.ndarray
    H: np.ndarray
    h0: np.ndarray
    h0_norm2: np.ndarray
    h_norm2: np.ndarray
    K_gauss: np.ndarray
    area_elem: np.ndarray
    u_conf: np.ndarray
    dH: np.ndarray
    jet: Jet
    scheme: str
    grid: ParamGrid | None = None
    immersion: Immersion | None = None

    @property
    def mean_curvature_vector(self) -> np.ndarray:
        return self.H[..., None] * self.nu

    def boundary(self, name: str) -> np.ndarray:
        """Field ``name`` restricted to the row y = 0."""
        j = self.grid.boundary_row
        if j is None:
            raise ValueError("grid has no boundary row y = 0")
        return getattr(self, name)[j]


def geometry_from_jet(jet: Jet, eps: float = DEFAULT_EPS, allow_degenerate: bool = False,
                      scheme: str = "analytic") -> SurfaceGeometry:
    """Pointwise geometry from a 2-jet (a 3-jet adds an exact gradient of H)."""
    gp, nu, hp = kernels.fundamental_forms(jet["x"], jet["y"], jet["xx"], jet["xy"], jet["yy"])
    g, h = _sym(gp), _sym(hp)
    det, inv = inverse_2x2(g)
    bad = ~(det > eps * eps)
    if bad.any() and not allow_degenerate:
        node = [int(v) for v in np.argwhere(bad)[0]]
        raise DegenerateMetric(f"det g <= {eps * eps:g} at node {node}", node=node,
                               det_g=float(det[tuple(node)]))
    with np.errstate(invalid="ignore"):
        H = np.einsum("...ab,...ab->...", inv, h)
        h0 = h - 0.5 * H[..., None, None] * g
        mixed = np.einsum("...ab,...bc->...ac", inv, h)
        h_norm2 = np.einsum("...ab,...ba->...", mixed, mixed)
        mixed0 = np.einsum("...ab,...bc->...ac", inv, h0)
        h0_norm2 = np.einsum("...ab,...ba->...", mixed0, mixed0)
        K = (h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] ** 2) / det
        area = np.sqrt(np.maximum(det, 0.0))
        conf = (np.abs(g[..., 0, 0] - g[..., 1, 1]) + np.abs(g[..., 0, 1])
                < CONFORMAL_TOL * 0.5 * (g[..., 0, 0] + g[..., 1, 1]))
        u_conf = np.where(conf & ~bad, 0.5 * np.log(np.where(conf & ~bad, g[..., 0, 0], 1.0)),
                          np.nan)
    dH = _analytic_dH(jet, g, inv, nu, h) if "xxx" in jet else np.full(H.shape + (2,), np.nan)
    return SurfaceGeometry(g=g, det_g=det, inv_g=inv, nu=nu, h=h, H=H, h0=h0,
                           h0_norm2=h0_norm2, h_norm2=h_norm2, K_gauss=K, area_elem=area,
                           u_conf=u_conf, dH=dH, jet=jet, scheme=scheme)


def _analytic_dH(jet, g, inv, nu, h):
    df = tangent_frame(jet)
    d2f = hessian_frame(jet)
    d3f = _third_frame(jet)
    # d_k g_ij = <f_ik, f_j> + <f_i, f_jk>
    dg = np.einsum("...ikc,...jc->...kij", d2f, df)
    dg = dg + np.swapaxes(dg, -1, -2)
    dinv = -np.einsum("...ia,...kab,...bj->...kij", inv, dg, inv)
    # Weingarten: d_k nu = -h_ka g^ab f_b
    dnu = -np.einsum("...ka,...ab,...bc->...kc", h, inv, df)
    dh = (np.einsum("...ijkc,...c->...kij", d3f, nu)
          + np.einsum("...ijc,...kc->...kij", d2f, dnu))
    return (np.einsum("...kij,...ij->...k", dinv, h)
            + np.einsum("...ij,...kij->...k", inv, dh))


def compute_geometry(f: Immersion, scheme: str = "auto", eps: float = DEFAULT_EPS,
                     allow_degenerate: bool = False) -> SurfaceGeometry:
    """Geometry of ``f`` on its grid.

    ``scheme`` is 'analytic' (exact jet callbacks), 'fd' (second-order finite
    differences, one-sided at the edges) or 'auto'. The gradient of H is exact
    when the analytic jet carries third derivatives, otherwise it is a finite
    difference of the nodal H.
    """
    if scheme == "auto":
        scheme = "analytic" if f.analytic_jet is not None else "fd"
    jet = f.jet(scheme)
    geom = geometry_from_jet(jet, eps=eps, allow_degenerate=allow_degenerate, scheme=scheme)
    dH = geom.dH
    if np.isnan(dH).all():
        Hx, Hy = fd_gradient(geom.H, f.grid)
        dH = np.stack([Hx, Hy], axis=-1)
    return SurfaceGeometry(**{**geom.__dict__, "dH": dH, "grid": f.grid, "immersion": f})


@dataclass(frozen=True)
class ConformalityReport:
    diag: np.ndarray        # g11 - g22
    off: np.ndarray         # g12
    sup_diag: float
    sup_off: float
    u_conf: np.ndarray

    @property
    def sup(self) -> float:
        return max(self.sup_diag, self.sup_off)


def conformality_residual(geom: SurfaceGeometry) -> ConformalityReport:
    diag = geom.g[..., 0, 0] - geom.g[..., 1, 1]
    off = geom.g[..., 0, 1]
    return ConformalityReport(diag, off, float(np.max(np.abs(diag))),
                              float(np.max(np.abs(off))), geom.u_conf)


@dataclass(frozen=True)
class WeakImmersionCert:
    min_det_g: float
    lambda_low: float
    eps: float
    passed: bool


def weak_immersion_check(geom: SurfaceGeometry, eps: float = DEFAULT_EPS) -> WeakImmersionCert:
    min_det = float(np.min(geom.det_g))
    # |f_x x f_y| = sqrt(det g), so lambda = 1/2 log min sqrt(det g)
    with np.errstate(divide="ignore"):
        lam = 0.5 * np.log(np.sqrt(max(min_det, 0.0)))
    return WeakImmersionCert(min_det, float(lam), eps, min_det >= eps * eps)


def laplace_beltrami(u: np.ndarray, geom: SurfaceGeometry) -> np.ndarray:
    """Divergence-form Laplace-Beltrami: (1/sqrt g) d_a(sqrt g g^ab d_b u)."""
    grid = geom.grid
    ux, uy = fd_gradient(u, grid)
    s = geom.area_elem
    inv = geom.inv_g
    flux_x = s * (inv[..., 0, 0] * ux + inv[..., 0, 1] * uy)
    flux_y = s * (inv[..., 1, 0] * ux + inv[..., 1, 1] * uy)
    div = fd_gradient(flux_x, grid)[0] + fd_gradient(flux_y, grid)[1]
    return div / s


def laplace_beltrami_nondivergence(u: np.ndarray, geom: SurfaceGeometry) -> np.ndarray:
    """g^ij (u_ij - Gamma^k_ij u_k) with compact second differences."""
    from .grid import d1, d2

    grid = geom.grid
    ux, uy = d1(u, grid.hx, 1), d1(u, grid.hy, 0)
    hess = np.empty(u.shape + (2, 2))
    hess[..., 0, 0] = d2(u, grid.hx, 1)
    hess[..., 1, 1] = d2(u, grid.hy, 0)
    hess[..., 0, 1] = hess[..., 1, 0] = d1(ux, grid.hy, 0)
    gam = christoffel(geom.jet, geom.inv_g)
    cov = hess - np.einsum("...kij,...k->...ij", gam, np.stack([ux, uy], axis=-1))
    return np.einsum("...ij,...ij->...", geom.inv_g, cov)

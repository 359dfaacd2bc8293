"""Curvature energies, their first variations and the related identities.

All area integrals use the composite trapezoid rule of the grid, so the
pointwise identity |h|^2 = |h0|^2 + H^2/2 carries over to E = T + W exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientGrid, NotOrthogonal, StepTooLarge, SupportViolation
from .geometry import (
    DEFAULT_EPS,
    SurfaceGeometry,
    christoffel,
    compute_geometry,
    geometry_from_jet,
    hessian_frame,
    laplace_beltrami,
    tangent_frame,
)
from .grid import Immersion, ParamGrid, d1, d2, fd_jet


# ---------------------------------------------------------------- quadrature

def surface_integral(density: np.ndarray, grid: ParamGrid) -> float:
    """Trapezoid integral over the grid.

    Rows mirrored about y = 0 are added pairwise first, so a density that is
    odd in y integrates to exactly zero on a symmetric grid.
    """
    rows = np.sum(density * grid.trapezoid_weights(), axis=1)
    lo, hi = grid.y_range
    if lo == -hi and grid.ny % 2 == 1:
        m = grid.ny // 2
        folded = rows[m + 1:] + rows[m - 1::-1]
        return float(rows[m] + np.sum(folded))
    return float(np.sum(rows))


def line_integral(values: np.ndarray, grid: ParamGrid, speed: np.ndarray | None = None) -> float:
    """Trapezoid integral along the row y = 0 against ds = speed dx."""
    w = grid.line_weights()
    return float(np.sum(values * w * (1.0 if speed is None else speed)))


def willmore_energy(geom: SurfaceGeometry) -> float:
    return surface_integral(0.25 * geom.H**2 * geom.area_elem, geom.grid)


def l2_energy(geom: SurfaceGeometry) -> float:
    return surface_integral(0.5 * geom.h_norm2 * geom.area_elem, geom.grid)


def thomsen_energy(geom: SurfaceGeometry) -> float:
    return surface_integral(0.5 * geom.h0_norm2 * geom.area_elem, geom.grid)


def willmore_operator(geom: SurfaceGeometry, oracle: bool = False) -> np.ndarray:
    """Laplace-Beltrami of H plus |h0|^2 H at every node.

    The default uses the divergence-form stencil; ``oracle=True`` uses the
    independent non-divergence form with Christoffel symbols.
    """
    if geom.grid is None:
        raise ValueError("geometry has no grid")
    if geom.grid.ny - 2 < 5 or geom.grid.nx - 2 < 5:
        raise InsufficientGrid("the Willmore operator needs at least 5 interior rows and columns",
                               nx=geom.grid.nx, ny=geom.grid.ny)
    if oracle:
        from .geometry import laplace_beltrami_nondivergence

        lap = laplace_beltrami_nondivergence(geom.H, geom)
    else:
        lap = laplace_beltrami(geom.H, geom)
    return lap + geom.h0_norm2 * geom.H


# ---------------------------------------------------------------- variation fields

def _edge_mask(grid: ParamGrid) -> np.ndarray:
    """Nodes a compactly supported field must vanish on (all edges except y = 0)."""
    mask = np.zeros((grid.ny, grid.nx), dtype=bool)
    mask[:, 0] = mask[:, -1] = True
    mask[-1, :] = True
    if grid.y_range[0] != 0.0:
        mask[0, :] = True
    return mask


@dataclass(frozen=True)
class VariationField:
    """A velocity field phi on the grid with its normal/tangential split.

    ``dy_trace`` optionally carries an exact y-derivative along y = 0, used in
    place of the one-sided difference when present.
    """

    values: np.ndarray
    support_mask: np.ndarray
    normal_part: np.ndarray
    tangential_part: np.ndarray
    dy_trace: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, values: np.ndarray, geom: SurfaceGeometry, dy_trace=None,
                    check_support: bool = True, atol: float = 0.0, **meta) -> "VariationField":
        values = np.asarray(values, dtype=float)
        expected = geom.nu.shape
        if values.shape != expected:
            raise ValueError(f"field shape {values.shape} does not match geometry {expected}")
        support = np.linalg.norm(values, axis=-1) > atol
        if check_support:
            hit = support & _edge_mask(geom.grid)
            if hit.any():
                node = [int(v) for v in np.argwhere(hit)[0]]
                raise SupportViolation("field does not vanish on the excluded edges", node=node)
        phi_n = np.einsum("...c,...c->...", values, geom.nu)
        xi = np.einsum("...ij,...jc,...c->...i", geom.inv_g, tangent_frame(geom.jet), values)
        return cls(values, support, phi_n, xi,
                   None if dy_trace is None else np.asarray(dy_trace, dtype=float), dict(meta))

    def reconstruction_error(self, geom: SurfaceGeometry) -> float:
        rebuilt = (self.normal_part[..., None] * geom.nu
                   + np.einsum("...i,...ic->...c", self.tangential_part, tangent_frame(geom.jet)))
        return float(np.max(np.abs(rebuilt - self.values)))


def _field_derivatives(values: np.ndarray, grid: ParamGrid):
    """(first, second) derivative frames of a grid field, shapes (...,2,C), (...,2,2,C)."""
    j = fd_jet(values, grid)
    first = np.stack([j["x"], j["y"]], axis=-2)
    row0 = np.stack([j["xx"], j["xy"]], axis=-2)
    row1 = np.stack([j["xy"], j["yy"]], axis=-2)
    return first, np.stack([row0, row1], axis=-3)


def vector_laplacian(values: np.ndarray, geom: SurfaceGeometry) -> np.ndarray:
    """Componentwise g^ij (phi_ij - Gamma^k_ij phi_k)."""
    first, second = _field_derivatives(values, geom.grid)
    gam = christoffel(geom.jet, geom.inv_g)
    cov = second - np.einsum("...kij,...kc->...ijc", gam, first)
    return np.einsum("...ij,...ijc->...c", geom.inv_g, cov)


@dataclass(frozen=True)
class VariationReport:
    total: float
    terms: tuple[float, float, float]
    density: np.ndarray


def first_variation_density(geom: SurfaceGeometry, phi: VariationField | np.ndarray) -> tuple:
    """The three integrands of the weak first variation of W, per node."""
    values = phi.values if isinstance(phi, VariationField) else np.asarray(phi, dtype=float)
    df = tangent_frame(geom.jet)
    dphi, _ = _field_derivatives(values, geom.grid)
    inv, H, s = geom.inv_g, geom.H, geom.area_elem
    lap = vector_laplacian(values, geom)
    cross = np.einsum("...jc,...lc->...jl", df, dphi)              # <f_j, phi_l>
    t1 = 0.5 * H * np.einsum("...c,...c->...", geom.nu, lap) * s
    t2 = -H * np.einsum("...ij,...kl,...ik,...jl->...", inv, inv, geom.h, cross) * s
    t3 = 0.25 * H**2 * np.einsum("...ij,...ij->...", inv, cross) * s
    return t1, t2, t3


def first_variation_willmore(geom: SurfaceGeometry, phi: VariationField | np.ndarray,
                             check_support: bool = True) -> VariationReport:
    """Derivative of W at f in direction phi, by the weak three-term formula.

    Uses the full inverse metric, so the chart need not be conformal. The
    tangential derivatives of phi come from the grid stencils.
    """
    if not isinstance(phi, VariationField):
        phi = VariationField.from_values(phi, geom, check_support=check_support)
    elif check_support:
        hit = phi.support_mask & _edge_mask(geom.grid)
        if hit.any():
            raise SupportViolation("field does not vanish on the excluded edges",
                                   node=[int(v) for v in np.argwhere(hit)[0]])
    t1, t2, t3 = first_variation_density(geom, phi)
    terms = tuple(surface_integral(t, geom.grid) for t in (t1, t2, t3))
    return VariationReport(surface_integral(t1 + t2 + t3, geom.grid), terms, t1 + t2 + t3)


def energy_derivative_fd(f: Immersion, phi: np.ndarray, t: float = 1e-5,
                         energy=willmore_energy, scheme: str = "fd") -> float:
    """Central difference (E(f + t phi) - E(f - t phi)) / 2t of a grid energy."""
    plus = compute_geometry(Immersion(f.grid, f.positions + t * phi), scheme=scheme)
    minus = compute_geometry(Immersion(f.grid, f.positions - t * phi), scheme=scheme)
    return (energy(plus) - energy(minus)) / (2.0 * t)


# ---------------------------------------------------------------- boundary forms

def _conormal(geom: SurfaceGeometry) -> np.ndarray:
    from .free_boundary import conormal

    return conormal(geom)


@dataclass(frozen=True)
class BoundaryForm:
    kind: str
    values: np.ndarray
    integral: float


def _boundary_traces(geom: SurfaceGeometry, phi: VariationField):
    grid = geom.grid
    j = grid.boundary_row
    if j is None:
        raise ValueError("grid has no boundary row y = 0")
    eta = _conormal(geom)
    # derivatives of phi_n along I: central in x, one-sided in y (or exact when given)
    pn = phi.normal_part
    dx_pn = d1(pn, grid.hx, 1)[j]
    if phi.dy_trace is not None:
        dnu_y = _normal_dy(geom)[j]
        dy_pn = (np.einsum("ic,ic->i", phi.dy_trace, geom.nu[j])
                 + np.einsum("ic,ic->i", phi.values[j], dnu_y))
    else:
        dy_pn = d1(pn, grid.hy, 0)[j]
    dpn = np.stack([dx_pn, dy_pn], axis=-1)
    return j, eta, dpn


def _normal_dy(geom: SurfaceGeometry) -> np.ndarray:
    """d nu / dy by the Weingarten equation."""
    df = tangent_frame(geom.jet)
    return -np.einsum("...b,...bc,...cd->...d", geom.h[..., 1, :], geom.inv_g, df)


def boundary_forms(geom: SurfaceGeometry, phi: VariationField) -> dict[str, BoundaryForm]:
    """Boundary densities omega, alpha, tau along y = 0 and their integrals.

    omega belongs to W, alpha to T and tau to E, so tau = alpha + omega / 2
    holds pointwise. Integrals are taken against ds = sqrt(g11) dx.
    """
    j, eta, dpn = _boundary_traces(geom, phi)
    g, inv = geom.g[j], geom.inv_g[j]
    H, pn = geom.H[j], phi.normal_part[j]
    H_eta = np.einsum("ia,ia->i", geom.dH[j], eta)
    pn_eta = np.einsum("ia,ia->i", dpn, eta)
    grad_pn = np.einsum("iab,ib->ia", inv, dpn)
    g_xi_eta = np.einsum("ia,iab,ib->i", phi.tangential_part[j], g, eta)
    h0_term = np.einsum("ia,iab,ib->i", grad_pn, geom.h0[j], eta)
    h_term = np.einsum("ia,iab,ib->i", grad_pn, geom.h[j], eta)
    omega = pn * H_eta - pn_eta * H - 0.5 * H**2 * g_xi_eta
    alpha = 0.5 * pn * H_eta - h0_term - 0.5 * geom.h0_norm2[j] * g_xi_eta
    tau = pn * H_eta - h_term - 0.5 * geom.h_norm2[j] * g_xi_eta
    speed = np.sqrt(g[:, 0, 0])
    return {kind: BoundaryForm(kind, vals, line_integral(vals, geom.grid, speed))
            for kind, vals in (("omega", omega), ("alpha", alpha), ("tau", tau))}


# ---------------------------------------------------------------- evolution identities

def normal_derivatives(geom: SurfaceGeometry) -> tuple[np.ndarray, np.ndarray]:
    """(nu_i, nu_ij) with shapes (...,2,3) and (...,2,2,3).

    Exact from a 3-jet through the Weingarten equation, otherwise finite
    differences of the nodal normal.
    """
    jet = geom.jet
    inv, h = geom.inv_g, geom.h
    df = tangent_frame(jet)
    if "xxx" in jet:
        from .geometry import _third_frame

        d2f, d3f = hessian_frame(jet), _third_frame(jet)
        dnu = -np.einsum("...ka,...ab,...bc->...kc", h, inv, df)
        dg = np.einsum("...ikc,...jc->...kij", d2f, df)
        dg = dg + np.swapaxes(dg, -1, -2)
        dinv = -np.einsum("...ia,...kab,...bj->...kij", inv, dg, inv)
        dh = (np.einsum("...ijkc,...c->...kij", d3f, geom.nu)
              + np.einsum("...ijc,...kc->...kij", d2f, dnu))
        # d_j nu_i = -(d_j h_ik g^kl f_l + h_ik d_j g^kl f_l + h_ik g^kl f_lj)
        ddnu = -(np.einsum("...jik,...kl,...lc->...ijc", dh, inv, df)
                 + np.einsum("...ik,...jkl,...lc->...ijc", h, dinv, df)
                 + np.einsum("...ik,...kl,...ljc->...ijc", h, inv, d2f))
        return dnu, ddnu
    return _field_derivatives(geom.nu, geom.grid)


@dataclass(frozen=True)
class EvolutionReport:
    dt: float
    metric: float       # sup |d_t g + 2 h phi|
    area: float         # sup |d_t dmu + H phi dmu|
    second_form: float  # sup |d_t h - (hess phi - h g^-1 h phi)|
    halved: tuple[float, float, float]

    @property
    def sup(self) -> float:
        return max(self.metric, self.area, self.second_form)


def _normal_variation_residuals(geom: SurfaceGeometry, phi: np.ndarray, dt: float):
    phi = np.asarray(phi, dtype=float)
    jet = geom.jet
    (dphi, ddphi) = _field_derivatives(phi[..., None], geom.grid)
    dphi, ddphi = dphi[..., 0], ddphi[..., 0]
    dnu, ddnu = normal_derivatives(geom)
    nu = geom.nu
    # jet of psi = phi nu by the product rule
    psi_1 = dphi[..., None] * nu[..., None, :] + phi[..., None, None] * dnu
    psi_2 = (ddphi[..., None] * nu[..., None, None, :]
             + dphi[..., :, None, None] * dnu[..., None, :, :]
             + dphi[..., None, :, None] * dnu[..., :, None, :]
             + phi[..., None, None, None] * ddnu)

    def geom_at(t):
        moved = {"": jet[""] + t * phi[..., None] * nu,
                 "x": jet["x"] + t * psi_1[..., 0, :], "y": jet["y"] + t * psi_1[..., 1, :],
                 "xx": jet["xx"] + t * psi_2[..., 0, 0, :],
                 "xy": jet["xy"] + t * psi_2[..., 0, 1, :],
                 "yy": jet["yy"] + t * psi_2[..., 1, 1, :]}
        return geometry_from_jet(moved, eps=0.0, allow_degenerate=True)

    p, m = geom_at(dt), geom_at(-dt)
    dg = (p.g - m.g) / (2 * dt)
    dmu = (p.area_elem - m.area_elem) / (2 * dt)
    dh = (p.h - m.h) / (2 * dt)
    gam = christoffel(jet, geom.inv_g)
    hess = ddphi - np.einsum("...kij,...k->...ij", gam, dphi)
    hgh = np.einsum("...ak,...kl,...bl->...ab", geom.h, geom.inv_g, geom.h)
    r_g = float(np.max(np.abs(dg + 2.0 * geom.h * phi[..., None, None])))
    r_mu = float(np.max(np.abs(dmu + geom.H * phi * geom.area_elem)))
    r_h = float(np.max(np.abs(dh - (hess - hgh * phi[..., None, None]))))
    return r_g, r_mu, r_h


def evolution_identities_check(geom: SurfaceGeometry, phi_normal: np.ndarray, dt: float = 1e-5,
                               floor: float = 1e-6) -> EvolutionReport:
    """Compare t-derivatives along f + t phi nu with their closed forms.

    The moved surface is built on the jet level, so with an exact 3-jet the
    only error is the O(dt^2) of the central difference in t. The step is
    rejected when halving it still removes more than half of the residual
    above ``floor`` (relative to the size of the closed-form terms).
    """
    r1 = _normal_variation_residuals(geom, phi_normal, dt)
    r2 = _normal_variation_residuals(geom, phi_normal, 0.5 * dt)
    scale = max(1.0, float(np.max(np.abs(geom.h))) * float(np.max(np.abs(phi_normal))))
    for a, b in zip(r1, r2):
        if a > 2.0 * b + floor * scale:
            raise StepTooLarge(f"time step {dt:g} is outside the asymptotic range",
                               dt=dt, residual=a, residual_halved=b)
    return EvolutionReport(dt, *r1, r2)


# ---------------------------------------------------------------- algebraic identities

def orthonormal_frame_form(h: np.ndarray, g: np.ndarray | None = None) -> np.ndarray:
    """Express a bilinear form in a g-orthonormal frame (eigenframe of g)."""
    h = np.asarray(h, dtype=float)
    if g is None:
        return h
    lam, Q = np.linalg.eigh(g)
    e = Q / np.sqrt(lam)[..., None, :]
    return np.einsum("...ai,...ab,...bj->...ij", e, h, e)


def cubic_identity_check(h: np.ndarray, g: np.ndarray | None = None) -> np.ndarray:
    """tr(h^3) - (3/2 |h0|^2 H + H^3/4) per sample, in an orthonormal frame."""
    hh = orthonormal_frame_form(h, g)
    H = np.trace(hh, axis1=-2, axis2=-1)
    eye = np.eye(2)
    h0 = hh - 0.5 * H[..., None, None] * eye
    h0n = np.einsum("...ij,...ij->...", h0, h0)
    tr3 = np.einsum("...ij,...jk,...ki->...", hh, hh, hh)
    return tr3 - (1.5 * h0n * H + 0.25 * H**3)


@dataclass(frozen=True)
class EnergyReport:
    W: float
    E: float
    T: float
    boundary_geodesic_integral: float | None
    boundary_support_integral: float | None
    euler_char: int | str
    identity_residuals: dict

    def to_dict(self) -> dict:
        return {"W": self.W, "E": self.E, "T": self.T,
                "boundary_geodesic_integral": self.boundary_geodesic_integral,
                "boundary_support_integral": self.boundary_support_integral,
                "euler_char": self.euler_char, "identity_residuals": self.identity_residuals}


def geodesic_curvature(geom: SurfaceGeometry) -> np.ndarray:
    """Intrinsic geodesic curvature of the row y = 0 against the inward conormal."""
    j = geom.grid.boundary_row
    df = tangent_frame(geom.jet)[j]
    eta = _conormal(geom)
    n_vec = np.einsum("ia,iac->ic", eta, df)
    return np.einsum("ic,ic->i", geom.jet["xx"][j], n_vec) / geom.g[j, :, 0, 0]


def energy_report(geom: SurfaceGeometry, chi: int | str = "chart", support=None,
                  tol_orth: float = 1e-8) -> EnergyReport:
    """Energies plus the pointwise and Gauss-Bonnet relations.

    The Gauss-Bonnet residuals need a boundary row, an integer ``chi`` and,
    when ``support`` is given, an orthogonal contact along y = 0.
    """
    W, E, T = willmore_energy(geom), l2_energy(geom), thomsen_energy(geom)
    res = {"E-T-W": E - T - W}
    kg_int = ks_int = None
    if geom.grid is not None and geom.grid.boundary_row is not None:
        j = geom.grid.boundary_row
        speed = np.sqrt(geom.g[j, :, 0, 0])
        kg_int = line_integral(geodesic_curvature(geom), geom.grid, speed)
        kappa = kg_int
        if support is not None:
            from .free_boundary import SupportSurface, orthogonality_residual

            support = SupportSurface.parse(support)
            orth = orthogonality_residual(geom, support)
            if orth > tol_orth:
                raise NotOrthogonal("surface does not meet the support orthogonally along y = 0",
                                    residual=orth)
            tangent = geom.jet["x"][j] / speed[:, None]
            ks_int = line_integral(support.h_s(geom.jet[""][j], tangent, tangent),
                                   geom.grid, speed)
            kappa = ks_int
        if isinstance(chi, (int, np.integer)):
            res["E-2W-kappa+2pi chi"] = E - 2 * W - kappa + 2 * np.pi * chi
            res["T-W-kappa+2pi chi"] = T - W - kappa + 2 * np.pi * chi
    return EnergyReport(W, E, T, kg_int, ks_int, chi, res)


gauss_bonnet_relations = energy_report

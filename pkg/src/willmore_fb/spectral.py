"""Fourier analysis on I = [-pi, pi] and harmonic/biharmonic extension to y > 0.

Coefficients follow phi(x) = a0 + sum_k (a_k cos kx + b_k sin kx). The
harmonic extension damps mode k by exp(-k y); the biharmonic extension
BH(phi, psi) = H phi - y d_y(H phi) + y H psi prescribes u(., 0) = phi and
d_y u(., 0) = psi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .errors import AliasRisk, QuadratureFail, SupportViolation

DEFAULT_MODES = 128
KERNEL_MIN_Y = 0.05
SUPPORT_HALF_WIDTH = math.pi / 2


# ---------------------------------------------------------------- Fourier data

@dataclass(frozen=True)
class FourierData:
    K: int
    a0: float
    a: np.ndarray
    b: np.ndarray
    samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.K + 1, dtype=float)

    @property
    def mode_norms2(self) -> np.ndarray:
        """||phi_k||^2 on I for k = 1..K."""
        return math.pi * (self.a**2 + self.b**2)

    @property
    def mean_norm2(self) -> float:
        return 2.0 * math.pi * self.a0**2

    def l2_norm2(self) -> float:
        return self.mean_norm2 + float(np.sum(self.mode_norms2))

    def seminorm(self, s: float) -> float:
        return sobolev_seminorm(self, s)

    def derivative(self, order: int = 1) -> "FourierData":
        """Coefficients of the ``order``-th derivative."""
        a, b = self.a.copy(), self.b.copy()
        for _ in range(order):
            a, b = self.k * b, -self.k * a
        return FourierData(self.K, 0.0 if order else self.a0, a, b)

    def evaluate(self, x, order: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.derivative(order) if order else self
        kx = np.multiply.outer(x, self.k)
        return d.a0 + np.cos(kx) @ d.a + np.sin(kx) @ d.b

    def scaled(self, weights: np.ndarray) -> "FourierData":
        """Multiply mode k by weights[k-1] (the mean is dropped)."""
        return FourierData(self.K, 0.0, self.a * weights, self.b * weights)

    def to_dict(self) -> dict:
        return {"K": self.K, "a0": self.a0, "a": self.a.tolist(), "b": self.b.tolist()}


def periodic_nodes(nx: int) -> np.ndarray:
    """nx uniform nodes on [-pi, pi] including both endpoints."""
    return -math.pi + 2.0 * math.pi * (np.arange(nx) / (nx - 1))


def fourier_decompose(samples, K: int = DEFAULT_MODES, alias_tol: float = 1e-10) -> FourierData:
    """Trapezoid projection of samples at ``periodic_nodes(len(samples))``.

    The endpoint values are averaged, which makes the projection the discrete
    Fourier transform of the periodic sequence.
    """
    s = np.asarray(samples, dtype=float)
    nx = s.size
    if K > nx // 2 - 1:
        raise ValueError(f"K = {K} needs at least {2 * K + 2} samples, got {nx}")
    N = nx - 1
    p = s[:-1].copy()
    p[0] = 0.5 * (s[0] + s[-1])
    F = np.fft.rfft(p)
    k = np.arange(1, K + 1)
    c = (2.0 / N) * np.where(k % 2, -1.0, 1.0) * F[1:K + 1]
    fd = FourierData(K, float(F[0].real / N), c.real.copy(), -c.imag.copy(), s)
    total = fd.l2_norm2()
    if total > 0 and fd.mode_norms2[-1] > alias_tol * total:
        warnings.warn(f"spectrum at K = {K} carries {fd.mode_norms2[-1] / total:.2e} of the "
                      "energy; truncation may alias", AliasRisk, stacklevel=2)
    return fd


def from_coefficients(a0: float = 0.0, a=(), b=(), K: int | None = None) -> FourierData:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    K = K or max(a.size, b.size, 1)
    A, B = np.zeros(K), np.zeros(K)
    A[:a.size], B[:b.size] = a, b
    return FourierData(K, float(a0), A, B)


def bump(x, sharpness: float = 4.0, half_width: float = SUPPORT_HALF_WIDTH) -> np.ndarray:
    """exp(-a / (1 - (x/w)^2)) inside |x| < w, zero outside."""
    x = np.asarray(x, dtype=float)
    t = (x / half_width) ** 2
    out = np.zeros_like(x)
    inside = t < 1.0
    out[inside] = np.exp(-sharpness / (1.0 - t[inside]))
    return out


def check_support(samples, x, half_width: float = SUPPORT_HALF_WIDTH, tol: float = 1e-12,
                  name: str = "data") -> None:
    outside = np.abs(np.asarray(x)) > half_width
    vals = np.abs(np.asarray(samples))[..., outside] if np.ndim(samples) else np.array([])
    if vals.size and vals.max() > tol:
        raise SupportViolation(f"{name} is nonzero outside [-{half_width:g}, {half_width:g}]",
                               max_outside=float(vals.max()))


# ---------------------------------------------------------------- fields

@dataclass(frozen=True)
class HalfplaneField:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray   # (ny, nx)

    def __post_init__(self):
        if not np.isfinite(self.values).all():
            raise ValueError("half-plane field has non-finite values")

    @property
    def trace(self) -> np.ndarray:
        return self.values[0]

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "y": self.y.tolist(), "values": self.values.tolist()}


def _mode_matrices(fd: FourierData, x: np.ndarray, x_order: int = 0):
    d = fd.derivative(x_order) if x_order else fd
    kx = np.multiply.outer(fd.k, x)
    return d, d.a[:, None] * np.cos(kx) + d.b[:, None] * np.sin(kx)   # (K, nx)


def harmonic_extension_series(fd: FourierData, x, y, x_order: int = 0,
                              y_order: int = 0) -> HalfplaneField:
    """sum_k phi_k(x) exp(-k y), or its derivatives, on the tensor grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d, modes = _mode_matrices(fd, x, x_order)
    damp = (-fd.k) ** y_order * np.exp(-np.multiply.outer(y, fd.k))
    mean = d.a0 if (x_order == 0 and y_order == 0) else 0.0
    return HalfplaneField(x, y, damp @ modes + mean)


def _bh_profiles(k: np.ndarray, y: np.ndarray, order: int):
    """y-profiles of the phi and psi parts of BH for mode k (k > 0)."""
    ky = np.multiply.outer(y, k)
    e = np.exp(-ky)
    if order == 0:
        return (1.0 + ky) * e, y[:, None] * e
    if order == 1:
        return -k * ky * e, (1.0 - ky) * e
    if order == 2:
        return k**2 * (ky - 1.0) * e, k * (ky - 2.0) * e
    raise ValueError("y derivatives up to order 2 are supported")


def biharmonic_extension(phi: FourierData, psi: FourierData, x, y, x_order: int = 0,
                         y_order: int = 0, support_x=None) -> HalfplaneField:
    """BH(phi, psi) = H phi - y d_y H phi + y H psi, mode by mode.

    ``support_x`` (samples positions) enforces that the source samples of phi
    and psi vanish outside [-pi/2, pi/2].
    """
    if support_x is not None:
        for name, fd in (("phi", phi), ("psi", psi)):
            if fd.samples is not None:
                check_support(fd.samples, support_x, name=name)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    K = max(phi.K, psi.K)
    phi = phi if phi.K == K else from_coefficients(phi.a0, phi.a, phi.b, K)
    psi = psi if psi.K == K else from_coefficients(psi.a0, psi.a, psi.b, K)
    p, q = _bh_profiles(phi.k, y, y_order)
    dphi, mphi = _mode_matrices(phi, x, x_order)
    dpsi, mpsi = _mode_matrices(psi, x, x_order)
    out = p @ mphi + q @ mpsi
    # mean parts: phi0 + y psi0
    if x_order == 0:
        if y_order == 0:
            out = out + phi.a0 + y[:, None] * psi.a0
        elif y_order == 1:
            out = out + psi.a0
    return HalfplaneField(x, y, out)


def laplacian5(u: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Five-point Laplacian on interior nodes."""
    return ((u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / hx**2
            + (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / hy**2)


def bilaplacian_residual(u: HalfplaneField) -> float:
    """Sup of the 13-point discrete bilaplacian over the interior."""
    hx = u.x[1] - u.x[0]
    hy = u.y[1] - u.y[0]
    return float(np.max(np.abs(kernels.bilaplacian13(u.values, hx, hy))))


def harmonic_residual(u: HalfplaneField) -> float:
    hx = u.x[1] - u.x[0]
    hy = u.y[1] - u.y[0]
    return float(np.max(np.abs(laplacian5(u.values, hx, hy))))


# ---------------------------------------------------------------- kernel route

def poisson_kernel(x, y):
    """Periodic Poisson kernel sinh y / (2pi (cosh y - cos x)), unit mass on I."""
    return kernels.poisson_kernel(x, y)


def poisson_kernel_printed(x, y):
    """(1/2pi)(e^y - cos x)/(cosh y - cos x).

    This closed form exceeds the Poisson kernel by the constant 1/2pi, so its
    mass on I is 2 and convolving with it adds the mean of the data. Kept for
    comparison only.
    """
    return poisson_kernel(x, y) + 1.0 / (2.0 * math.pi)


def _refine(step: Callable[[int], np.ndarray], tol: float, n0: int, max_level: int):
    """Double the node count until two successive values agree to ``tol``."""
    n = n0
    prev = step(n)
    for _ in range(max_level):
        n *= 2
        cur = step(n)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur, n
        prev = cur
    raise QuadratureFail("periodic trapezoid did not converge within the depth limit",
                         nodes=n, tol=tol)


def kernel_mass(y: float, tol: float = 1e-13, max_level: int = 16, kernel=None) -> float:
    """Integral of G(., y) over I by the periodic trapezoid rule."""
    kernel = kernel or poisson_kernel

    def step(n):
        t = periodic_nodes(n + 1)[:-1]
        return np.array(2.0 * math.pi / n * np.sum(kernel(t, y)))

    return float(_refine(step, tol, 64, max_level)[0])


def harmonic_extension_kernel(phi, x_eval, y: float, tol: float = 1e-12, max_level: int = 14,
                              K: int = DEFAULT_MODES) -> np.ndarray:
    """H phi(x, y) by convolution with G, refining the quadrature until stable.

    ``phi`` is a callable on I or a FourierData. Below y = 0.05 the kernel is
    too concentrated and the series route is used instead.
    """
    x_eval = np.atleast_1d(np.asarray(x_eval, dtype=float))
    fn = phi.evaluate if isinstance(phi, FourierData) else phi
    if y < KERNEL_MIN_Y:
        fd = phi if isinstance(phi, FourierData) else fourier_decompose(
            fn(periodic_nodes(8 * K + 1)), K, alias_tol=np.inf)
        return harmonic_extension_series(fd, x_eval, np.array([y])).values[0]

    def step(n):
        t = periodic_nodes(n + 1)[:-1]
        w = np.full(n, 2.0 * math.pi / n)
        return kernels.poisson_convolve(np.asarray(fn(t), dtype=float), t, w, x_eval, y)

    return _refine(step, tol, 64, max_level)[0]


# ---------------------------------------------------------------- norms and identities

def sobolev_seminorm(fd: FourierData, s: float) -> float:
    """[phi]_{W^{s,2}} = (sum_k k^{2s} ||phi_k||^2)^{1/2}."""
    return float(math.sqrt(np.sum(fd.k ** (2.0 * s) * fd.mode_norms2)))


def sobolev_norm(fd: FourierData, s: float) -> float:
    """(|phi_0|^2 + [phi]^2)^{1/2} with phi_0 the mean value."""
    return math.sqrt(fd.a0**2 + sobolev_seminorm(fd, s) ** 2)


@dataclass(frozen=True)
class L2IdentityReport:
    s: float
    lhs: float                  # ||sum k^s phi_k e^{-ky}||^2 over I x (0, inf)
    rhs: float                  # 1/2 [phi]^2_{W^{s-1/2,2}}
    mode_residual: np.ndarray   # closed form, per mode
    quadrature: float           # lhs by quadrature up to y_max
    tail_bound: float
    quadrature_residual: float

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.mode_residual))) if self.mode_residual.size else 0.0


def l2_identity_check(fd: FourierData, s: float, y_max: float = 1.0) -> L2IdentityReport:
    """Check ||sum k^s phi_k e^{-ky}||^2 = 1/2 [phi]^2_{W^{s-1/2,2}} mode by mode.

    The y-integral is done in closed form and, independently, by Gauss-Legendre
    quadrature in t = e^{-y} over [0, y_max] with the remaining tail bounded.
    """
    k, m2 = fd.k, fd.mode_norms2
    lhs_modes = k ** (2 * s) * m2 / (2.0 * k)
    rhs_modes = 0.5 * k ** (2 * s - 1) * m2
    n = fd.K + 2
    t, w = np.polynomial.legendre.leggauss(n)
    lo = math.exp(-y_max)
    tt = 0.5 * (1 - lo) * t + 0.5 * (1 + lo)
    ww = 0.5 * (1 - lo) * w
    # int_0^ymax e^{-2ky} dy = int_lo^1 t^{2k-1} dt
    ints = np.array([np.sum(ww * tt ** (2 * kk - 1)) for kk in k])
    quad = float(np.sum(k ** (2 * s) * m2 * ints))
    tail = float(np.sum(k ** (2 * s) * m2 * np.exp(-2 * k * y_max) / (2 * k)))
    rhs = float(np.sum(rhs_modes))
    return L2IdentityReport(s, float(np.sum(lhs_modes)), rhs, lhs_modes - rhs_modes,
                            quad, tail, abs(quad + tail - rhs))


@dataclass(frozen=True)
class IBPReport:
    quadrature: float      # int_I (phi' psi' - phi'' psi) dx
    coefficient: float     # 2 sum k^2 <phi_k, psi_k>
    residual: float
    bound: float           # 2 [phi]_{3/2} [psi]_{1/2}

    @property
    def ratio(self) -> float:
        return abs(self.coefficient) / self.bound if self.bound else 0.0


def boundary_ibp_identity(phi: FourierData, psi: FourierData, n: int | None = None) -> IBPReport:
    """Boundary term of the integration by parts, by quadrature and by coefficients."""
    K = max(phi.K, psi.K)
    n = n or 4 * K + 8
    x = periodic_nodes(n + 1)[:-1]
    integrand = (phi.evaluate(x, 1) * psi.evaluate(x, 1) - phi.evaluate(x, 2) * psi.evaluate(x))
    quad = float(2.0 * math.pi / n * np.sum(integrand))
    m = min(phi.K, psi.K)
    k = np.arange(1, m + 1, dtype=float)
    coef = float(2.0 * np.sum(k**2 * math.pi * (phi.a[:m] * psi.a[:m] + phi.b[:m] * psi.b[:m])))
    bound = 2.0 * sobolev_seminorm(phi, 1.5) * sobolev_seminorm(psi, 0.5)
    return IBPReport(quad, coef, abs(quad - coef), bound)


# ---------------------------------------------------------------- cutoff

def smoothstep4(t):
    """C^4 step: 0 for t <= 0, 1 for t >= 1, degree-9 polynomial between."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t**5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))))


def cutoff_x(x):
    """1 on |x| <= pi/2, 0 on |x| >= 0.9 pi."""
    return 1.0 - smoothstep4((np.abs(x) - 0.5 * math.pi) / (0.4 * math.pi))


def cutoff_y(y):
    """1 on y <= 1/2, 0 on y >= 0.9."""
    return 1.0 - smoothstep4((np.asarray(y, dtype=float) - 0.5) / 0.4)


def cutoff(x, y) -> np.ndarray:
    """The tensor cutoff chi(x) zeta(y) on the grid (ny, nx)."""
    return np.outer(cutoff_y(y), cutoff_x(x))


def apply_cutoff(u: HalfplaneField) -> HalfplaneField:
    return HalfplaneField(u.x, u.y, cutoff(u.x, u.y) * u.values)


# ---------------------------------------------------------------- audit

def c1_norm(u: HalfplaneField) -> float:
    """max(|u|, |u_x|, |u_y|) with second-order differences."""
    from .grid import d1

    hx, hy = u.x[1] - u.x[0], u.y[1] - u.y[0]
    return float(max(np.max(np.abs(u.values)), np.max(np.abs(d1(u.values, hx, 1))),
                     np.max(np.abs(d1(u.values, hy, 0)))))


def random_band_limited(rng: np.random.Generator, K: int = 8, decay: float = 1.0) -> FourierData:
    k = np.arange(1, K + 1)
    a = rng.normal(size=K) / k**decay
    b = rng.normal(size=K) / k**decay
    return FourierData(K, 0.0, a, b)


def estimate_audit(pairs=None, seed: int = 0, n_pairs: int = 8, nx: int = 257,
                   ny: int = 129, heights=(0.1, 0.25, 0.5, 1.0)) -> dict:
    """Empirical constants for the extension estimates over a battery of data.

    Reports max ratios of left to right sides; no constant is asserted.
    """
    if pairs is None:
        rng = np.random.default_rng(seed)
        pairs = [(random_band_limited(rng), random_band_limited(rng)) for _ in range(n_pairs)]
    x = periodic_nodes(nx)
    y = np.linspace(0.0, 1.0, ny)
    rows = []
    for phi, psi in pairs:
        u = biharmonic_extension(phi, psi, x, y)
        xf = periodic_nodes(4 * nx)
        w1inf = max(np.max(np.abs(phi.evaluate(xf))), np.max(np.abs(phi.evaluate(xf, 1))))
        linf_psi = float(np.max(np.abs(psi.evaluate(xf))))
        c1 = c1_norm(u) / (w1inf + linf_psi) if (w1inf + linf_psi) else 0.0
        linf_phi = float(np.max(np.abs(phi.evaluate(xf))))
        cauchy = 0.0
        for yy in heights:
            gx = harmonic_extension_series(phi, xf, np.array([yy]), x_order=1).values
            gy = harmonic_extension_series(phi, xf, np.array([yy]), y_order=1).values
            if linf_phi:
                cauchy = max(cauchy, yy * float(np.max(np.hypot(gx, gy))) / linf_phi)
        # ||D(H phi)||^2 over I x (0, inf) is sum k ||phi_k||^2 in closed form
        grad_l2 = math.sqrt(float(np.sum(phi.k * phi.mode_norms2)))
        semi = sobolev_seminorm(phi, 0.5)
        ibp = boundary_ibp_identity(phi, psi)
        rows.append({"c1": c1, "cauchy": cauchy,
                     "grad_l2_over_half_seminorm": grad_l2 / semi if semi else 0.0,
                     "boundary_term": ibp.ratio})
    keys = rows[0].keys() if rows else []
    return {"pairs": len(rows), "rows": rows,
            "max": {k: max(r[k] for r in rows) for k in keys}}

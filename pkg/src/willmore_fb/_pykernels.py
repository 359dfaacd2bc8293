"""Pure-numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels`` must agree with them to
roundoff. Inputs are flat, C-contiguous float64 arrays.
"""

from __future__ import annotations

import numpy as np


def fundamental_forms(fx, fy, fxx, fxy, fyy):
    """Metric, unit normal and second fundamental form at every node.

    All inputs have shape (n, 3). Returns ``(g, nu, h)`` with ``g`` and ``h``
    packed as (n, 3) arrays of the (11, 12, 22) entries. Nodes with a vanishing
    Jacobian get ``nu = 0`` and ``h = 0``.
    """
    g = np.empty((fx.shape[0], 3))
    g[:, 0] = np.einsum("ij,ij->i", fx, fx)
    g[:, 1] = np.einsum("ij,ij->i", fx, fy)
    g[:, 2] = np.einsum("ij,ij->i", fy, fy)
    n = np.cross(fx, fy)
    norm = np.sqrt(np.einsum("ij,ij->i", n, n))
    safe = np.where(norm > 0.0, norm, 1.0)
    nu = np.where((norm > 0.0)[:, None], n / safe[:, None], 0.0)
    h = np.empty_like(g)
    h[:, 0] = np.einsum("ij,ij->i", fxx, nu)
    h[:, 1] = np.einsum("ij,ij->i", fxy, nu)
    h[:, 2] = np.einsum("ij,ij->i", fyy, nu)
    return g, nu, h


def poisson_kernel(x, y):
    """sinh y / (2 pi (cosh y - cos x)) with the denominator free of cancellation."""
    s = np.sin(0.5 * x)
    den = 2.0 * np.sinh(0.5 * y) ** 2 + 2.0 * s * s
    return np.sinh(y) / (2.0 * np.pi * den)


def poisson_convolve(values, xq, wq, x_eval, y):
    """sum_j wq[j] G(x_eval[i] - xq[j], y) values[j] for every i."""
    out = np.empty(x_eval.shape[0])
    wv = wq * values
    # chunk over evaluation points to bound the temporary
    step = max(1, 2_000_000 // max(1, xq.shape[0]))
    for start in range(0, x_eval.shape[0], step):
        xe = x_eval[start:start + step]
        out[start:start + step] = poisson_kernel(xe[:, None] - xq[None, :], y) @ wv
    return out


def bilaplacian13(u, hx, hy):
    """13-point discrete bilaplacian on the nodes two away from every edge.

    ``u`` has shape (ny, nx) with x varying along axis 1. Returns an array of
    shape (ny - 4, nx - 4).
    """
    c = u[2:-2, 2:-2]
    d4x = (u[2:-2, 4:] + u[2:-2, :-4]) - 4.0 * (u[2:-2, 3:-1] + u[2:-2, 1:-3]) + 6.0 * c
    d4y = (u[4:, 2:-2] + u[:-4, 2:-2]) - 4.0 * (u[3:-1, 2:-2] + u[1:-3, 2:-2]) + 6.0 * c
    corners = u[3:-1, 3:-1] + u[3:-1, 1:-3] + u[1:-3, 3:-1] + u[1:-3, 1:-3]
    edges_x = u[2:-2, 3:-1] + u[2:-2, 1:-3]
    edges_y = u[3:-1, 2:-2] + u[1:-3, 2:-2]
    d22 = corners - 2.0 * edges_x - 2.0 * edges_y + 4.0 * c
    return d4x / hx**4 + 2.0 * d22 / (hx * hx * hy * hy) + d4y / hy**4

"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy versions
run. ``use_backend`` switches explicitly (tests and the benchmark compare
both).
"""

from __future__ import annotations

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

BACKEND = "cython" if _ckernels is not None else "python"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def use_backend(name: str) -> str:
    """Select the kernel backend; returns the previous one."""
    global BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    previous, BACKEND = BACKEND, name
    return previous


def _impl():
    return _BACKENDS[BACKEND]


def _flat3(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64).reshape(-1, 3))


def fundamental_forms(fx, fy, fxx, fxy, fyy):
    """Packed metric, unit normal and second fundamental form.

    Accepts arrays of shape (..., 3) and returns ``(g, nu, h)`` of the same
    leading shape, where ``g[..., :]`` and ``h[..., :]`` hold the (11, 12, 22)
    components.
    """
    shape = np.shape(fx)[:-1]
    g, nu, h = _impl().fundamental_forms(*(_flat3(a) for a in (fx, fy, fxx, fxy, fyy)))
    return g.reshape(shape + (3,)), nu.reshape(shape + (3,)), h.reshape(shape + (3,))


def poisson_kernel(x, y: float):
    return _impl().poisson_kernel(np.asarray(x, dtype=np.float64), float(y))


def poisson_convolve(values, xq, wq, x_eval, y: float):
    c = lambda a: np.ascontiguousarray(a, dtype=np.float64).ravel()
    return _impl().poisson_convolve(c(values), c(xq), c(wq), c(x_eval), float(y))


def bilaplacian13(u, hx: float, hy: float):
    u = np.ascontiguousarray(u, dtype=np.float64)
    if u.shape[0] < 5 or u.shape[1] < 5:
        raise ValueError("bilaplacian needs at least 5x5 nodes")
    return _impl().bilaplacian13(u, float(hx), float(hy))

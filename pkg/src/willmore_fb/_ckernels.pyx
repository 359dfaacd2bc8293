# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np
from libc.math cimport sqrt, sin, sinh, M_PI


def fundamental_forms(const double[:, ::1] fx, const double[:, ::1] fy,
                      const double[:, ::1] fxx, const double[:, ::1] fxy,
                      const double[:, ::1] fyy):
    cdef Py_ssize_t n = fx.shape[0]
    g_arr = np.empty((n, 3))
    nu_arr = np.empty((n, 3))
    h_arr = np.empty((n, 3))
    cdef double[:, ::1] g = g_arr
    cdef double[:, ::1] nu = nu_arr
    cdef double[:, ::1] h = h_arr
    cdef Py_ssize_t i
    cdef double a0, a1, a2, b0, b1, b2, c0, c1, c2, norm
    with nogil:
        for i in range(n):
            a0 = fx[i, 0]; a1 = fx[i, 1]; a2 = fx[i, 2]
            b0 = fy[i, 0]; b1 = fy[i, 1]; b2 = fy[i, 2]
            g[i, 0] = a0 * a0 + a1 * a1 + a2 * a2
            g[i, 1] = a0 * b0 + a1 * b1 + a2 * b2
            g[i, 2] = b0 * b0 + b1 * b1 + b2 * b2
            c0 = a1 * b2 - a2 * b1
            c1 = a2 * b0 - a0 * b2
            c2 = a0 * b1 - a1 * b0
            norm = sqrt(c0 * c0 + c1 * c1 + c2 * c2)
            if norm > 0.0:
                c0 = c0 / norm; c1 = c1 / norm; c2 = c2 / norm
            else:
                c0 = 0.0; c1 = 0.0; c2 = 0.0
            nu[i, 0] = c0; nu[i, 1] = c1; nu[i, 2] = c2
            h[i, 0] = fxx[i, 0] * c0 + fxx[i, 1] * c1 + fxx[i, 2] * c2
            h[i, 1] = fxy[i, 0] * c0 + fxy[i, 1] * c1 + fxy[i, 2] * c2
            h[i, 2] = fyy[i, 0] * c0 + fyy[i, 1] * c1 + fyy[i, 2] * c2
    return g_arr, nu_arr, h_arr


cdef inline double _kernel(double x, double y, double shy, double sh2) nogil:
    cdef double s = sin(0.5 * x)
    return shy / (2.0 * M_PI * (sh2 + 2.0 * s * s))


def poisson_kernel(x, double y):
    xa = np.ascontiguousarray(x, dtype=np.float64)
    flat = xa.ravel()
    out = np.empty_like(flat)
    cdef double[::1] xv = flat
    cdef double[::1] ov = out
    cdef double shy = sinh(y)
    cdef double sh2 = 2.0 * sinh(0.5 * y) ** 2
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _kernel(xv[i], y, shy, sh2)
    return out.reshape(xa.shape)


def poisson_convolve(const double[::1] values, const double[::1] xq,
                     const double[::1] wq, const double[::1] x_eval, double y):
    cdef Py_ssize_t m = x_eval.shape[0]
    cdef Py_ssize_t n = xq.shape[0]
    out = np.empty(m)
    cdef double[::1] ov = out
    cdef double shy = sinh(y)
    cdef double sh2 = 2.0 * sinh(0.5 * y) ** 2
    cdef Py_ssize_t i, j
    cdef double acc
    with nogil:
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc = acc + wq[j] * values[j] * _kernel(x_eval[i] - xq[j], y, shy, sh2)
            ov[i] = acc
    return out


def bilaplacian13(const double[:, ::1] u, double hx, double hy):
    cdef Py_ssize_t ny = u.shape[0]
    cdef Py_ssize_t nx = u.shape[1]
    out = np.empty((ny - 4, nx - 4))
    cdef double[:, ::1] ov = out
    cdef double ix4 = 1.0 / (hx * hx * hx * hx)
    cdef double iy4 = 1.0 / (hy * hy * hy * hy)
    cdef double ixy = 2.0 / (hx * hx * hy * hy)
    cdef Py_ssize_t i, j
    cdef double c, d4x, d4y, d22
    with nogil:
        for j in range(2, ny - 2):
            for i in range(2, nx - 2):
                c = u[j, i]
                d4x = (u[j, i + 2] + u[j, i - 2]) - 4.0 * (u[j, i + 1] + u[j, i - 1]) + 6.0 * c
                d4y = (u[j + 2, i] + u[j - 2, i]) - 4.0 * (u[j + 1, i] + u[j - 1, i]) + 6.0 * c
                d22 = ((u[j + 1, i + 1] + u[j + 1, i - 1] + u[j - 1, i + 1] + u[j - 1, i - 1])
                       - 2.0 * (u[j, i + 1] + u[j, i - 1]) - 2.0 * (u[j + 1, i] + u[j - 1, i])
                       + 4.0 * c)
                ov[j - 2, i - 2] = d4x * ix4 + d22 * ixy + d4y * iy4
    return out

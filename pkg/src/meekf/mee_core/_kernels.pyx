# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels for the weighted fixed-point iteration.

The public functions match ``_pykernels`` one to one. Arrays must be
C-contiguous float64; the Python wrappers in ``solver`` guarantee this.
"""

from libc.math cimport exp, sqrt, isfinite, M_PI

import numpy as np

cdef double INV_SQRT_2PI = 1.0 / sqrt(2.0 * M_PI)
cdef double PIVOT_TOL = 1e-14

CONVERGED = 0
MAX_ITER = 1
SINGULAR = 2
NONFINITE = 3

MEE = 0
MCC = 1


def information_potential(const double[::1] e, double sigma):
    cdef Py_ssize_t L = e.shape[0], i, j
    cdef double two_s2 = 2.0 * sigma * sigma, u, acc = 0.0
    for i in range(L):
        for j in range(i + 1, L):
            u = e[j] - e[i]
            acc += exp(-u * u / two_s2)
    acc = 2.0 * acc + L
    return acc * INV_SQRT_2PI / sigma / (L * L)


cdef void _laplacian(const double[::1] e, double sigma, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t L = e.shape[0], i, j
    cdef double two_s2 = 2.0 * sigma * sigma, norm = INV_SQRT_2PI / sigma, u, g
    for i in range(L):
        out[i, i] = 0.0
    for i in range(L):
        for j in range(i + 1, L):
            u = e[j] - e[i]
            g = norm * exp(-u * u / two_s2)
            out[i, j] = -g
            out[j, i] = -g
            out[i, i] += g
            out[j, j] += g


def gaussian_laplacian(const double[::1] e, double sigma, double[:, ::1] out):
    _laplacian(e, sigma, out)


cdef int _cholesky_solve(double[:, ::1] a, double[::1] b, double[::1] x) noexcept nogil:
    """Factor ``a`` in place (lower triangle) and solve a x = b.

    Returns 0 on success, 1 if a pivot falls below the relative floor.
    """
    cdef Py_ssize_t n = a.shape[0], i, j, k
    cdef double s, u, scale = 0.0
    for i in range(n):
        if a[i, i] > scale:
            scale = a[i, i]
    if not (scale > 0.0) or not isfinite(scale):
        return 1
    for j in range(n):
        s = a[j, j]
        for k in range(j):
            s -= a[j, k] * a[j, k]
        if s <= PIVOT_TOL * scale:
            return 1
        s = sqrt(s)
        a[j, j] = s
        for i in range(j + 1, n):
            u = a[i, j]
            for k in range(j):
                u -= a[i, k] * a[j, k]
            a[i, j] = u / s
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= a[i, k] * x[k]
        x[i] = s / a[i, i]
    for i in range(n - 1, -1, -1):
        s = x[i]
        for k in range(i + 1, n):
            s -= a[k, i] * x[k]
        x[i] = s / a[i, i]
    return 0


def solve_fixed_point(const double[::1] d, const double[:, ::1] W, double[::1] x,
                      double sigma, double eps, int max_iter, double reg_rel,
                      int weighting, double[:, ::1] weights_out):
    """Run the weighted fixed point in place on ``x``.

    Returns ``(iterations, status, ridge)``; ``weights_out`` holds the L x L
    weight matrix used for the final solve.
    """
    cdef Py_ssize_t L = W.shape[0], n = W.shape[1], i, j, k
    cdef double[::1] e = np.empty(L)
    cdef double[:, ::1] m = np.empty((L, n))
    cdef double[:, ::1] a = np.empty((n, n))
    cdef double[::1] b = np.empty(n)
    cdef double[::1] x_new = np.empty(n)
    cdef double two_s2 = 2.0 * sigma * sigma, norm = INV_SQRT_2PI / sigma
    cdef double s, ridge = 0.0, step, ref
    cdef int it, status = 1, iters = max_iter
    cdef bint finite
    with nogil:
        for it in range(1, max_iter + 1):
            for i in range(L):
                s = d[i]
                for k in range(n):
                    s -= W[i, k] * x[k]
                e[i] = s
            if weighting == 0:
                _laplacian(e, sigma, weights_out)
                for i in range(L):
                    for k in range(n):
                        s = 0.0
                        for j in range(L):
                            s += weights_out[i, j] * W[j, k]
                        m[i, k] = s
            else:
                for i in range(L):
                    for j in range(L):
                        weights_out[i, j] = 0.0
                    weights_out[i, i] = norm * exp(-e[i] * e[i] / two_s2)
                    for k in range(n):
                        m[i, k] = weights_out[i, i] * W[i, k]
            finite = True
            s = 0.0
            for j in range(n):
                for k in range(j + 1):
                    ref = 0.0
                    for i in range(L):
                        ref += W[i, j] * m[i, k]
                    a[j, k] = ref
                    a[k, j] = ref
                s += a[j, j]
                ref = 0.0
                for i in range(L):
                    ref += m[i, j] * d[i]
                b[j] = ref
                if not isfinite(ref):
                    finite = False
            ridge = reg_rel * s / n
            if ridge > 0.0:
                for j in range(n):
                    a[j, j] += ridge
            for j in range(n):
                for k in range(j + 1):
                    if not isfinite(a[j, k]):
                        finite = False
            if not finite:
                status = 3
                iters = it
                break
            if _cholesky_solve(a, b, x_new) != 0:
                status = 2
                iters = it
                break
            step = 0.0
            ref = 0.0
            for k in range(n):
                if not isfinite(x_new[k]):
                    finite = False
                step += (x_new[k] - x[k]) * (x_new[k] - x[k])
                ref += x[k] * x[k]
            if not finite:
                status = 3
                iters = it
                break
            for k in range(n):
                x[k] = x_new[k]
            if sqrt(step) <= eps * sqrt(ref):
                status = 0
                iters = it
                break
    return iters, status, ridge

"""Pure-Python (numpy) versions of the hot kernels.

Mirrors ``_kernels.pyx`` argument for argument. Used when the compiled
extension is unavailable or ``MEEKF_BACKEND=python`` is set.
"""

import math

import numpy as np

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

CONVERGED = 0
MAX_ITER = 1
SINGULAR = 2
NONFINITE = 3

MEE = 0
MCC = 1

# relative pivot floor for the Cholesky singularity test
PIVOT_TOL = 1e-14


def information_potential(e, sigma):
    e = np.asarray(e, dtype=float)
    diff = e[None, :] - e[:, None]
    g = INV_SQRT_2PI / sigma * np.exp(-(diff * diff) / (2.0 * sigma * sigma))
    return float(g.sum()) / (e.size * e.size)


def gaussian_laplacian(e, sigma, out):
    e = np.asarray(e, dtype=float)
    diff = e[None, :] - e[:, None]
    phi = INV_SQRT_2PI / sigma * np.exp(-(diff * diff) / (2.0 * sigma * sigma))
    np.fill_diagonal(phi, 0.0)
    out[...] = -phi
    out[np.diag_indices_from(out)] = phi.sum(axis=1)


def _is_singular(a):
    scale = float(np.max(np.diag(a))) if a.size else 0.0
    if not math.isfinite(scale) or scale <= 0.0:
        return True
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return True
    return float(np.min(np.diag(low))) ** 2 <= PIVOT_TOL * scale


def solve_fixed_point(d, W, x, sigma, eps, max_iter, reg_rel, weighting, weights_out):
    """Run the weighted fixed point in place on ``x``.

    Returns ``(iterations, status, ridge)``; ``weights_out`` holds the L x L
    weight matrix used for the final solve.
    """
    n = W.shape[1]
    two_s2 = 2.0 * sigma * sigma
    norm = INV_SQRT_2PI / sigma
    ridge = 0.0
    for it in range(1, max_iter + 1):
        e = d - W @ x
        if weighting == MEE:
            gaussian_laplacian(e, sigma, weights_out)
        else:
            weights_out[...] = 0.0
            weights_out[np.diag_indices_from(weights_out)] = norm * np.exp(-(e * e) / two_s2)
        m = weights_out @ W
        a = W.T @ m
        b = m.T @ d
        ridge = reg_rel * float(np.trace(a)) / n
        if ridge > 0.0:
            a[np.diag_indices_from(a)] += ridge
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            return it, NONFINITE, ridge
        if _is_singular(a):
            return it, SINGULAR, ridge
        x_new = np.linalg.solve(a, b)
        if not np.all(np.isfinite(x_new)):
            return it, NONFINITE, ridge
        step = math.sqrt(float(np.sum((x_new - x) ** 2)))
        ref = math.sqrt(float(np.sum(x * x)))
        x[...] = x_new
        if step <= eps * ref:
            return it, CONVERGED, ridge
    return max_iter, MAX_ITER, ridge

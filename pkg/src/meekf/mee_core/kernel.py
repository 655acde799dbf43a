"""Gaussian kernel and the quadratic information potential."""

import math

import numpy as np

from ..errors import ValidationError
from ._backend import kernels

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def check_sigma(sigma):
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0.0:
        raise ValidationError(f"kernel size must be a positive finite number, got {sigma!r}")
    return sigma


def gaussian_kernel(u, sigma):
    """Evaluate the normalized Gaussian kernel G_sigma(u).

    Args:
        u: Scalar or array of arguments.
        sigma: Kernel size, strictly positive.

    Returns:
        exp(-u^2 / (2 sigma^2)) / (sqrt(2 pi) sigma), with the shape of ``u``.
    """
    sigma = check_sigma(sigma)
    u = np.asarray(u, dtype=float)
    out = INV_SQRT_2PI / sigma * np.exp(-(u * u) / (2.0 * sigma * sigma))
    return float(out) if out.ndim == 0 else out


def information_potential(errors, sigma):
    """Quadratic information potential of a set of errors.

    This is the mean of G_sigma over all ordered pairs, including the
    diagonal, and is the quantity the MEE estimator maximizes.

    Args:
        errors: 1-D array of residuals.
        sigma: Kernel size.

    Returns:
        The potential as a float.
    """
    sigma = check_sigma(sigma)
    e = np.ascontiguousarray(errors, dtype=float).ravel()
    if e.size == 0:
        raise ValidationError("information potential needs at least one error")
    if not np.all(np.isfinite(e)):
        raise ValidationError("errors must be finite")
    return float(kernels.information_potential(e, sigma))

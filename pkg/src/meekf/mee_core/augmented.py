"""Whitened augmented regression combining the prior and one measurement."""

from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, ValidationError


@dataclass(frozen=True)
class AugmentedSystem:
    """Stacked regression d = W x + e with (ideally) white residual e.

    Attributes:
        d: Whitened observation vector of length L = n + m.
        W: Whitened regressor matrix, L x n.
        theta_p: Lower Cholesky factor of the prior covariance.
        theta_r: Lower Cholesky factor of the measurement covariance.
    """

    d: np.ndarray
    W: np.ndarray
    theta_p: np.ndarray
    theta_r: np.ndarray

    @property
    def n(self):
        return self.W.shape[1]

    @property
    def m(self):
        return self.theta_r.shape[0]

    @property
    def L(self):
        return self.W.shape[0]

    def residual(self, x):
        return self.d - self.W @ np.asarray(x, dtype=float)


def lower_cholesky(matrix, name):
    """Cholesky factor of a symmetric positive definite matrix.

    Args:
        matrix: Square matrix; only its symmetric part is used.
        name: Label used in the error message.

    Raises:
        NumericalError: If the matrix is not positive definite.
    """
    a = np.asarray(matrix, dtype=float)
    a = 0.5 * (a + a.T)
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"{name} has non-finite entries")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{name} is not positive definite") from exc


def _tri_inv(low):
    return np.linalg.solve(low, np.eye(low.shape[0]))


def build_augmented(prior, H, R, y, innovation=None):
    """Build the whitened regression for one measurement update.

    Args:
        prior: Object with ``x_prior`` (n,) and ``p_prior`` (n, n).
        H: Measurement matrix or Jacobian at the prior, m x n.
        R: Measurement noise covariance, m x m.
        y: Measurement vector (m,).
        innovation: Optional precomputed ``y - h(x_prior)`` for nonlinear
            models. When given, the measurement rows regress
            ``innovation + H x_prior`` instead of ``y``.

    Returns:
        AugmentedSystem with d = Theta^-1 [x_prior; y'] and W = Theta^-1 [I; H].
    """
    x_prior = np.asarray(prior.x_prior, dtype=float).ravel()
    n = x_prior.size
    H = np.atleast_2d(np.asarray(H, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    m = H.shape[0]
    if H.shape[1] != n or R.shape != (m, m):
        raise ValidationError(
            f"inconsistent shapes: x_prior {n}, H {H.shape}, R {R.shape}"
        )
    theta_p = lower_cholesky(prior.p_prior, "prior covariance P(k|k-1)")
    theta_r = lower_cholesky(R, "measurement covariance R")
    if innovation is not None:
        target = np.asarray(innovation, dtype=float).ravel() + H @ x_prior
    else:
        target = np.asarray(y, dtype=float).ravel()
    if target.size != m:
        raise ValidationError(f"measurement has {target.size} entries, expected {m}")
    inv_p = _tri_inv(theta_p)
    inv_r = _tri_inv(theta_r)
    d = np.concatenate([inv_p @ x_prior, inv_r @ target])
    W = np.vstack([inv_p, inv_r @ H])
    return AugmentedSystem(np.ascontiguousarray(d), np.ascontiguousarray(W), theta_p, theta_r)

"""Fixed-point solver for the MEE and correntropy weighted regressions."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import NumericalError, ValidationError
from ._backend import kernels
from .kernel import check_sigma, information_potential
from .laplacian import LaplacianBlocks, affinity_laplacian

WEIGHTINGS = {"mee": 0, "mcc": 1}

CONVERGED, MAX_ITER, SINGULAR, NONFINITE = 0, 1, 2, 3


@dataclass(frozen=True)
class FixedPointConfig:
    """Settings for the fixed-point iteration.

    Attributes:
        sigma: Kernel size.
        epsilon: Relative stopping threshold on successive iterates.
        max_iter: Iteration cap.
        regularization: Relative ridge factor. The ridge added to the normal
            matrix A = W^T Lambda W is ``regularization * trace(A) / n``;
            0 disables it.
    """

    sigma: float
    epsilon: float = 1e-6
    max_iter: int = 100
    regularization: float = 1e-10

    def __post_init__(self):
        check_sigma(self.sigma)
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValidationError(f"epsilon must be positive, got {self.epsilon!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValidationError(f"max_iter must be an integer >= 1, got {self.max_iter!r}")
        if not (math.isfinite(self.regularization) and self.regularization >= 0):
            raise ValidationError("regularization must be a nonnegative finite number")


class FixedPointResult(NamedTuple):
    """Outcome of :func:`fixed_point_solve`.

    ``weights`` is the weight matrix used in the final solve (the Laplacian
    for MEE, the diagonal correntropy weights for MCC) and ``ridge`` the
    absolute ridge added in that solve. ``status`` is one of
    "converged", "max_iter", "singular" or "nonfinite".
    """

    x: np.ndarray
    iterations: int
    converged: bool
    weights: LaplacianBlocks
    ridge: float
    status: str


_STATUS = {CONVERGED: "converged", MAX_ITER: "max_iter", SINGULAR: "singular", NONFINITE: "nonfinite"}


def mee_cost(aug, x, sigma):
    """J_L(x): information potential of the augmented residual d - W x."""
    return information_potential(aug.residual(x), sigma)


def mee_gradient(aug, x, sigma):
    """Analytic gradient of :func:`mee_cost` with respect to x.

    Equals 2 / (L^2 sigma^2) * W^T Lambda(x) e(x); the fixed point is the
    stationary point of this expression with Lambda held fixed.
    """
    sigma = check_sigma(sigma)
    e = aug.residual(x)
    lam = affinity_laplacian(e, aug.n, sigma).lambda_full
    return 2.0 / (aug.L**2 * sigma**2) * (aug.W.T @ (lam @ e))


def fixed_point_solve(aug, cfg, x_init, weighting="mee", raise_on_singular=None):
    """Iterate x <- (W^T Lam(x) W + ridge I)^-1 W^T Lam(x) d.

    Lam is recomputed from the residual of the previous iterate on every
    pass. Iteration stops when ||x_t - x_{t-1}|| <= epsilon ||x_{t-1}||.

    Args:
        aug: AugmentedSystem.
        cfg: FixedPointConfig.
        x_init: Starting point, typically the prior estimate.
        weighting: "mee" for the affinity Laplacian, "mcc" for diagonal
            correntropy weights.
        raise_on_singular: Raise NumericalError when the normal matrix is
            singular. Defaults to True when regularization is disabled.

    Returns:
        FixedPointResult; hitting max_iter gives ``converged=False``.

    Raises:
        NumericalError: Singular normal matrix with regularization off
            (or when explicitly requested).
    """
    if weighting not in WEIGHTINGS:
        raise ValidationError(f"unknown weighting {weighting!r}")
    x = np.array(x_init, dtype=float).ravel()
    if x.size != aug.n:
        raise ValidationError(f"x_init has {x.size} entries, expected {aug.n}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("x_init must be finite")
    if raise_on_singular is None:
        raise_on_singular = cfg.regularization == 0
    weights = np.zeros((aug.L, aug.L))
    d = np.ascontiguousarray(aug.d, dtype=float)
    W = np.ascontiguousarray(aug.W, dtype=float)
    iters, status, ridge = kernels.solve_fixed_point(
        d, W, x, cfg.sigma, cfg.epsilon, int(cfg.max_iter),
        cfg.regularization, WEIGHTINGS[weighting], weights,
    )
    if status == SINGULAR and raise_on_singular:
        raise NumericalError(
            "W^T Lambda W is singular; enable regularization (e.g. 1e-10) "
            "or enlarge the kernel size"
        )
    blocks = LaplacianBlocks(weights, aug.n)
    return FixedPointResult(x, int(iters), status == CONVERGED, blocks, float(ridge), _STATUS[status])


def mee_gain(blocks, aug, H, ridge=0.0):
    """Gain of the MEE update in matrix-inversion-lemma form.

    With P~ = Tp^-T Lx Tp^-1, P~xy = Tr^-T Lxy Tp^-1, P~yx = Tp^-T Lyx Tr^-1
    and R~ = Tr^-T Ly Tr^-1 the gain is
    K = [P~ + H^T P~xy + (P~yx + H^T R~) H]^-1 (P~yx + H^T R~).
    The bracket equals W^T Lambda W, so x_prior + K (y - H x_prior) reproduces
    the direct weighted solve. ``ridge`` is added to the bracket diagonal to
    match a regularized solve.

    Args:
        blocks: LaplacianBlocks (any weight matrix split at n).
        aug: AugmentedSystem supplying the Cholesky factors.
        H: Measurement matrix, m x n.
        ridge: Absolute diagonal term added to the bracket.

    Returns:
        n x m gain matrix.

    Raises:
        NumericalError: If the bracket is singular or non-finite.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n = aug.n
    inv_p = np.linalg.solve(aug.theta_p, np.eye(n))
    inv_r = np.linalg.solve(aug.theta_r, np.eye(aug.m))
    p_t = inv_p.T @ blocks.lambda_x @ inv_p
    p_xy = inv_r.T @ blocks.lambda_xy @ inv_p
    p_yx = inv_p.T @ blocks.lambda_yx @ inv_r
    r_t = inv_r.T @ blocks.lambda_y @ inv_r
    rhs = p_yx + H.T @ r_t
    bracket = p_t + H.T @ p_xy + rhs @ H
    if ridge:
        bracket = bracket + ridge * np.eye(n)
    if not (np.all(np.isfinite(bracket)) and np.all(np.isfinite(rhs))):
        raise NumericalError("gain bracket has non-finite entries")
    if np.linalg.cond(bracket) > 1e14:
        raise NumericalError("gain bracket is singular")
    try:
        gain = np.linalg.solve(bracket, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("gain bracket is singular") from exc
    if not np.all(np.isfinite(gain)):
        raise NumericalError("gain is not finite")
    return gain

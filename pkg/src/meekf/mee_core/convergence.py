"""Sufficient-condition check for contraction of the MEE fixed point.

The kernel size is large enough when two bound expressions hold on the
ball ||x||_1 <= beta:

    ||g(x)||_1      <= sqrt(n) S_dw / lambda_min[sum xi2 dw dw^T]      <= beta
    ||grad g(x)||_1 <= gamma sqrt(n) / (sigma^2 lambda_min[sum xi2 dw dw^T]) <= alpha < 1

with dw = w_j - w_i, dd = d_j - d_i over all ordered pairs (i, j),
S_dw = sum |dd| ||dw||_1 and

    xi2   = exp(-(beta ||dw||_1 + |dd|)^2 / (2 sigma^2))
    gamma = sum (beta ||dw||_1 + |dd|) ||dw||_1 (beta ||dw dw^T||_1 + |dd| ||dw||_1)

The lower limit for beta is rho = sqrt(n) S_dw / lambda_min(M_ww) where
M_ww = sum dw dw^T carries no kernel weight.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DiagnosticError, ValidationError
from .augmented import build_augmented
from .kernel import check_sigma

SIGMA_BRACKET = (1e-3, 1e6)
BISECT_TOL = 1e-6


@dataclass(frozen=True)
class ConvergenceReport:
    """Values of the contraction bounds at one kernel size.

    Attributes:
        rho: Lower limit for beta.
        lambda_min: Smallest eigenvalue of the unweighted pairwise matrix M_ww.
        g_norm_bound: Bound on ||g(x)||_1 at (sigma, beta).
        grad_norm_bound: Bound on the induced 1-norm of the Jacobian of g.
        sigma1: Kernel size where the g bound equals beta, if solved.
        sigma2: Kernel size where the Jacobian bound equals alpha, if solved.
        satisfied: Both bounds hold at the given sigma.
    """

    rho: float
    lambda_min: float
    g_norm_bound: float
    grad_norm_bound: float
    sigma: float
    beta: float
    alpha: float
    sigma1: Optional[float] = None
    sigma2: Optional[float] = None
    satisfied: bool = False


class _Pairs:
    """Pairwise differences of an augmented system, precomputed once."""

    def __init__(self, aug):
        W = np.asarray(aug.W, dtype=float)
        d = np.asarray(aug.d, dtype=float)
        self.n = W.shape[1]
        dw = (W[None, :, :] - W[:, None, :]).reshape(-1, self.n)
        dd = (d[None, :] - d[:, None]).ravel()
        self.dw = dw
        self.abs_dd = np.abs(dd)
        self.l1 = np.abs(dw).sum(axis=1)
        self.linf = np.abs(dw).max(axis=1)
        self.outer = dw[:, :, None] * dw[:, None, :]
        self.s_dw = float(np.sum(self.abs_dd * self.l1))

    def lambda_min(self, weights=None):
        if weights is None:
            mat = self.outer.sum(axis=0)
        else:
            mat = np.tensordot(weights, self.outer, axes=1)
        return float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[0])

    def bounds(self, sigma, beta):
        arg = beta * self.l1 + self.abs_dd
        xi2 = np.exp(-(arg * arg) / (2.0 * sigma * sigma))
        lam = self.lambda_min(xi2)
        # gamma, literal parse of the printed grouping:
        # sum (beta||dw||_1 + |dd|) * ||dw||_1 * (beta||dw dw^T||_1 + |dd| ||dw||_1)
        # where ||dw dw^T||_1 (max column sum) = ||dw||_inf ||dw||_1
        gamma = float(np.sum(arg * self.l1 * (beta * self.linf * self.l1 + self.abs_dd * self.l1)))
        root_n = math.sqrt(self.n)
        if lam <= 0.0:
            return math.inf, math.inf
        return root_n * self.s_dw / lam, gamma * root_n / (sigma * sigma * lam)


def _bisect(fn, target):
    """Smallest sigma in the bracket with fn(sigma) <= target, fn decreasing."""
    lo, hi = SIGMA_BRACKET
    if fn(lo) <= target:
        return lo
    if fn(hi) > target:
        return None
    # bisect in log space; stop on a relative width of BISECT_TOL
    while hi - lo > BISECT_TOL * lo:
        mid = math.sqrt(lo * hi)
        if fn(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def _rho(pairs):
    lam_min = pairs.lambda_min()
    scale = float(np.max(np.abs(pairs.outer.sum(axis=0)))) if pairs.outer.size else 0.0
    if lam_min <= 1e-12 * max(scale, 1e-300):
        raise DiagnosticError("condition inapplicable: pairwise regressor matrix M_ww is singular")
    return math.sqrt(pairs.n) * pairs.s_dw / lam_min, lam_min


def contraction_radius(aug):
    """Return (rho, lambda_min) for an augmented system.

    Any beta passed to :func:`convergence_diagnostic` must exceed rho.

    Raises:
        DiagnosticError: M_ww is singular.
    """
    return _rho(_Pairs(aug))


def convergence_diagnostic(aug, cfg, beta, alpha=0.9, solve_bounds=False):
    """Evaluate the contraction bounds for an augmented system.

    Args:
        aug: AugmentedSystem.
        cfg: FixedPointConfig (only ``sigma`` is used).
        beta: Radius of the 1-norm ball; must exceed rho.
        alpha: Required contraction factor, 0 < alpha < 1.
        solve_bounds: Also bisect for sigma1 and sigma2.

    Returns:
        ConvergenceReport.

    Raises:
        DiagnosticError: M_ww is singular (for example all rows of W equal).
        ValidationError: beta <= rho or alpha outside (0, 1).
    """
    sigma = check_sigma(cfg.sigma)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    pairs = _Pairs(aug)
    rho, lam_min = _rho(pairs)
    beta = float(beta)
    if not beta > rho:
        raise ValidationError(f"beta={beta!r} must exceed rho={rho!r}")
    g_bound, grad_bound = pairs.bounds(sigma, beta)
    sigma1 = sigma2 = None
    if solve_bounds:
        sigma1 = _bisect(lambda s: pairs.bounds(s, beta)[0], beta)
        sigma2 = _bisect(lambda s: pairs.bounds(s, beta)[1], alpha)
    return ConvergenceReport(
        rho=rho,
        lambda_min=lam_min,
        g_norm_bound=g_bound,
        grad_norm_bound=grad_bound,
        sigma=sigma,
        beta=beta,
        alpha=alpha,
        sigma1=sigma1,
        sigma2=sigma2,
        satisfied=bool(g_bound <= beta and grad_bound <= alpha),
    )


class _Prior:
    def __init__(self, x_prior, p_prior):
        self.x_prior = x_prior
        self.p_prior = p_prior


def demo_instance():
    """A fixed two-state, two-measurement augmented system for diagnostics."""
    prior = _Prior(np.array([1.0, -0.5]), np.array([[2.0, 0.3], [0.3, 1.0]]))
    H = np.array([[1.0, 0.0], [1.0, 1.0]])
    R = np.diag([0.5, 0.8])
    return build_augmented(prior, H, R, np.array([1.2, 0.4]))

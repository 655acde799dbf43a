"""Pairwise affinity matrix and its graph Laplacian, split into blocks."""

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ._backend import kernels
from .kernel import check_sigma


@dataclass(frozen=True)
class LaplacianBlocks:
    """A weight matrix over the augmented residual, partitioned by state size.

    Rows and columns ``0..n-1`` belong to the prior part of the augmented
    regression, the remaining ``m`` to the measurement part.

    Attributes:
        lambda_full: The complete L x L matrix.
        n: State dimension used for the split.
    """

    lambda_full: np.ndarray
    n: int

    @classmethod
    def from_matrix(cls, matrix, n):
        """Wrap an arbitrary square weight matrix (identity, diagonal, ...)."""
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError("weight matrix must be square")
        if not 1 <= n < matrix.shape[0]:
            raise ValidationError(
                f"split_n={n} must satisfy 1 <= n < L={matrix.shape[0]}"
            )
        return cls(matrix, int(n))

    @property
    def lambda_x(self):
        """Prior block, n x n."""
        return self.lambda_full[: self.n, : self.n]

    @property
    def lambda_yx(self):
        """Prior rows, measurement columns: n x m."""
        return self.lambda_full[: self.n, self.n :]

    @property
    def lambda_xy(self):
        """Measurement rows, prior columns: m x n."""
        return self.lambda_full[self.n :, : self.n]

    @property
    def lambda_y(self):
        """Measurement block, m x m."""
        return self.lambda_full[self.n :, self.n :]


def affinity_matrix(errors, sigma):
    """Phi with Phi[i, j] = G_sigma(e_j - e_i), diagonal included."""
    sigma = check_sigma(sigma)
    e = np.asarray(errors, dtype=float).ravel()
    diff = e[None, :] - e[:, None]
    return np.exp(-(diff * diff) / (2.0 * sigma * sigma)) / (np.sqrt(2.0 * np.pi) * sigma)


def affinity_laplacian(errors, split_n, sigma):
    """Build Lambda = Psi - Phi for a residual vector.

    Psi is the diagonal matrix of the row sums of Phi, so every row of
    Lambda sums to zero and Lambda is symmetric positive semidefinite.

    Args:
        errors: Residual vector of length L >= 2.
        split_n: State dimension n used for the block split.
        sigma: Kernel size.

    Returns:
        LaplacianBlocks wrapping the L x L matrix.
    """
    sigma = check_sigma(sigma)
    e = np.ascontiguousarray(errors, dtype=float).ravel()
    if e.size < 2:
        raise ValidationError("need at least two errors to form a Laplacian")
    if not np.all(np.isfinite(e)):
        raise ValidationError("errors must be finite")
    out = np.empty((e.size, e.size))
    kernels.gaussian_laplacian(e, sigma, out)
    return LaplacianBlocks.from_matrix(out, split_n)

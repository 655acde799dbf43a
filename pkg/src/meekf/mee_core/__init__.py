"""MEE machinery: kernels, augmented regression, Laplacian, fixed point."""

from ._backend import BACKEND, get_kernels
from .augmented import AugmentedSystem, build_augmented, lower_cholesky
from .complexity import complexity_estimate
from .convergence import ConvergenceReport, contraction_radius, convergence_diagnostic, demo_instance
from .kernel import gaussian_kernel, information_potential
from .laplacian import LaplacianBlocks, affinity_laplacian, affinity_matrix
from .solver import FixedPointConfig, FixedPointResult, fixed_point_solve, mee_cost, mee_gain, mee_gradient

__all__ = [
    "BACKEND",
    "AugmentedSystem",
    "ConvergenceReport",
    "FixedPointConfig",
    "FixedPointResult",
    "LaplacianBlocks",
    "affinity_laplacian",
    "affinity_matrix",
    "build_augmented",
    "complexity_estimate",
    "contraction_radius",
    "convergence_diagnostic",
    "demo_instance",
    "fixed_point_solve",
    "gaussian_kernel",
    "get_kernels",
    "information_potential",
    "lower_cholesky",
    "mee_cost",
    "mee_gain",
    "mee_gradient",
]

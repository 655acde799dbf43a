"""Minimum error entropy Kalman filtering with classical and correntropy baselines."""

__version__ = "0.1.0"

from .errors import DiagnosticError, NumericalError, ValidationError
from .filters import (
    FilterState,
    PriorState,
    ekf_step,
    joseph_covariance,
    kf_predict,
    kf_update,
    mcekf_step,
    mckf_step,
    meeekf_step,
    meekf_step,
)
from .mee_core import BACKEND, FixedPointConfig
from .statespace import (
    LinearModel,
    NoiseSpec,
    NonlinearModel,
    Trajectory,
    numeric_jacobian,
    sample_noise,
    simulate_linear,
    simulate_nonlinear,
)

__all__ = [
    "BACKEND",
    "DiagnosticError",
    "FilterState",
    "FixedPointConfig",
    "LinearModel",
    "NoiseSpec",
    "NonlinearModel",
    "NumericalError",
    "PriorState",
    "Trajectory",
    "ValidationError",
    "ekf_step",
    "joseph_covariance",
    "kf_predict",
    "kf_update",
    "mcekf_step",
    "mckf_step",
    "meeekf_step",
    "meekf_step",
    "numeric_jacobian",
    "sample_noise",
    "simulate_linear",
    "simulate_nonlinear",
]

"""Experiment configuration and report types."""

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import ValidationError
from ..mee_core.solver import FixedPointConfig

SCENARIOS = ("vehicle", "fusion", "sir")
ALL_FILTERS = ("KF", "MCKF", "MEEKF", "EKF", "MCEKF", "MEEEKF")
ROBUST = {"MCKF": "mcc", "MCEKF": "mcc", "MEEKF": "mee", "MEEEKF": "mee"}

DEFAULT_STEPS = {"vehicle": 5000, "fusion": 500, "sir": 52}
DEFAULT_FILTERS = {
    "vehicle": ("KF", "MCKF", "MEEKF"),
    "fusion": ("KF", "MCKF", "MEEKF", "EKF", "MCEKF", "MEEEKF"),
    "sir": ("EKF", "MCEKF", "MEEEKF"),
}
FUSION_PAIRS = (("KF", "EKF"), ("MCKF", "MCEKF"), ("MEEKF", "MEEEKF"))
FUSION_SIGMA = {"MEEKF": 20.0, "MEEEKF": 1.66, "MCKF": 20.0, "MCEKF": 15.0}
SIR_SIGMA = {"MEEEKF": 20.0, "MCEKF": 16.0}


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one Monte-Carlo experiment.

    Attributes:
        scenario: "vehicle", "fusion" or "sir".
        steps: Time steps per run (scenario default when None).
        runs: Number of Monte-Carlo runs; run r uses seed ``seed + r``.
        seed: Base seed.
        noise_case: Vehicle measurement noise case 1..4 (default 4).
        sigmas: Kernel size per robust filter name; missing entries use the
            scenario defaults.
        epsilon: Fixed-point stopping threshold.
        max_iter: Fixed-point iteration cap.
        regularization: Relative ridge factor of the fixed point.
        data_path: Optional CSV input (fusion, sir).
        filters: Filters to run (scenario default when None).
        process_variance: Vehicle Q diagonal (default depends on the case).
        fusion_merge: "sequential" or "parallel".
        radar_outlier_prob: Fraction of synthetic radar samples drawn with
            inflated covariance.
        radar_outlier_scale: Covariance multiplier of those samples.
        sir_truth: "mismatched" (truth dynamics differ from the filter
            model) or "matched".
        zero_noise: Simulate without process or measurement noise.
        time_scale: Seconds per timestamp unit in fusion CSV input.
    """

    scenario: str
    steps: Optional[int] = None
    runs: int = 20
    seed: int = 0
    noise_case: Optional[int] = None
    sigmas: Dict[str, float] = field(default_factory=dict)
    epsilon: float = 1e-6
    max_iter: int = 100
    regularization: float = 1e-10
    data_path: Optional[str] = None
    filters: Optional[Tuple[str, ...]] = None
    process_variance: Optional[float] = None
    fusion_merge: str = "sequential"
    radar_outlier_prob: float = 0.1
    radar_outlier_scale: float = 100.0
    sir_truth: str = "mismatched"
    zero_noise: bool = False
    time_scale: float = 1.0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        steps = DEFAULT_STEPS[self.scenario] if self.steps is None else self.steps
        _positive_int("steps", steps)
        _positive_int("runs", self.runs)
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed!r}")
        object.__setattr__(self, "steps", int(steps))
        if self.noise_case is not None and self.scenario != "vehicle":
            raise ValidationError("noise_case is only valid for the vehicle scenario")
        if self.scenario == "vehicle":
            case = 4 if self.noise_case is None else self.noise_case
            if case not in (1, 2, 3, 4):
                raise ValidationError(f"noise_case must be 1..4, got {case!r}")
            object.__setattr__(self, "noise_case", int(case))
        filters = DEFAULT_FILTERS[self.scenario] if self.filters is None else tuple(self.filters)
        for name in filters:
            if name not in ALL_FILTERS:
                raise ValidationError(f"unknown filter {name!r}; choose from {ALL_FILTERS}")
        if not filters:
            raise ValidationError("filters must not be empty")
        if self.scenario == "vehicle" and any(f not in ("KF", "MCKF", "MEEKF") for f in filters):
            raise ValidationError("vehicle scenario supports KF, MCKF and MEEKF")
        if self.scenario == "sir" and any(f not in ("EKF", "MCEKF", "MEEEKF") for f in filters):
            raise ValidationError("sir scenario supports EKF, MCEKF and MEEEKF")
        object.__setattr__(self, "filters", tuple(dict.fromkeys(filters)))
        sigmas = dict(self.sigmas)
        for name, value in sigmas.items():
            if name not in ROBUST:
                raise ValidationError(f"kernel size given for non-robust filter {name!r}")
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"kernel size for {name} must be positive, got {value!r}")
        object.__setattr__(self, "sigmas", sigmas)
        if self.fusion_merge not in ("sequential", "parallel"):
            raise ValidationError("fusion_merge must be 'sequential' or 'parallel'")
        if self.sir_truth not in ("mismatched", "matched"):
            raise ValidationError("sir_truth must be 'mismatched' or 'matched'")
        if not 0 <= self.radar_outlier_prob <= 1:
            raise ValidationError("radar_outlier_prob must lie in [0, 1]")
        if not self.radar_outlier_scale > 0:
            raise ValidationError("radar_outlier_scale must be positive")
        if self.process_variance is not None and not self.process_variance >= 0:
            raise ValidationError("process_variance must be nonnegative")
        if not self.time_scale > 0:
            raise ValidationError("time_scale must be positive")
        # validates epsilon, max_iter and regularization
        FixedPointConfig(1.0, self.epsilon, self.max_iter, self.regularization)

    def sigma_for(self, name):
        """Kernel size for a robust filter, falling back to scenario defaults."""
        if name in self.sigmas:
            return float(self.sigmas[name])
        if self.scenario == "vehicle":
            from ..systems import VEHICLE_KERNEL_SIZES

            mcc, mee = VEHICLE_KERNEL_SIZES[self.noise_case]
            return mcc if ROBUST[name] == "mcc" else mee
        if self.scenario == "fusion":
            return FUSION_SIGMA[name]
        return SIR_SIGMA[name]

    def fixed_point(self, name):
        return FixedPointConfig(self.sigma_for(name), self.epsilon, self.max_iter, self.regularization)

    def to_dict(self):
        d = asdict(self)
        d["filters"] = list(self.filters)
        d["sigmas"] = {k: self.sigma_for(k) for k in self.filters if k in ROBUST}
        return d


def _positive_int(name, value):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")


@dataclass
class FilterRun:
    """Per-run outcome of one filter.

    Attributes:
        errors: Per-component metric for this run.
        iterations: Fixed-point iterations per step (zeros for KF/EKF).
        fallbacks: Number of steps that used the classical update.
        min_cov_eig: Smallest posterior covariance eigenvalue over the run.
    """

    errors: np.ndarray
    iterations: np.ndarray
    fallbacks: int
    min_cov_eig: float


@dataclass
class ReportRow:
    filter: str
    component: str
    mse_mean: float
    mse_std: float
    iter_mean: float
    iter_max: int
    fallbacks: int


@dataclass
class TrajectoryRecord:
    """Truth and estimates of a single run, for plotting."""

    truth: np.ndarray
    estimates: Dict[str, np.ndarray]


@dataclass
class MSEReport:
    """Aggregated metric over Monte-Carlo runs.

    Attributes:
        filters: Filter labels in report order.
        components: Component labels in report order.
        per_run: Label -> array (runs, components) of per-run metrics.
        iterations: Label -> (mean, max) fixed-point iterations per step.
        fallbacks: Label -> total fallback steps.
        steps: Total filter steps per label.
        min_cov_eig: Label -> smallest posterior covariance eigenvalue seen.
        trajectory: Optional record of run 0.
    """

    filters: Tuple[str, ...]
    components: Tuple[str, ...]
    per_run: Dict[str, np.ndarray]
    iterations: Dict[str, Tuple[float, int]]
    fallbacks: Dict[str, int]
    steps: int
    min_cov_eig: Dict[str, float]
    trajectory: Optional[TrajectoryRecord] = None

    def mean(self, label, component=None):
        col = self.per_run[label]
        if component is None:
            return col.mean(axis=0)
        return float(col[:, self.components.index(component)].mean())

    def std(self, label, component):
        col = self.per_run[label][:, self.components.index(component)]
        return float(col.std(ddof=1)) if col.size > 1 else 0.0

    def rows(self):
        out = []
        for label in self.filters:
            it_mean, it_max = self.iterations[label]
            for comp in self.components:
                out.append(
                    ReportRow(label, comp, self.mean(label, comp), self.std(label, comp),
                              it_mean, it_max, self.fallbacks[label])
                )
        return out

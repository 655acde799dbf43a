"""Benchmark scenarios, the error metric and the Monte-Carlo harness."""

from .config import ExperimentConfig, MSEReport
from .fusion import run_fusion
from .metrics import component_metric, mse_metric
from .montecarlo import monte_carlo
from .sir import run_sir
from .vehicle import run_vehicle

RUNNERS = {"vehicle": run_vehicle, "fusion": run_fusion, "sir": run_sir}

__all__ = [
    "ExperimentConfig",
    "MSEReport",
    "RUNNERS",
    "component_metric",
    "monte_carlo",
    "mse_metric",
    "run_fusion",
    "run_sir",
    "run_vehicle",
]

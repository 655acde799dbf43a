"""Linear land-vehicle navigation benchmark."""

from functools import partial

import numpy as np

from .. import systems
from ..filters import initial_state, run_filter
from ..statespace import NoiseSpec, simulate_linear
from .config import ExperimentConfig, TrajectoryRecord
from .metrics import component_metric
from .montecarlo import RunOutput, monte_carlo, summarize

COMPONENTS = ("x1", "x2", "x3", "x4")
ZERO = NoiseSpec(((1.0, 0.0, 0.0),))


def vehicle_run(config, seed):
    """One seeded run: simulate, then apply every configured filter.

    All filters consume the same measurement array.
    """
    model = systems.vehicle_model(config.noise_case, config.process_variance)
    if config.zero_noise:
        q_spec = r_spec = ZERO
    else:
        q_spec = NoiseSpec.gaussian(float(model.Q[0, 0]))
        r_spec = systems.VEHICLE_NOISE_CASES[config.noise_case]
    truth = simulate_linear(model, systems.VEHICLE_X0, config.steps, q_spec, r_spec, seed)
    prior = initial_state(systems.VEHICLE_PRIOR_X, systems.VEHICLE_PRIOR_P)
    results, estimates = {}, {}
    for name in config.filters:
        cfg = config.fixed_point(name) if name != "KF" else None
        states = run_filter(name, prior, truth.measurements, model, cfg)
        estimates[name], results[name] = summarize(states, truth.states, component_metric)
    return RunOutput(results, COMPONENTS, TrajectoryRecord(truth.states, estimates))


def run_vehicle(config, workers=None):
    """Monte-Carlo evaluation of the vehicle benchmark.

    Args:
        config: ExperimentConfig with scenario "vehicle".
        workers: Process count (None reads REF_THREADS).

    Returns:
        MSEReport with components x1..x4.
    """
    if not isinstance(config, ExperimentConfig) or config.scenario != "vehicle":
        raise TypeError("run_vehicle needs a vehicle ExperimentConfig")
    return monte_carlo(partial(vehicle_run, config), config.runs, config.seed, workers)

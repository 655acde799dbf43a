"""SIR epidemic tracking from a noisy infected-fraction series."""

from functools import partial

import numpy as np

from .. import systems
from ..filters import FilterState, ekf_step, mcekf_step, meeekf_step
from ..statespace import NoiseSpec, NonlinearModel, simulate_nonlinear
from .config import ExperimentConfig, TrajectoryRecord
from .metrics import component_metric
from .montecarlo import RunOutput, monte_carlo, summarize

COMPONENTS = ("i",)

# truth dynamics of the default synthetic season; the filters keep the
# nominal contact/recovery rates, so the model is deliberately misspecified
TRUTH_RATES = {"mismatched": (0.4, 0.3), "matched": (systems.SIR_CONTACT, systems.SIR_RECOVERY)}
TRUTH_X0 = np.array([0.99, 0.01])
FILTER_X0 = np.array([0.99, 0.005])
FILTER_P0 = 1e-4 * np.eye(2)
PROCESS_NOISE = NoiseSpec.gaussian(1e-8)
# mostly small surveillance noise with occasional reporting spikes
MEASUREMENT_NOISE = NoiseSpec(((0.9, 0.0, 1e-6), (0.1, 0.0, 1e-4)))
ZERO = NoiseSpec(((1.0, 0.0, 0.0),))

_STEPS = {"EKF": ekf_step, "MCEKF": mcekf_step, "MEEEKF": meeekf_step}


def truth_model(mode):
    contact, recovery = TRUTH_RATES[mode]
    return systems.sir_model(contact, recovery)


def synthetic_season(config, seed):
    model = truth_model(config.sir_truth)
    q, r = (ZERO, ZERO) if config.zero_noise else (PROCESS_NOISE, MEASUREMENT_NOISE)
    traj = simulate_nonlinear(model, TRUTH_X0, config.steps, q, r, seed)
    return traj.states, traj.measurements


def filter_series(name, measurements, model, cfg, x0=FILTER_X0, p0=FILTER_P0):
    """Run one filter from the posterior guess (x0, p0) at week 0."""
    state = FilterState(np.array(x0, dtype=float), np.array(p0, dtype=float), 0)
    out = []
    step = _STEPS[name]
    for y in measurements:
        state = step(state, y, model, cfg) if cfg is not None else step(state, y, model)
        out.append(state)
    return out


def _errors(truth, est):
    return component_metric(truth[:, 1:2], est[:, 1:2])


def sir_run(config, source, seed):
    states, meas, x0 = source(seed)
    model = systems.sir_model()
    results, estimates = {}, {}
    for name in config.filters:
        cfg = config.fixed_point(name) if name != "EKF" else None
        out = filter_series(name, meas, model, cfg, x0)
        estimates[name], results[name] = summarize(out, states, _errors)
    return RunOutput(results, COMPONENTS, TrajectoryRecord(states, estimates))


def _synthetic_source(config, seed):
    states, meas = synthetic_season(config, seed)
    return states, meas, FILTER_X0


def _data_source(series, seed):
    # observed series stands in for the truth; s is unobserved
    states = np.column_stack([1.0 - series, series])
    return states, series[:, None], np.array([1.0 - series[0], series[0]])


def run_sir(config, workers=None):
    """Monte-Carlo evaluation of the SIR benchmark.

    The metric is computed on the infected fraction i(k) only. With
    ``data_path`` the weekly series is filtered once and compared with
    itself.
    """
    if not isinstance(config, ExperimentConfig) or config.scenario != "sir":
        raise TypeError("run_sir needs a sir ExperimentConfig")
    if config.data_path:
        from .io import read_sir_csv

        series = read_sir_csv(config.data_path)[: config.steps]
        return monte_carlo(partial(sir_run, config, partial(_data_source, series)), 1, config.seed, workers)
    return monte_carlo(partial(sir_run, config, partial(_synthetic_source, config)), config.runs, config.seed, workers)

"""Lidar/radar fusion tracking on a shared constant-velocity state."""

import math
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Tuple

import numpy as np

from .. import systems
from ..errors import NumericalError, ValidationError
from ..filters import (
    FilterState,
    PriorState,
    ekf_update,
    kf_predict,
    kf_update,
    mcekf_update,
    mckf_update,
    meeekf_update,
    meekf_update,
    symmetrize,
)
from .config import FUSION_PAIRS, ExperimentConfig, TrajectoryRecord
from .metrics import component_metric
from .montecarlo import RunOutput, monte_carlo, summarize

COMPONENTS = ("px", "py", "vx", "vy", "total")
FIGURE_EIGHT_PERIOD = 25.0

_LIDAR_UPDATES = {"KF": kf_update, "MCKF": mckf_update, "MEEKF": meekf_update}
_RADAR_UPDATES = {"EKF": ekf_update, "MCEKF": mcekf_update, "MEEEKF": meeekf_update}


@dataclass(frozen=True)
class Measurement:
    sensor: str  # "L" or "R"
    values: np.ndarray


@dataclass(frozen=True)
class SensorStream:
    """Measurements grouped by timestamp.

    Attributes:
        times: Timestamps in seconds, non-decreasing.
        groups: Measurements sharing each timestamp.
        truth: Optional (N, 4) ground-truth states.
    """

    times: np.ndarray
    groups: Tuple[Tuple[Measurement, ...], ...]
    truth: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.groups)


def figure_eight(times):
    """Truth states on a figure-eight path."""
    w = 2.0 * math.pi / FIGURE_EIGHT_PERIOD
    t = np.asarray(times, dtype=float)
    return np.stack(
        [8 + 6 * np.sin(w * t), 4 * np.sin(2 * w * t), 6 * w * np.cos(w * t), 8 * w * np.cos(2 * w * t)],
        axis=1,
    )


def synthetic_stream(steps, seed, outlier_prob=0.1, outlier_scale=100.0, simultaneous=False,
                     zero_noise=False, dt=systems.FUSION_DT):
    """Simulate interleaved lidar and radar measurements of a figure-eight.

    Lidar and radar alternate (lidar first) unless ``simultaneous`` is set,
    in which case both sensors report at every step. A radar sample uses
    ``outlier_scale`` times its nominal covariance with probability
    ``outlier_prob``.
    """
    rng = np.random.default_rng(seed)
    times = np.arange(1, steps + 1) * dt
    truth = figure_eight(times)
    lidar_sd = np.sqrt(np.diag(systems.LIDAR_R))
    radar_sd = np.sqrt(np.diag(systems.RADAR_R))
    groups = []
    for k in range(steps):
        sensors = ("L", "R") if simultaneous else (("L",) if k % 2 == 0 else ("R",))
        group = []
        for sensor in sensors:
            if sensor == "L":
                noise = lidar_sd * rng.standard_normal(2)
                y = truth[k, :2] + (0.0 if zero_noise else noise)
            else:
                scale = math.sqrt(outlier_scale) if rng.random() < outlier_prob else 1.0
                noise = scale * radar_sd * rng.standard_normal(3)
                y = systems.radar_h(truth[k]) + (0.0 if zero_noise else noise)
                y[1] = systems.wrap_angle(y[1])
            group.append(Measurement(sensor, y))
        groups.append(tuple(group))
    return SensorStream(times, tuple(groups), truth)


def initial_from(measurement):
    """State guess from the first measurement of a stream."""
    if measurement.sensor == "L":
        return np.array([measurement.values[0], measurement.values[1], 0.0, 0.0])
    rho, phi, rho_dot = measurement.values
    return systems.polar_to_state(rho, phi, rho_dot)


class _Models:
    """Per-interval model cache; timestamps may be irregular."""

    def __init__(self):
        self._cache = {}

    def get(self, dt):
        key = round(float(dt), 12)
        if key not in self._cache:
            self._cache[key] = (systems.lidar_model(key), systems.radar_model(key))
        return self._cache[key]


def _update(prior, meas, lidar_name, radar_name, lidar, radar, cfgs):
    if meas.sensor == "L":
        fn, model, name = _LIDAR_UPDATES[lidar_name], lidar, lidar_name
    else:
        fn, model, name = _RADAR_UPDATES[radar_name], radar, radar_name
    if name in cfgs:
        return fn(prior, meas.values, model, cfgs[name])
    return fn(prior, meas.values, model)


def _merge(prior, posts):
    """Covariance-weighted merge of parallel updates from a common prior.

    Uses I = sum(P_i^-1) - (len - 1) P^-1, dropping the prior correction
    when that information matrix is not positive definite.
    """
    inv = np.linalg.inv
    info_prior = inv(prior.p_prior)
    infos = [inv(p.p_post) for p in posts]
    vec = sum(i @ p.x_post for i, p in zip(infos, posts))
    info = sum(infos)
    corrected = info - (len(posts) - 1) * info_prior
    if np.linalg.eigvalsh(symmetrize(corrected))[0] > 0:
        info = corrected
        vec = vec - (len(posts) - 1) * info_prior @ prior.x_prior
    cov = symmetrize(inv(info))
    return cov @ vec, cov


def fuse(stream, lidar_name, radar_name, cfgs, merge="sequential"):
    """Run one filter pair over a stream.

    Args:
        stream: SensorStream.
        lidar_name: KF, MCKF or MEEKF.
        radar_name: EKF, MCEKF or MEEEKF.
        cfgs: Filter name -> FixedPointConfig for the robust members.
        merge: "sequential" updates the shared state once per measurement;
            "parallel" updates each sensor from the common prior and merges.

    Returns:
        List of FilterState, one per timestamp. The first is the state
        initialized from the first measurement.
    """
    models = _Models()
    first = stream.groups[0][0]
    state = FilterState(initial_from(first), systems.FUSION_PRIOR_P.copy(), 0)
    out = [state]
    for k in range(1, len(stream)):
        dt = stream.times[k] - stream.times[k - 1]
        lidar, radar = models.get(dt)
        prior = kf_predict(state, lidar)
        group = stream.groups[k]
        iterations, fallback = 0, False
        if merge == "parallel" and len(group) > 1:
            posts = [_update(prior, m, lidar_name, radar_name, lidar, radar, cfgs) for m in group]
            try:
                x, p = _merge(prior, posts)
            except np.linalg.LinAlgError as exc:
                raise NumericalError("parallel merge failed: singular covariance") from exc
            iterations = sum(p.iterations for p in posts)
            fallback = any(p.fallback for p in posts)
            state = FilterState(x, p, prior.k, iterations, not fallback, fallback)
        else:
            current = prior
            for meas in group:
                post = _update(current, meas, lidar_name, radar_name, lidar, radar, cfgs)
                iterations += post.iterations
                fallback = fallback or post.fallback
                current = PriorState(post.x_post, post.p_post, post.k)
            state = FilterState(post.x_post, post.p_post, prior.k, iterations, not fallback, fallback)
        out.append(state)
    return out


def selected_pairs(filters):
    """Filter pairs with at least one member in ``filters``."""
    return [pair for pair in FUSION_PAIRS if pair[0] in filters or pair[1] in filters]


def _errors(truth, est):
    if truth is None:
        return np.full(len(COMPONENTS), np.nan)
    comp = component_metric(truth, est)
    return np.append(comp, comp.sum())


def fusion_run(config, stream_source, seed):
    stream = stream_source(seed)
    cfgs = {n: config.fixed_point(n) for n in ("MCKF", "MCEKF", "MEEKF", "MEEEKF")}
    results, estimates = {}, {}
    for lidar_name, radar_name in selected_pairs(config.filters):
        label = f"{lidar_name}/{radar_name}"
        states = fuse(stream, lidar_name, radar_name, cfgs, config.fusion_merge)
        estimates[label], results[label] = summarize(states, stream.truth, _errors)
    truth = stream.truth if stream.truth is not None else np.full((len(stream), 4), np.nan)
    return RunOutput(results, COMPONENTS, TrajectoryRecord(truth, estimates))


def _synthetic_source(config, seed):
    return synthetic_stream(
        config.steps, seed, config.radar_outlier_prob, config.radar_outlier_scale,
        simultaneous=config.fusion_merge == "parallel", zero_noise=config.zero_noise,
    )


def _fixed_source(stream, seed):
    return stream


def run_fusion(config, workers=None):
    """Monte-Carlo evaluation of the fusion benchmark.

    With ``data_path`` set, the CSV stream is processed once (runs are
    ignored since there is no randomness). The ``total`` component is the
    1-norm metric, i.e. the sum of the four component metrics.
    """
    if not isinstance(config, ExperimentConfig) or config.scenario != "fusion":
        raise TypeError("run_fusion needs a fusion ExperimentConfig")
    if config.data_path:
        from .io import read_fusion_csv

        stream = read_fusion_csv(config.data_path, config.time_scale)
        if len(stream) > config.steps:
            stream = SensorStream(stream.times[: config.steps], stream.groups[: config.steps],
                                  None if stream.truth is None else stream.truth[: config.steps])
        return monte_carlo(partial(fusion_run, config, partial(_fixed_source, stream)), 1, config.seed, workers)
    source = partial(_synthetic_source, config)
    return monte_carlo(partial(fusion_run, config, source), config.runs, config.seed, workers)

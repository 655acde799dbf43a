"""Monte-Carlo harness: seeded runs, optional process parallelism."""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import ValidationError
from .config import FilterRun, MSEReport, TrajectoryRecord


@dataclass
class RunOutput:
    """Everything one seeded run produces."""

    results: Dict[str, FilterRun]
    components: Tuple[str, ...]
    trajectory: Optional[TrajectoryRecord] = None


def worker_count(requested=None):
    """Resolve the degree of parallelism.

    ``requested`` wins; otherwise ``REF_THREADS`` is read, where 0 (or
    unset) means one worker per CPU.
    """
    if requested is None:
        raw = os.environ.get("REF_THREADS", "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError as exc:
            raise ValidationError(f"REF_THREADS must be an integer, got {raw!r}") from exc
    if requested < 0:
        raise ValidationError("worker count must be >= 0")
    if requested == 0:
        requested = os.cpu_count() or 1
    return requested


def monte_carlo(runner, runs, base_seed=0, workers=None, keep_trajectory=True):
    """Run ``runner(seed)`` for seeds base_seed .. base_seed + runs - 1.

    Results are collected by run index, so the report does not depend on
    the number of workers or on completion order.

    Args:
        runner: Picklable callable returning RunOutput.
        runs: Number of runs, >= 1.
        base_seed: Seed of run 0.
        workers: Process count; None reads REF_THREADS.
        keep_trajectory: Keep the trajectory record of run 0.

    Returns:
        MSEReport.
    """
    if int(runs) != runs or runs < 1:
        raise ValidationError(f"runs must be a positive integer, got {runs!r}")
    seeds = [base_seed + r for r in range(int(runs))]
    n_workers = min(worker_count(workers), len(seeds))
    if n_workers <= 1:
        outputs = [runner(s) for s in seeds]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outputs = list(pool.map(runner, seeds))
    return aggregate(outputs, keep_trajectory)


def aggregate(outputs, keep_trajectory=True):
    """Combine a list of RunOutput (ordered by run index) into an MSEReport."""
    first = outputs[0]
    labels = tuple(first.results)
    per_run, iterations, fallbacks, min_eig = {}, {}, {}, {}
    steps = 0
    for label in labels:
        runs = [o.results[label] for o in outputs]
        per_run[label] = np.array([r.errors for r in runs], dtype=float)
        its = np.concatenate([r.iterations for r in runs])
        steps = its.size
        iterations[label] = (float(its.mean()) if its.size else 0.0, int(its.max()) if its.size else 0)
        fallbacks[label] = int(sum(r.fallbacks for r in runs))
        min_eig[label] = float(min(r.min_cov_eig for r in runs))
    return MSEReport(
        filters=labels,
        components=first.components,
        per_run=per_run,
        iterations=iterations,
        fallbacks=fallbacks,
        steps=steps,
        min_cov_eig=min_eig,
        trajectory=first.trajectory if keep_trajectory else None,
    )


def summarize(states, truth, errors_fn):
    """Build a FilterRun from a list of FilterState."""
    est = np.array([s.x_post for s in states])
    iters = np.array([s.iterations for s in states], dtype=int)
    fb = int(sum(s.fallback for s in states))
    min_eig = float(np.linalg.eigvalsh(np.array([s.p_post for s in states]))[:, 0].min())
    return est, FilterRun(errors_fn(truth, est), iters, fb, min_eig)

"""Estimation error metric: mean over time of the 1-norm of the error."""

import numpy as np

from ..errors import ValidationError


def _pair(truth, estimates):
    truth = getattr(truth, "states", truth)
    x = np.atleast_2d(np.asarray(truth, dtype=float))
    e = np.atleast_2d(np.asarray(estimates, dtype=float))
    if x.shape[0] == 1 and x.shape[1] > 1 and e.shape[0] > 1:
        x = x.T
    if e.shape[0] == 1 and e.shape[1] > 1 and x.shape[0] > 1:
        e = e.T
    if x.shape != e.shape:
        raise ValidationError(f"truth {x.shape} and estimates {e.shape} differ in shape")
    return x, e


def mse_metric(truth, estimates):
    """(1/N) sum_k ||x(k) - x_hat(k)||_1.

    Despite the conventional "MSE" label this is a mean absolute (1-norm)
    error.

    Args:
        truth: Trajectory or array (N, n).
        estimates: Array (N, n).

    Returns:
        Scalar metric.
    """
    x, e = _pair(truth, estimates)
    return float(np.abs(x - e).sum(axis=1).mean())


def component_metric(truth, estimates):
    """Per-component mean of |x_i(k) - x_hat_i(k)|; sums to :func:`mse_metric`."""
    x, e = _pair(truth, estimates)
    return np.abs(x - e).mean(axis=0)

"""KF, EKF, correntropy and error-entropy filter steps.

Every step is a pure function: a state goes in, a new state comes out.
The robust filters share one update path. It whitens the prior and the
measurement into an augmented regression, solves a weighted fixed point
with either the MEE Laplacian or diagonal correntropy weights, and
updates the covariance in Joseph form with the resulting gain. When the
fixed point fails, the classical update is emitted and the state is
flagged with ``fallback=True``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .mee_core.augmented import build_augmented
from .mee_core.solver import fixed_point_solve, mee_gain


@dataclass(frozen=True)
class PriorState:
    """Predicted estimate x(k|k-1) and covariance P(k|k-1)."""

    x_prior: np.ndarray
    p_prior: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class FilterState:
    """Posterior estimate and bookkeeping for one time step.

    Attributes:
        x_post: Posterior mean.
        p_post: Posterior covariance.
        k: Time index.
        iterations: Fixed-point iterations used (0 for KF/EKF).
        converged: False when the fixed point did not converge.
        fallback: True when the classical update was substituted.
    """

    x_post: np.ndarray
    p_post: np.ndarray
    k: int = 0
    iterations: int = 0
    converged: bool = True
    fallback: bool = False


def initial_state(x_prior, p_prior, k=1):
    """A PriorState from an initial guess; the first update uses it directly."""
    x = np.array(x_prior, dtype=float).ravel()
    p = np.array(p_prior, dtype=float)
    if p.shape != (x.size, x.size):
        raise ValidationError(f"covariance shape {p.shape} does not match state size {x.size}")
    return PriorState(x, 0.5 * (p + p.T), k)


def symmetrize(p):
    return 0.5 * (p + p.T)


def joseph_covariance(K, H, p_prior, R):
    """(I - K H) P (I - K H)^T + K R K^T, symmetrized.

    Args:
        K: n x m gain.
        H: m x n measurement matrix.
        p_prior: n x n prior covariance.
        R: m x m measurement covariance.

    Returns:
        n x n posterior covariance.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    H = np.atleast_2d(np.asarray(H, dtype=float))
    p_prior = np.asarray(p_prior, dtype=float)
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n = p_prior.shape[0]
    if K.shape != (n, H.shape[0]) or H.shape[1] != n or R.shape != (H.shape[0],) * 2:
        raise ValidationError(
            f"inconsistent shapes: K {K.shape}, H {H.shape}, P {p_prior.shape}, R {R.shape}"
        )
    a = np.eye(n) - K @ H
    return symmetrize(a @ p_prior @ a.T + K @ R @ K.T)


def _predict(x, p, F, Q, k, x_next=None):
    x_next = F @ x if x_next is None else x_next
    return PriorState(x_next, symmetrize(F @ p @ F.T + Q), k + 1)


def kf_predict(state, model):
    """x(k|k-1) = F x(k-1),  P(k|k-1) = F P F^T + Q."""
    x = np.asarray(state.x_post, dtype=float)
    if x.size != model.n:
        raise ValidationError(f"state has {x.size} entries, model expects {model.n}")
    return _predict(x, state.p_post, model.F, model.Q, state.k)


def ekf_predict(state, model):
    """Propagate through f and linearize at the previous posterior."""
    x = np.asarray(state.x_post, dtype=float)
    F = model.F_at(x)
    x_next = np.asarray(model.f(x), dtype=float).ravel()
    if not np.all(np.isfinite(x_next)):
        raise NumericalError("state transition returned non-finite values")
    return _predict(x, state.p_post, F, model.Q, state.k, x_next)


def _classical(prior, innovation, H, R, iterations=0, converged=True, fallback=False):
    p = prior.p_prior
    s = H @ p @ H.T + R
    try:
        K = np.linalg.solve(symmetrize(s), H @ p).T
    except np.linalg.LinAlgError as exc:
        raise NumericalError("innovation covariance is singular") from exc
    if not np.all(np.isfinite(K)):
        raise NumericalError("innovation covariance is singular")
    x = prior.x_prior + K @ innovation
    return FilterState(x, joseph_covariance(K, H, p, R), prior.k, iterations, converged, fallback)


def kf_update(prior, y, model):
    """Classical Kalman update with the Joseph-form covariance."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != model.m:
        raise ValidationError(f"measurement has {y.size} entries, model expects {model.m}")
    return _classical(prior, y - model.H @ prior.x_prior, model.H, model.R)


def ekf_update(prior, y, model):
    """Extended Kalman update with innovation y - h(x(k|k-1))."""
    H = model.H_at(prior.x_prior)
    return _classical(prior, model.innovation(y, prior.x_prior), H, model.R)


def _robust(prior, innovation, H, R, cfg, weighting):
    aug = build_augmented(prior, H, R, None, innovation=innovation)
    res = fixed_point_solve(aug, cfg, prior.x_prior, weighting=weighting, raise_on_singular=False)
    if res.converged:
        try:
            K = mee_gain(res.weights, aug, H, ridge=res.ridge)
        except NumericalError:
            K = None
        if K is not None:
            x = prior.x_prior + K @ innovation
            return FilterState(x, joseph_covariance(K, H, prior.p_prior, R), prior.k, res.iterations, True, False)
    return _classical(prior, innovation, H, R, res.iterations, False, True)


def _linear_innovation(prior, y, model):
    y = np.asarray(y, dtype=float).ravel()
    if y.size != model.m:
        raise ValidationError(f"measurement has {y.size} entries, model expects {model.m}")
    return y - model.H @ prior.x_prior


def mckf_update(prior, y, model, cfg):
    """Correntropy update: diagonal weights G_sigma(e_i) in the fixed point."""
    return _robust(prior, _linear_innovation(prior, y, model), model.H, model.R, cfg, "mcc")


def meekf_update(prior, y, model, cfg):
    """Error-entropy update: affinity-Laplacian weights in the fixed point.

    The fixed point starts at x(k|k-1); the gain is formed from the weights
    of the final iteration.
    """
    return _robust(prior, _linear_innovation(prior, y, model), model.H, model.R, cfg, "mee")


def mcekf_update(prior, y, model, cfg):
    H = model.H_at(prior.x_prior)
    return _robust(prior, model.innovation(y, prior.x_prior), H, model.R, cfg, "mcc")


def meeekf_update(prior, y, model, cfg):
    H = model.H_at(prior.x_prior)
    return _robust(prior, model.innovation(y, prior.x_prior), H, model.R, cfg, "mee")


def kf_step(state, y, model):
    return kf_update(kf_predict(state, model), y, model)


def ekf_step(state, y, model):
    return ekf_update(ekf_predict(state, model), y, model)


def mckf_step(state, y, model, cfg):
    return mckf_update(kf_predict(state, model), y, model, cfg)


def mcekf_step(state, y, model, cfg):
    return mcekf_update(ekf_predict(state, model), y, model, cfg)


def meekf_step(state, y, model, cfg):
    """One MEE-KF cycle: predict, then the error-entropy update.

    Args:
        state: FilterState at k-1.
        y: Measurement at k.
        model: LinearModel.
        cfg: FixedPointConfig.

    Returns:
        FilterState at k.
    """
    return meekf_update(kf_predict(state, model), y, model, cfg)


def meeekf_step(state, y, model, cfg):
    """One MEE-EKF cycle on a NonlinearModel."""
    return meeekf_update(ekf_predict(state, model), y, model, cfg)


LINEAR_UPDATES = {"KF": kf_update, "MCKF": mckf_update, "MEEKF": meekf_update}
NONLINEAR_UPDATES = {"EKF": ekf_update, "MCEKF": mcekf_update, "MEEEKF": meeekf_update}


def run_filter(name, prior, measurements, model, cfg=None):
    """Run a filter over a measurement sequence.

    The first measurement updates ``prior`` directly, so ``prior`` plays the
    role of x(1|0), P(1|0).

    Args:
        name: One of KF, MCKF, MEEKF, EKF, MCEKF, MEEEKF.
        prior: PriorState for step 1.
        measurements: Array of shape (N, m).
        model: LinearModel for KF/MCKF/MEEKF, NonlinearModel otherwise.
        cfg: FixedPointConfig for the robust filters.

    Returns:
        List of FilterState, one per measurement.
    """
    if name in LINEAR_UPDATES:
        update, predict = LINEAR_UPDATES[name], kf_predict
    elif name in NONLINEAR_UPDATES:
        update, predict = NONLINEAR_UPDATES[name], ekf_predict
    else:
        raise ValidationError(f"unknown filter {name!r}")
    robust = name not in ("KF", "EKF")
    if robust and cfg is None:
        raise ValidationError(f"{name} needs a FixedPointConfig")
    out = []
    current = prior
    for k, y in enumerate(np.atleast_2d(measurements)):
        post = update(current, y, model, cfg) if robust else update(current, y, model)
        out.append(post)
        if k + 1 < len(measurements):
            current = predict(post, model)
    return out

"""Concrete models used by the experiments: vehicle, lidar/radar, SIR."""

import math

import numpy as np

from .errors import ValidationError
from .statespace import LinearModel, NoiseSpec, NonlinearModel

# -- land vehicle -----------------------------------------------------------

VEHICLE_DT = 0.3
VEHICLE_THETA = math.pi / 3.0
VEHICLE_H = np.array([[-1.0, 0.0, -1.0, 0.0], [0.0, -1.0, 0.0, -1.0]])
VEHICLE_X0 = np.array([0.0, 0.0, 10.0 * math.tan(VEHICLE_THETA), 10.0])
VEHICLE_PRIOR_X = np.ones(4)
VEHICLE_PRIOR_P = np.diag([900.0, 900.0, 4.0, 4.0])

VEHICLE_NOISE_CASES = {
    1: NoiseSpec(((1.0, 0.0, 0.05),)),
    2: NoiseSpec(((0.99, 0.0, 0.009), (0.01, 0.0, 1000.0))),
    # the heavy component carries weight 0.99 here; see the README
    3: NoiseSpec(((0.01, -0.1, 0.001), (0.99, 0.1, 1000.0))),
    4: NoiseSpec(((0.48, -0.1, 0.001), (0.04, 0.0, 1000.0), (0.48, 0.1, 0.001))),
}

# (MCKF sigma, MEE-KF sigma) per noise case
VEHICLE_KERNEL_SIZES = {1: (10.0, 10.0), 2: (6.0, 2.0), 3: (6.0, 2.0), 4: (5.0, 1.5)}

# process noise variance per noise case (see README, "Vehicle process noise")
VEHICLE_PROCESS_VARIANCE = {1: 0.001, 2: 0.01, 3: 0.01, 4: 0.01}


def cv_transition(dt):
    """Constant-velocity transition for a [px, py, vx, vy] state."""
    F = np.eye(4)
    F[0, 2] = F[1, 3] = dt
    return F


def vehicle_model(noise_case=4, process_variance=None, dt=VEHICLE_DT):
    """Linear vehicle model with R set to the covariance of the noise case.

    Args:
        noise_case: 1..4.
        process_variance: Diagonal of Q; defaults per case.
        dt: Sampling interval.

    Returns:
        LinearModel.
    """
    if noise_case not in VEHICLE_NOISE_CASES:
        raise ValidationError(f"noise case must be 1..4, got {noise_case!r}")
    if process_variance is None:
        process_variance = VEHICLE_PROCESS_VARIANCE[noise_case]
    r_var = VEHICLE_NOISE_CASES[noise_case].variance
    return LinearModel(
        cv_transition(dt), VEHICLE_H, process_variance * np.eye(4), r_var * np.eye(2)
    )


# -- lidar / radar fusion ---------------------------------------------------

FUSION_DT = 0.1
LIDAR_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
LIDAR_R = np.diag([0.0025, 0.0025])
RADAR_R = np.diag([0.09, 0.05, 0.09])
FUSION_PRIOR_P = np.diag([1.0, 1.0, 1000.0, 1000.0])
RADAR_MIN_RANGE = 1e-9


def fusion_process_cov(dt=FUSION_DT):
    """Process covariance of the tracking benchmark (not a discretized white-noise form)."""
    a, b, c = dt**2 / 4.0, dt**3 / 2.0, dt**2
    return np.array([[a, 0, b, 0], [0, a, 0, b], [b, 0, c, 0], [0, b, 0, c]], dtype=float)


def wrap_angle(a):
    """Map angles to (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    out = np.mod(a + math.pi, 2.0 * math.pi) - math.pi
    out = np.where(out == -math.pi, math.pi, out)
    return float(out) if out.ndim == 0 else out


def radar_h(x):
    """Polar measurement [range, bearing, range rate] of a CV state."""
    px, py, vx, vy = x
    rho = max(math.hypot(px, py), RADAR_MIN_RANGE)
    return np.array([rho, math.atan2(py, px), (px * vx + py * vy) / rho])


def radar_jacobian(x):
    """Analytic Jacobian of :func:`radar_h`."""
    px, py, vx, vy = x
    r2 = max(px * px + py * py, RADAR_MIN_RANGE**2)
    r = math.sqrt(r2)
    r3 = r2 * r
    return np.array(
        [
            [px / r, py / r, 0.0, 0.0],
            [-py / r2, px / r2, 0.0, 0.0],
            [py * (vx * py - vy * px) / r3, px * (vy * px - vx * py) / r3, px / r, py / r],
        ]
    )


def radar_residual(y, y_pred):
    """Measurement minus prediction with the bearing wrapped."""
    d = np.asarray(y, dtype=float) - np.asarray(y_pred, dtype=float)
    d[1] = wrap_angle(d[1])
    return d


def polar_to_state(rho, phi, rho_dot):
    """Convert a radar measurement into a [px, py, vx, vy] state.

    The velocity is the range rate projected on the bearing, which is exact
    only for radially moving targets.
    """
    c, s = math.cos(phi), math.sin(phi)
    return np.array([rho * c, rho * s, rho_dot * c, rho_dot * s])


def lidar_model(dt=FUSION_DT):
    return LinearModel(cv_transition(dt), LIDAR_H, fusion_process_cov(dt), LIDAR_R)


def radar_model(dt=FUSION_DT):
    F = cv_transition(dt)
    return NonlinearModel(
        f=lambda x: F @ x,
        h=radar_h,
        Q=fusion_process_cov(dt),
        R=RADAR_R,
        jac_f=lambda x: F,
        jac_h=radar_jacobian,
        residual=radar_residual,
    )


# -- SIR epidemic -----------------------------------------------------------

SIR_CONTACT = 0.35
SIR_RECOVERY = 0.11


def sir_transition(contact=SIR_CONTACT, recovery=SIR_RECOVERY):
    """Return (f, jac_f) for the two-state [s, i] SIR recursion."""

    def f(x):
        s, i = x
        return np.array([s - contact * s * i, i + contact * s * i - recovery * i])

    def jac(x):
        s, i = x
        return np.array([[1.0 - contact * i, -contact * s], [contact * i, 1.0 + contact * s - recovery]])

    return f, jac


def sir_model(contact=SIR_CONTACT, recovery=SIR_RECOVERY, q=1e-8, r=1e-6):
    """SIR model observed through i(k) only."""
    f, jac = sir_transition(contact, recovery)
    H = np.array([[0.0, 1.0]])
    return NonlinearModel(
        f=f,
        h=lambda x: H @ x,
        Q=q * np.eye(2),
        R=np.array([[r]]),
        jac_f=jac,
        jac_h=lambda x: H,
    )

"""State-space models, mixture noise, trajectory simulation and Jacobians."""

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import NumericalError, ValidationError

WEIGHT_TOL = 1e-12


def _matrix(value, name):
    a = np.atleast_2d(np.array(value, dtype=float))
    if a.ndim != 2:
        raise ValidationError(f"{name} must be a matrix")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def _check_cov(a, name, strict):
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got {a.shape}")
    if not np.allclose(a, a.T, rtol=1e-12, atol=1e-14):
        raise ValidationError(f"{name} must be symmetric")
    eig = np.linalg.eigvalsh(a)
    scale = max(1.0, float(np.max(np.abs(eig))))
    if strict and eig[0] <= 0:
        raise ValidationError(f"{name} must be positive definite")
    if eig[0] < -1e-12 * scale:
        raise ValidationError(f"{name} must be positive semidefinite")


@dataclass(frozen=True)
class LinearModel:
    """x(k) = F x(k-1) + q(k-1),  y(k) = H x(k) + r(k).

    Attributes:
        F: n x n transition matrix.
        H: m x n measurement matrix.
        Q: Process noise covariance (PSD).
        R: Measurement noise covariance (PD).
    """

    F: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        F, H, Q, R = (_matrix(getattr(self, k), k) for k in "FHQR")
        n, m = F.shape[0], H.shape[0]
        if F.shape != (n, n) or H.shape[1] != n or Q.shape != (n, n) or R.shape != (m, m):
            raise ValidationError(
                f"inconsistent dimensions: F {F.shape}, H {H.shape}, Q {Q.shape}, R {R.shape}"
            )
        _check_cov(Q, "Q", strict=False)
        _check_cov(R, "R", strict=True)
        for k, v in zip("FHQR", (F, H, Q, R)):
            v.setflags(write=False)
            object.__setattr__(self, k, v)

    @property
    def n(self):
        return self.F.shape[0]

    @property
    def m(self):
        return self.H.shape[0]

    def with_noise(self, Q=None, R=None):
        """Copy with replaced noise covariances."""
        return LinearModel(self.F, self.H, self.Q if Q is None else Q, self.R if R is None else R)


@dataclass(frozen=True)
class NonlinearModel:
    """x(k) = f(x(k-1)) + q(k-1),  y(k) = h(x(k)) + r(k).

    Attributes:
        f: Transition function R^n -> R^n.
        h: Measurement function R^n -> R^m.
        Q: Process noise covariance.
        R: Measurement noise covariance.
        jac_f: Optional analytic Jacobian of f.
        jac_h: Optional analytic Jacobian of h.
        residual: Optional ``(y, y_pred) -> innovation`` used instead of plain
            subtraction, for example to wrap angles.
    """

    f: Callable[[np.ndarray], np.ndarray]
    h: Callable[[np.ndarray], np.ndarray]
    Q: np.ndarray
    R: np.ndarray
    jac_f: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jac_h: Optional[Callable[[np.ndarray], np.ndarray]] = None
    residual: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        Q = _matrix(self.Q, "Q")
        R = _matrix(self.R, "R")
        _check_cov(Q, "Q", strict=False)
        _check_cov(R, "R", strict=True)
        Q.setflags(write=False)
        R.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

    @classmethod
    def from_linear(cls, model):
        """Wrap a LinearModel so the nonlinear filters can run on it."""
        F, H = model.F, model.H
        return cls(
            f=lambda x: F @ x,
            h=lambda x: H @ x,
            Q=model.Q,
            R=model.R,
            jac_f=lambda x: F,
            jac_h=lambda x: H,
        )

    @property
    def n(self):
        return self.Q.shape[0]

    @property
    def m(self):
        return self.R.shape[0]

    def F_at(self, x):
        """Jacobian of f at x (analytic when supplied)."""
        if self.jac_f is not None:
            return np.atleast_2d(np.asarray(self.jac_f(x), dtype=float))
        return numeric_jacobian(self.f, x)

    def H_at(self, x):
        """Jacobian of h at x (analytic when supplied)."""
        if self.jac_h is not None:
            return np.atleast_2d(np.asarray(self.jac_h(x), dtype=float))
        return numeric_jacobian(self.h, x)

    def innovation(self, y, x):
        """y - h(x), through ``residual`` when one is configured."""
        y = np.asarray(y, dtype=float).ravel()
        pred = np.asarray(self.h(x), dtype=float).ravel()
        if self.residual is not None:
            return np.asarray(self.residual(y, pred), dtype=float).ravel()
        return y - pred


def check_jacobians(model, probes, rtol=1e-4):
    """Compare analytic Jacobians with numeric ones at probe points.

    Args:
        model: NonlinearModel.
        probes: Iterable of state vectors.
        rtol: Allowed relative deviation (scaled by max(1, |J|_max)).

    Raises:
        ValidationError: On the first mismatch.
    """
    for x in probes:
        x = np.asarray(x, dtype=float)
        for name, fn, jac in (("f", model.f, model.jac_f), ("h", model.h, model.jac_h)):
            if jac is None:
                continue
            analytic = np.atleast_2d(np.asarray(jac(x), dtype=float))
            numeric = numeric_jacobian(fn, x)
            scale = max(1.0, float(np.max(np.abs(numeric))))
            if analytic.shape != numeric.shape or np.max(np.abs(analytic - numeric)) > rtol * scale:
                raise ValidationError(f"analytic Jacobian of {name} disagrees with numeric at {x}")


@dataclass(frozen=True)
class NoiseSpec:
    """Finite Gaussian mixture for one noise channel.

    Attributes:
        components: Tuple of ``(weight, mean, variance)`` triples.
    """

    components: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        comps = tuple(tuple(float(v) for v in c) for c in self.components)
        if not comps:
            raise ValidationError("noise spec needs at least one component")
        for c in comps:
            if len(c) != 3:
                raise ValidationError("each component is (weight, mean, variance)")
            w, mu, var = c
            if not all(math.isfinite(v) for v in c):
                raise ValidationError("noise parameters must be finite")
            if w < 0 or var < 0:
                raise ValidationError("weights and variances must be nonnegative")
        total = sum(c[0] for c in comps)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"mixture weights sum to {total!r}, expected 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def gaussian(cls, variance, mean=0.0):
        return cls(((1.0, mean, variance),))

    @property
    def weights(self):
        return np.array([c[0] for c in self.components])

    @property
    def mean(self):
        return sum(w * mu for w, mu, _ in self.components)

    @property
    def variance(self):
        second = sum(w * (var + mu * mu) for w, mu, var in self.components)
        return second - self.mean**2

    def sample(self, rng, size=None, normal_rng=None):
        """Draw from the mixture: pick a component by weight, then a Gaussian.

        Args:
            rng: Generator used for the component choice.
            size: Output size; None returns a float.
            normal_rng: Optional separate generator for the Gaussian draws.
        """
        comps = self.components
        if len(comps) == 1:
            idx = np.zeros(() if size is None else size, dtype=int)
        else:
            idx = rng.choice(len(comps), size=size, p=self.weights)
        means = np.array([c[1] for c in comps])[idx]
        stds = np.sqrt(np.array([c[2] for c in comps]))[idx]
        z = (rng if normal_rng is None else normal_rng).standard_normal(size)
        out = means + stds * z
        return float(out) if size is None else out


NoiseArg = Union[NoiseSpec, Sequence[NoiseSpec]]


def sample_noise(spec, rng):
    """Draw one scalar from a NoiseSpec with a seeded generator."""
    if not isinstance(spec, NoiseSpec):
        raise ValidationError("spec must be a NoiseSpec")
    return spec.sample(rng)


def _channels(spec, count, name):
    if isinstance(spec, NoiseSpec):
        return [spec] * count
    specs = list(spec)
    if len(specs) != count or not all(isinstance(s, NoiseSpec) for s in specs):
        raise ValidationError(f"{name} needs one NoiseSpec or {count} of them")
    return specs


def _draw(specs, seeds, N):
    out = np.empty((N, len(specs)))
    for j, (spec, seq) in enumerate(zip(specs, seeds)):
        choice_rng, normal_rng = (np.random.default_rng(s) for s in seq.spawn(2))
        out[:, j] = spec.sample(choice_rng, N, normal_rng)
    return out


@dataclass(frozen=True)
class Trajectory:
    """Simulated states x(1..N) and measurements y(1..N)."""

    states: np.ndarray
    measurements: np.ndarray
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        meas = np.atleast_2d(np.asarray(self.measurements, dtype=float))
        if states.shape[0] != meas.shape[0]:
            raise ValidationError("states and measurements must have equal lengths")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "measurements", meas)

    def __len__(self):
        return self.states.shape[0]


def _simulate(step, measure, n, m, x0, N, q_spec, r_spec, seed):
    if int(N) != N or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    x = np.array(x0, dtype=float).ravel()
    if x.size != n:
        raise ValidationError(f"x0 has {x.size} entries, expected {n}")
    # one independent stream per channel: a shorter run is a prefix of a longer one
    seeds = np.random.SeedSequence(seed).spawn(n + m)
    q = _draw(_channels(q_spec, n, "q_spec"), seeds[:n], N)
    r = _draw(_channels(r_spec, m, "r_spec"), seeds[n:], N)
    states = np.empty((N, n))
    meas = np.empty((N, m))
    for k in range(N):
        x = step(x) + q[k]
        states[k] = x
        meas[k] = measure(x) + r[k]
    if not (np.all(np.isfinite(states)) and np.all(np.isfinite(meas))):
        raise NumericalError("simulation produced non-finite values")
    return Trajectory(states, meas, seed)


def simulate_linear(model, x0, N, q_spec, r_spec, seed=None):
    """Simulate a LinearModel for N steps.

    Each noise channel draws from its own generator spawned from ``seed``,
    so runs are reproducible and a shorter run is a prefix of a longer one.

    Args:
        model: LinearModel.
        x0: Initial state x(0).
        N: Number of steps.
        q_spec: NoiseSpec for every state channel, or one per channel.
        r_spec: NoiseSpec for every measurement channel, or one per channel.
        seed: Seed for ``numpy.random.default_rng``.

    Returns:
        Trajectory with x(1..N), y(1..N).
    """
    F, H = model.F, model.H
    return _simulate(lambda x: F @ x, lambda x: H @ x, model.n, model.m, x0, N, q_spec, r_spec, seed)


def simulate_nonlinear(model, x0, N, q_spec, r_spec, seed=None):
    """Simulate a NonlinearModel; same conventions as :func:`simulate_linear`."""

    def step(x):
        return np.asarray(model.f(x), dtype=float).ravel()

    def measure(x):
        return np.asarray(model.h(x), dtype=float).ravel()

    return _simulate(step, measure, model.n, model.m, x0, N, q_spec, r_spec, seed)


def numeric_jacobian(fn, x, h=None):
    """Central-difference Jacobian.

    Args:
        fn: Function R^n -> R^m.
        x: Evaluation point.
        h: Step; defaults to 1e-6 * max(1, |x|_inf).

    Returns:
        m x n matrix.

    Raises:
        NumericalError: If fn returns non-finite values.
    """
    x = np.asarray(x, dtype=float).ravel()
    if h is None:
        h = 1e-6 * max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    if not h > 0:
        raise ValidationError("step must be positive")
    cols = []
    for j in range(x.size):
        step = np.zeros_like(x)
        step[j] = h
        plus = np.atleast_1d(np.asarray(fn(x + step), dtype=float))
        minus = np.atleast_1d(np.asarray(fn(x - step), dtype=float))
        if not (np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
            raise NumericalError(f"function is not finite near {x}")
        cols.append((plus - minus) / (2.0 * h))
    return np.column_stack(cols)


def write_trajectory_csv(path, traj):
    """Write ``k,x1..xn,y1..ym`` rows with 17 significant digits."""
    n, m = traj.states.shape[1], traj.measurements.shape[1]
    header = ["k"] + [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(m)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k in range(len(traj)):
            row = np.concatenate([traj.states[k], traj.measurements[k]])
            writer.writerow([k + 1] + [format(v, ".17g") for v in row])


def read_trajectory_csv(path, seed=None):
    """Read a file written by :func:`write_trajectory_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "k":
            raise ValidationError(f"{path}: missing 'k' header")
        n = sum(1 for c in header if c.startswith("x"))
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    data = np.array(rows, dtype=float).reshape(len(rows), len(header) - 1)
    return Trajectory(data[:, :n], data[:, n:], seed)

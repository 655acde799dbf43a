import numpy as np
import pytest

from meekf.filters import PriorState
from meekf.mee_core import _backend, build_augmented, kernel, laplacian, solver


def available_backends():
    names = ["python"]
    try:
        _backend.get_kernels("cython")
    except ImportError:
        pass
    else:
        names.append("cython")
    return names


@pytest.fixture(params=available_backends())
def backend(request, monkeypatch):
    """Route every kernel call through one backend for the test."""
    mod = _backend.get_kernels(request.param)
    for target in (solver, laplacian, kernel):
        monkeypatch.setattr(target, "kernels", mod)
    return request.param


def random_augmented(rng, n, m, spread=1.0):
    """A well-conditioned random augmented system."""
    a = rng.normal(size=(n, n))
    p = a @ a.T + n * np.eye(n)
    b = rng.normal(size=(m, m))
    r = b @ b.T + m * np.eye(m)
    prior = PriorState(spread * rng.normal(size=n), p)
    H = rng.normal(size=(m, n))
    y = H @ prior.x_prior + spread * rng.normal(size=m)
    return build_augmented(prior, H, r, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# lines collected by tests/test_acceptance.py and printed at the end
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

"""Closed-form floating point operation counts per filter step.

Big-O terms of the published counts are expanded as their leading
monomial with unit constant, so the numbers are for relative comparison
only.
"""

from ..errors import ValidationError


def _check(**values):
    for name, v in values.items():
        if isinstance(v, bool) or int(v) != v or v < 1:
            raise ValidationError(f"{name} must be a positive integer, got {v!r}")
    return tuple(int(v) for v in values.values())


def kf_flops(n, m):
    n, m = _check(n=n, m=m)
    return 8 * n**3 + 10 * n**2 * m - n**2 + 6 * n * m**2 - n + m**3


def mckf_flops(n, m, T):
    n, m, T = _check(n=n, m=m, T=T)
    return (
        (2 * T + 8) * n**3 + (4 * T + 6) * n**2 * m + (2 * T - 1) * n**2
        + (4 * T + 2) * n * m**2 + (3 * T - 1) * n * m + (4 * T - 1) * n
        + 2 * T * m**3 + 2 * T * m
        + T * n**3 + 2 * T * m**3  # O(T n^3) + O(2 T m^3)
    )


def meekf_flops(n, m, T):
    n, m, T = _check(n=n, m=m, T=T)
    return (
        (7 * T + 8) * n**3 + 7 * T * m**3 + (19 * T + 6) * n**2 * m - n**2
        + (15 * T + 2) * n * m**2 + T * n**3 + T * m * n + T * m
        + (5 * T - 1) * n + (7 * T - 1) * n * m + T * m**2
        + 2 * T * m**3  # O(2 T m^3)
    )


def complexity_estimate(n, m, T):
    """Return (C_KF, C_MCKF, C_MEEKF) for state size n, measurement size m
    and T fixed-point iterations."""
    return kf_flops(n, m), mckf_flops(n, m, T), meekf_flops(n, m, T)

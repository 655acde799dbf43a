"""Select the kernel implementation at import time.

The compiled extension is preferred. Setting the environment variable
``MEEKF_BACKEND=python`` forces the numpy fallback, which is also used
whenever the extension failed to build.
"""

import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("MEEKF_BACKEND", "").strip().lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def get_kernels(name=None):
    """Return a kernel module by name, or the active one.

    Args:
        name: ``"cython"``, ``"python"`` or None for the active backend.

    Returns:
        A module exposing ``information_potential``, ``gaussian_laplacian``
        and ``solve_fixed_point``.
    """
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels as compiled

        return compiled
    raise ValueError(f"unknown backend {name!r}")

"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set ``CDK_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("CDK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def use_backend(name):
    """Switch the active backend (``"cython"`` or ``"python"``); returns the previous name."""
    global _impl, BACKEND
    prev = BACKEND
    if name == "python":
        _impl, BACKEND = _kernels_py, "python"
    elif name == "cython":
        from . import _kernels as compiled

        _impl, BACKEND = compiled, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev


def jacobi_eigh(m, tol=1e-15, max_sweeps=100):
    return _impl.jacobi_eigh(np.ascontiguousarray(m, dtype=np.float64), tol, max_sweeps)


def cholesky(m):
    return _impl.cholesky(np.ascontiguousarray(m, dtype=np.float64))


def cho_solve(l, b):
    b = np.asarray(b, dtype=np.float64)
    vec = b.ndim == 1
    rhs = np.ascontiguousarray(b[:, None] if vec else b)
    x = _impl.cho_solve(np.ascontiguousarray(l, dtype=np.float64), rhs)
    return x[:, 0] if vec else x


def brute_force_binary(q, f, spins, tie_tol=1e-12):
    return _impl.brute_force_binary(
        np.ascontiguousarray(q, dtype=np.float64),
        np.ascontiguousarray(f, dtype=np.float64),
        bool(spins),
        tie_tol,
    )

"""Independent reference solvers used to check the canonical solvers."""
from __future__ import annotations

import math

import numpy as np

from .. import kernels
from ..errors import InvalidInput, Refused

MAX_ENUM = 24


def brute_force_binary(Q, f, domain="01"):
    """Exhaustive minimum of ``1/2 x'Qx - f'x`` over ``{0,1}^n`` or ``{-1,1}^n``.

    Ties within ``1e-12`` (relative) go to the lexicographically smallest
    vector, with 0 (or -1) ordered before 1.
    """
    Q = np.asarray(Q, dtype=float)
    f = np.asarray(f, dtype=float).reshape(-1)
    n = f.shape[0]
    if Q.shape != (n, n):
        raise InvalidInput("Q and f dimensions disagree")
    if domain not in ("01", "pm1"):
        raise InvalidInput(f"unknown binary domain {domain!r}")
    if n > MAX_ENUM:
        raise Refused(f"enumeration of 2^{n} points refused (limit 2^{MAX_ENUM})")
    code, value = kernels.brute_force_binary(0.5 * (Q + Q.T), f, domain == "pm1")
    bits = np.array([(code >> (n - 1 - i)) & 1 for i in range(n)], dtype=float)
    x = bits if domain == "01" else 2.0 * bits - 1.0
    return x, float(value)


def grid_minimize_1d(fun, lo, hi, points=200001, refine=True):
    """Dense grid search followed by golden-section refinement of the best cell."""
    xs = np.linspace(lo, hi, points)
    vals = np.array([fun(x) for x in xs]) if not hasattr(fun, "vectorized") else fun(xs)
    i = int(np.argmin(vals))
    if not refine:
        return float(xs[i]), float(vals[i])
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, points - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    for _ in range(200):
        if fun(c) < fun(d):
            b = d
        else:
            a = c
        c, d = b - g * (b - a), a + g * (b - a)
    x = 0.5 * (a + b)
    return float(x), float(fun(x))


def multistart_descent(fun, grad, starts, tol=1e-13):
    """Best local minimum of a smooth function from the given starts (BFGS)."""
    from scipy.optimize import minimize

    best = None
    for x0 in starts:
        res = minimize(fun, np.asarray(x0, dtype=float), jac=grad, method="BFGS",
                       options={"gtol": tol, "maxiter": 10000})
        if best is None or res.fun < best[1]:
            best = (res.x, float(res.fun))
    return best

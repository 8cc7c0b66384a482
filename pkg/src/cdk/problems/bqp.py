"""Quadratic minimization over ``{0,1}^n``: ``min 1/2 x'Qx - f'x``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..core import CanonicalFunction, QuadraticCanonicalProblem, verify_solution
from ..errors import DimensionMismatch, InvalidInput, SingularQ
from ..linalg import as_symmetric, default_eps_pd
from .oracles import MAX_ENUM, brute_force_binary

ORACLE_LIMIT = 20


@dataclass(frozen=True)
class BooleanQPSpec:
    Q: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        Q = as_symmetric(self.Q, "Q")
        f = np.asarray(self.f, dtype=float).reshape(-1)
        if f.shape[0] != Q.shape[0]:
            raise DimensionMismatch("Q and f dimensions disagree")
        if not np.all(np.isfinite(f)):
            raise InvalidInput("f has non-finite entries")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "f", f)

    @property
    def n(self):
        return self.f.shape[0]

    def energy(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x - self.f @ x)


def random_bqp(n, seed, f_scale=1.0):
    """Seeded instance with standard normal symmetric ``Q`` and ``f``."""
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    Q = 0.5 * (B + B.T)
    f = f_scale * rng.standard_normal(n)
    return BooleanQPSpec(Q, f)


def build_boolean_qp(spec: BooleanQPSpec) -> QuadraticCanonicalProblem:
    """Measures ``xi_k = x_k^2 - x_k`` under the zero indicator; ``A = Q``."""
    n = spec.n
    H = np.zeros((n, n, n))
    H[np.arange(n), np.arange(n), np.arange(n)] = 2.0
    return QuadraticCanonicalProblem(
        A=spec.Q,
        f=spec.f,
        H=H,
        b=-np.eye(n),
        c=np.zeros(n),
        phi=CanonicalFunction.zero_indicator(n),
        name="boolean_qp",
        provenance={"family": "boolean_qp", "n": n},
        integrality="01",
    )


def bqp_big_input_rule(spec: BooleanQPSpec):
    """Sign pattern of ``f`` when every ``|f_i|`` exceeds the row sum ``sum_j |Q_ij|``.

    Under that test each coordinate's best value is independent of the
    others, so the pattern is the exact minimizer. Returns None otherwise.
    """
    row = np.abs(spec.Q).sum(axis=1)
    if np.all(np.abs(spec.f) > row):
        return (spec.f > 0).astype(float)
    return None


def second_dual_value(Q, f, sigma):
    """``-1/2 s'Q^{-1}s - sum |f_i - s_i|`` evaluated literally."""
    Q = np.asarray(Q, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    return float(-0.5 * sigma @ np.linalg.solve(Q, sigma) - np.abs(np.asarray(f) - sigma).sum())


def _spin_form(spec):
    """Equivalent problem over ``y in {-1,1}^n`` with ``x = (1+y)/2``, shifted so ``Q_y < 0``.

    ``1/2 x'Qx - f'x = 1/2 y'Q_y y - f_y'y + const``; subtracting ``tau I``
    from ``Q_y`` changes the energy by the constant ``tau n / 2`` on spins.
    """
    Qy = spec.Q / 4.0
    fy = spec.f / 2.0 - spec.Q.sum(axis=1) / 4.0
    values, _, _ = kernels.jacobi_eigh(Qy)
    tau = max(float(values[-1]), 0.0) + 1.0 + float(np.abs(Qy).sum(axis=1).max())
    return Qy - tau * np.eye(spec.n), fy


def solve_bqp_second_dual(spec: BooleanQPSpec, opts=None, starts=None, max_iter=500, seed=0):
    """Minimize the second canonical dual by proximal gradient with multistart.

    The smooth part ``-1/2 s'P s`` (``P = Q_y^{-1}``, negative definite, so
    the part is convex) takes gradient steps; the concave ``-|f - s|`` term
    is handled exactly by its proximal map, which pushes each coordinate
    away from ``f_i`` by the step length. A candidate is read off as
    ``x_i = 1`` when ``f_i - s_i > 0``.
    """
    values, _, _ = kernels.jacobi_eigh(spec.Q)
    if np.min(np.abs(values)) <= default_eps_pd(spec.Q):
        raise SingularQ("Q is singular")
    Qs, fy = _spin_form(spec)
    P = np.linalg.inv(Qs)
    P = 0.5 * (P + P.T)
    lip = float(np.abs(np.linalg.eigvalsh(P)).max())
    t = 1.0 / lip
    n = spec.n
    rng = np.random.default_rng(seed)
    if starts is None:
        starts = [fy.copy(), np.zeros(n)] + [Qs @ rng.choice([-1.0, 1.0], n) for _ in range(max(8, n))]

    def g_obj(s):
        return float(-0.5 * s @ P @ s - np.abs(fy - s).sum())

    best = None
    for s in starts:
        s = np.array(s, dtype=float)
        for _ in range(max_iter):
            v = s + t * (P @ s)
            side = np.where(v - fy >= 0, 1.0, -1.0)
            s_new = v + t * side
            if np.max(np.abs(s_new - s)) <= 1e-13 * (1 + np.abs(s).max()):
                s = s_new
                break
            s = s_new
        y = np.where(fy - s > 0, 1.0, -1.0)
        val = g_obj(s)
        key = (spec.energy((1 + y) / 2), val)
        if best is None or key < best[0]:
            best = (key, s, y)
    _, sigma, y = best
    x = (1.0 + y) / 2.0
    p = build_boolean_qp(spec)
    S = _vertex_multipliers(spec, x)
    verified = None
    oracle_value = None
    if n <= ORACLE_LIMIT:
        _, oracle_value = brute_force_binary(spec.Q, spec.f, "01")
        verified = bool(spec.energy(x) <= oracle_value + 1e-9 * (1 + abs(oracle_value)))
    return verify_solution(p, x, S, route="analytic", iterations=max_iter,
                           extra={"method": "second_dual", "sigma_g": sigma,
                                  "second_dual_value": g_obj(sigma), "oracle_verified": verified,
                                  "oracle_value": oracle_value})


def _vertex_multipliers(spec, x):
    """Indicator multipliers at a vertex: ``(Q x - f)_i + sigma_i (2 x_i - 1) = 0``."""
    return -(spec.Q @ x - spec.f) / (2.0 * x - 1.0)

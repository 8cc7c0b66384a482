"""Double-well energy ``1/2 alpha (1/2 |x|^2 - lambda)^2 - f'x``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..core import CanonicalFunction, QuadraticCanonicalProblem, TrialityKind
from ..errors import InvalidInput
from ..linalg import real_cubic_roots


@dataclass(frozen=True)
class DoubleWellSpec:
    n: int
    alpha: float
    lam: float
    f: tuple

    def __post_init__(self):
        f = tuple(float(v) for v in np.atleast_1d(np.asarray(self.f, dtype=float)))
        if len(f) == 1 and self.n > 1 and f[0] == 0.0:
            f = (0.0,) * self.n
        object.__setattr__(self, "f", f)
        if self.n < 1 or len(f) != self.n:
            raise InvalidInput("f must have length n >= 1")
        if not self.alpha > 0:
            raise InvalidInput("alpha must be positive")
        if not all(math.isfinite(v) for v in (self.alpha, self.lam, *f)):
            raise InvalidInput("double-well parameters must be finite")


def build_double_well(spec: DoubleWellSpec) -> QuadraticCanonicalProblem:
    n = spec.n
    return QuadraticCanonicalProblem(
        A=np.zeros((n, n)),
        f=np.array(spec.f),
        H=np.eye(n)[None],
        b=np.zeros((1, n)),
        c=np.array([-spec.lam]),
        phi=CanonicalFunction.shifted_quadratic([spec.alpha]),
        name="double_well",
        provenance={"family": "double_well", "n": n, "alpha": spec.alpha, "lam": spec.lam},
    )


def double_well_energy(spec: DoubleWellSpec, x) -> float:
    """Direct formula, independent of the canonical engine."""
    x = np.asarray(x, dtype=float)
    return 0.5 * spec.alpha * (0.5 * x @ x - spec.lam) ** 2 - np.asarray(spec.f) @ x


class DoubleWellPoint(NamedTuple):
    sigma: float
    x: np.ndarray
    pi: float
    pi_dual: float
    kind: TrialityKind


class DoubleWellSolution(NamedTuple):
    points: list  # ordered by sigma descending
    symmetric: bool
    minimizer_radius: float | None  # |x| on the minimizer manifold when f = 0


def _dual_value(spec, s, ff):
    return -ff / (2.0 * s) - s * s / (2.0 * spec.alpha) - spec.lam * s


def solve_double_well_analytic(spec: DoubleWellSpec) -> DoubleWellSolution:
    """All stationary points from the cubic ``2 s^3/alpha + 2 lam s^2 - |f|^2 = 0``.

    Positive roots give the global minimizer. Among negative roots the
    smallest is the local maximizer and the other the local minimizer
    (strong only in one dimension). For ``f = 0`` the only nonzero root is
    ``-alpha lam`` and the minimizers form the sphere ``|x|^2 = 2 lam``.
    """
    f = np.asarray(spec.f)
    ff = float(f @ f)
    if ff == 0.0:
        s3 = -spec.alpha * spec.lam
        pts = []
        if s3 != 0.0:
            pi = 0.5 * spec.alpha * spec.lam ** 2
            pts.append(DoubleWellPoint(s3, np.zeros(spec.n), pi, -s3 * s3 / (2 * spec.alpha) - spec.lam * s3,
                                       TrialityKind.LOCAL_MAX))
        radius = math.sqrt(2.0 * spec.lam) if spec.lam > 0 else 0.0
        return DoubleWellSolution(pts, True, radius)
    roots = real_cubic_roots(2.0 / spec.alpha, 2.0 * spec.lam, 0.0, -ff)
    sigmas = sorted((r.value for r in roots), reverse=True)
    points = []
    negatives = [s for s in sigmas if s < 0]
    for s in sigmas:
        x = f / s
        if s > 0:
            kind = TrialityKind.GLOBAL_MIN
        elif s == min(negatives) and len(negatives) > 1:
            kind = TrialityKind.LOCAL_MAX
        elif len(negatives) > 1:
            kind = TrialityKind.LOCAL_MIN_CANDIDATE if spec.n == 1 else TrialityKind.LOCAL_MIN_WEAK
        else:
            kind = TrialityKind.LOCAL_MAX
        points.append(DoubleWellPoint(s, x, double_well_energy(spec, x), _dual_value(spec, s, ff), kind))
    return DoubleWellSolution(points, False, None)

"""Dense symmetric linear algebra and cubic root finding.

All routines take plain numpy arrays. Symmetric inputs are checked and
symmetrized on entry so that stored matrices are exactly symmetric.
"""
from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DegenerateLeadingCoefficient, InvalidInput, NotPositiveDefinite


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


class DefinitenessKind(enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    POSITIVE_SEMIDEFINITE_SINGULAR = "PositiveSemidefiniteSingular"
    INDEFINITE = "Indefinite"
    NEGATIVE_SEMIDEFINITE_SINGULAR = "NegativeSemidefiniteSingular"
    NEGATIVE_DEFINITE = "NegativeDefinite"

    def mirrored(self):
        return _MIRROR[self]


_MIRROR = {
    DefinitenessKind.POSITIVE_DEFINITE: DefinitenessKind.NEGATIVE_DEFINITE,
    DefinitenessKind.NEGATIVE_DEFINITE: DefinitenessKind.POSITIVE_DEFINITE,
    DefinitenessKind.POSITIVE_SEMIDEFINITE_SINGULAR: DefinitenessKind.NEGATIVE_SEMIDEFINITE_SINGULAR,
    DefinitenessKind.NEGATIVE_SEMIDEFINITE_SINGULAR: DefinitenessKind.POSITIVE_SEMIDEFINITE_SINGULAR,
    DefinitenessKind.INDEFINITE: DefinitenessKind.INDEFINITE,
}


class Definiteness(NamedTuple):
    kind: DefinitenessKind
    margin: float

    @property
    def singular(self) -> bool:
        return self.kind in (
            DefinitenessKind.POSITIVE_SEMIDEFINITE_SINGULAR,
            DefinitenessKind.NEGATIVE_SEMIDEFINITE_SINGULAR,
        )


class Root(NamedTuple):
    value: float
    multiplicity: int


def as_symmetric(m, name="matrix") -> np.ndarray:
    """Validate a square finite matrix and return its exact symmetric part."""
    a = np.array(m, dtype=np.float64, ndmin=2)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise InvalidInput(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite entries")
    scale = np.abs(a).max()
    if np.abs(a - a.T).max() > 1e-10 * (1.0 + scale):
        raise InvalidInput(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


def default_eps_pd(m) -> float:
    return 1e-8 * (1.0 + float(np.abs(m).sum(axis=1).max()))


def sym_eigen(m) -> EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors by cyclic Jacobi."""
    a = as_symmetric(m)
    values, vectors, _ = kernels.jacobi_eigh(a)
    return EigenDecomposition(values, vectors)


def classify_values(values, eps_pd: float) -> Definiteness:
    lo, hi = float(values[0]), float(values[-1])
    if lo > eps_pd:
        return Definiteness(DefinitenessKind.POSITIVE_DEFINITE, lo)
    if hi < -eps_pd:
        return Definiteness(DefinitenessKind.NEGATIVE_DEFINITE, hi)
    small = float(np.min(np.abs(values)))
    if lo >= -eps_pd:
        return Definiteness(DefinitenessKind.POSITIVE_SEMIDEFINITE_SINGULAR, small)
    if hi <= eps_pd:
        return Definiteness(DefinitenessKind.NEGATIVE_SEMIDEFINITE_SINGULAR, small)
    return Definiteness(DefinitenessKind.INDEFINITE, small)


def classify_definiteness(m, eps_pd: float | None = None) -> Definiteness:
    """Classify a symmetric matrix by the signs of its eigenvalues.

    ``margin`` is the smallest eigenvalue for the positive definite case,
    the largest for the negative definite case, and the smallest eigenvalue
    magnitude otherwise.
    """
    a = as_symmetric(m)
    if eps_pd is None:
        eps_pd = default_eps_pd(a)
    if not eps_pd > 0:
        raise InvalidInput("eps_pd must be positive")
    values, _, _ = kernels.jacobi_eigh(a)
    return classify_values(values, eps_pd)


def cholesky(m) -> np.ndarray:
    a = as_symmetric(m)
    l = kernels.cholesky(a)
    if l is None:
        raise NotPositiveDefinite("Cholesky pivot is not positive")
    return l


def is_positive_definite(m) -> bool:
    return kernels.cholesky(np.asarray(m, dtype=np.float64)) is not None


def solve_spd(m, b) -> np.ndarray:
    """Solve ``M x = b`` for symmetric positive definite ``M`` via Cholesky."""
    l = cholesky(m)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != l.shape[0]:
        raise InvalidInput("right-hand side has wrong length")
    return kernels.cho_solve(l, b)


def pinv_apply(m, b, eps_rank: float | None = None) -> np.ndarray:
    """Apply the eigenvalue-thresholded pseudo-inverse of ``M`` to ``b``."""
    values, vectors = sym_eigen(m)
    b = np.asarray(b, dtype=np.float64)
    if eps_rank is None:
        eps_rank = 1e-10 * float(np.max(np.abs(values)))
    keep = np.abs(values) > eps_rank
    if not np.any(keep):
        return np.zeros_like(b)
    coef = (vectors[:, keep].T @ b) / values[keep]
    return vectors[:, keep] @ coef


def _cubic_eval(c, x):
    a3, a2, a1, a0 = c
    return ((a3 * x + a2) * x + a1) * x + a0


def _newton_polish(c, x, steps=2):
    a3, a2, a1, _ = c
    for _ in range(steps):
        d = (3.0 * a3 * x + 2.0 * a2) * x + a1
        if d == 0.0:
            break
        nx = x - _cubic_eval(c, x) / d
        if abs(_cubic_eval(c, nx)) <= abs(_cubic_eval(c, x)):
            x = nx
    return x


def real_cubic_roots(a3, a2, a1, a0, rel_tol: float = 1e-12) -> list[Root]:
    """Real roots of ``a3 x^3 + a2 x^2 + a1 x + a0`` in ascending order.

    Cardano's formula with the trigonometric form for three real roots.
    Repeated roots are returned once with their multiplicity; simple roots
    get two Newton polishing steps.
    """
    if a3 == 0:
        raise DegenerateLeadingCoefficient("leading coefficient is zero")
    coeffs = (float(a3), float(a2), float(a1), float(a0))
    a, b, c = a2 / a3, a1 / a3, a0 / a3
    rs = max(abs(a), math.sqrt(abs(b)), abs(c) ** (1.0 / 3.0))
    if rs == 0.0:
        return [Root(0.0, 3)]
    # work with y = x / rs so that the discriminant cannot underflow
    roots = _monic_roots(a / rs, b / rs / rs, c / rs / rs / rs, rel_tol)
    out = []
    for r in roots:
        x = r.value * rs
        out.append(Root(_newton_polish(coeffs, x) if r.multiplicity == 1 else x, r.multiplicity))
    return sorted(out, key=lambda r: r.value)


def _monic_roots(a, b, c, rel_tol):
    coeffs = (1.0, a, b, c)
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    # disc > 0: three distinct real roots
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    disc_scale = 4.0 * abs(p) ** 3 + 27.0 * q * q

    if abs(p) <= rel_tol and abs(q) <= rel_tol:
        return [Root(-shift, 3)]
    if abs(disc) <= 1e3 * rel_tol * disc_scale:
        simple = 3.0 * q / p - shift
        double = -1.5 * q / p - shift
        simple = _newton_polish(coeffs, simple)
        roots = [Root(simple, 1), Root(double, 2)]
        return sorted(roots, key=lambda r: r.value)
    if disc > 0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q) / (2.0 * p) * math.sqrt(-3.0 / p)
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        ts = [r * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
        xs = sorted(_newton_polish(coeffs, t - shift) for t in ts)
        return [Root(x, 1) for x in xs]
    sq = math.sqrt(q * q / 4.0 + p ** 3 / 27.0)
    u = -q / 2.0 + sq if q < 0 else -q / 2.0 - sq
    u = math.copysign(abs(u) ** (1.0 / 3.0), u)
    t = u - p / (3.0 * u) if u != 0.0 else 0.0
    return [Root(_newton_polish(coeffs, t - shift), 1)]

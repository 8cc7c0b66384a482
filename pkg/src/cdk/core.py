"""Canonical-duality engine for problems with quadratic canonical measures.

A problem is the tuple ``(A, f, {H_k, b_k, c_k}, Phi)`` with primal energy

    Pi(chi) = sum_k Phi_k(xi_k(chi)) + 1/2 chi'A chi - f'chi,
    xi_k(chi) = 1/2 chi'H_k chi + b_k'chi + c_k.

Each ``Phi_k`` is either ``1/2 a_k xi^2`` (``a_k > 0``) or the indicator of
``xi = 0``. For a dual point ``S`` the total complementary function is

    Xi(chi, S) = 1/2 chi'G(S) chi - chi'F(S) + sum_k S_k c_k - Phi*(S),
    G(S) = A + sum_k S_k H_k,   F(S) = f - sum_k S_k b_k,

and the canonical dual is ``Pi^d(S) = -1/2 F'G^{-1}F + sum_k S_k c_k - Phi*(S)``.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import BoundaryError, DimensionMismatch, DomainError, InvalidInput
from .linalg import (
    Definiteness,
    DefinitenessKind,
    as_symmetric,
    classify_values,
    default_eps_pd,
)

# indicator components count as satisfied when |xi_k| <= this
FEAS_TOL = 1e-6
# |sigma_k| below this marks the excluded sigma = 0 face of an indicator dual
EPS_SIGMA = 1e-10


@dataclass(frozen=True)
class CanonicalMeasure:
    H: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __call__(self, chi):
        chi = np.asarray(chi, dtype=float)
        return 0.5 * chi @ self.H @ chi + self.b @ chi + self.c


@dataclass(frozen=True)
class CanonicalFunction:
    """Separable convex canonical function.

    ``weights[k]`` is ``a_k`` of ``Phi_k(xi) = a_k xi^2 / 2``; components with
    ``indicator[k]`` set are the zero indicator instead and ignore the weight.
    """

    weights: np.ndarray
    indicator: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        ind = np.asarray(self.indicator, dtype=bool).reshape(-1)
        if w.shape != ind.shape:
            raise InvalidInput("weights and indicator mask differ in length")
        if np.any(~ind & ~(w > 0)):
            raise InvalidInput("shifted-quadratic weights must be positive")
        object.__setattr__(self, "weights", np.where(ind, 1.0, w))
        object.__setattr__(self, "indicator", ind)

    @classmethod
    def shifted_quadratic(cls, weights):
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        return cls(w, np.zeros(w.shape, dtype=bool))

    @classmethod
    def zero_indicator(cls, m):
        return cls(np.ones(m), np.ones(m, dtype=bool))

    @property
    def m(self):
        return self.weights.shape[0]

    @property
    def kind(self):
        if self.m and self.indicator.all():
            return "zero_indicator"
        if not self.indicator.any():
            return "shifted_quadratic"
        return "mixed"

    def value(self, xi, feas_tol=FEAS_TOL):
        xi = np.asarray(xi, dtype=float)
        if np.any(np.abs(xi[self.indicator]) > feas_tol):
            return math.inf
        q = ~self.indicator
        return float(0.5 * np.sum(self.weights[q] * xi[q] ** 2))

    def grad(self, xi):
        """Duality map ``dPhi/dxi`` on quadratic components (zero elsewhere)."""
        return np.where(self.indicator, 0.0, self.weights * np.asarray(xi, dtype=float))

    def conjugate(self, s):
        s = np.asarray(s, dtype=float)
        q = ~self.indicator
        return float(0.5 * np.sum(s[q] ** 2 / self.weights[q]))

    def conjugate_grad(self, s):
        return np.where(self.indicator, 0.0, np.asarray(s, dtype=float) / self.weights)

    def conjugate_hess_diag(self):
        return np.where(self.indicator, 0.0, 1.0 / self.weights)


class GOperator(NamedTuple):
    G: np.ndarray
    F: np.ndarray
    const: float


@dataclass(frozen=True)
class QuadraticCanonicalProblem:
    """Problem data with measures stacked as ``H (m,n,n)``, ``b (m,n)``, ``c (m,)``.

    ``integrality`` names the discrete set encoded by indicator measures
    (``"01"`` or ``"pm1"``) so solvers can round relaxed iterates.
    """

    A: np.ndarray
    f: np.ndarray
    H: np.ndarray
    b: np.ndarray
    c: np.ndarray
    phi: CanonicalFunction
    name: str = ""
    provenance: dict = field(default_factory=dict)
    integrality: str | None = None
    initial_guesses: tuple = ()

    def __post_init__(self):
        A = as_symmetric(self.A, "A")
        n = A.shape[0]
        f = np.asarray(self.f, dtype=float).reshape(-1)
        H = np.asarray(self.H, dtype=float).reshape(-1, n, n)
        m = H.shape[0]
        b = np.asarray(self.b, dtype=float).reshape(m, n)
        c = np.asarray(self.c, dtype=float).reshape(m)
        if f.shape != (n,):
            raise DimensionMismatch(f"f has length {f.shape[0]}, expected {n}")
        if self.phi.m != m:
            raise DimensionMismatch(f"Phi has {self.phi.m} components for {m} measures")
        if m and np.abs(H - H.transpose(0, 2, 1)).max() > 1e-10 * (1 + np.abs(H).max()):
            raise InvalidInput("measure matrices must be symmetric")
        for name, arr in (("f", f), ("H", H), ("b", b), ("c", c)):
            if not np.all(np.isfinite(arr)):
                raise InvalidInput(f"{name} has non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "H", 0.5 * (H + H.transpose(0, 2, 1)))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "provenance", dict(self.provenance))
        object.__setattr__(self, "initial_guesses", tuple(np.asarray(g, dtype=float) for g in self.initial_guesses))

    @classmethod
    def from_measures(cls, A, f, measures: Sequence[CanonicalMeasure], phi, **kw):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n = A.shape[0]
        H = np.array([np.asarray(mm.H, dtype=float) for mm in measures]).reshape(-1, n, n)
        b = np.array([np.asarray(mm.b, dtype=float) for mm in measures]).reshape(-1, n)
        c = np.array([float(mm.c) for mm in measures])
        return cls(A, f, H, b, c, phi, **kw)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.H.shape[0]

    @property
    def measures(self):
        return [CanonicalMeasure(self.H[k], self.b[k], float(self.c[k])) for k in range(self.m)]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


class TrialityKind(enum.Enum):
    GLOBAL_MIN = "GlobalMin"
    LOCAL_MAX = "LocalMax"
    LOCAL_MIN_CANDIDATE = "LocalMinCandidate"
    LOCAL_MIN_WEAK = "LocalMinWeak"
    BOUNDARY = "Boundary"
    UNCLASSIFIED = "Unclassified"


class TrialityClass(NamedTuple):
    kind: TrialityKind
    margin: float


@dataclass(frozen=True)
class SolveReport:
    primal: np.ndarray
    dual: np.ndarray
    pi: float
    pi_dual: float
    xi: float
    gap: float
    primal_residual: float
    dual_residual: float
    triality: TrialityClass
    status: str = "converged"
    route: str = "analytic"
    iterations: int = 0
    trace: tuple = ()
    flags: frozenset = frozenset()
    branches: tuple = ()
    extra: dict = field(default_factory=dict)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def converged(self):
        return self.status == "converged"


def _vec(x, n, what="vector"):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != n:
        raise DimensionMismatch(f"{what} has length {x.shape[0]}, expected {n}")
    return x


def _H_times(p, chi):
    """Rows ``H_k chi``, shape ``(m, n)``."""
    return (p.H.reshape(p.m * p.n, p.n) @ chi).reshape(p.m, p.n)


def eval_measures(p: QuadraticCanonicalProblem, chi) -> np.ndarray:
    """Canonical measures ``xi_k(chi)``."""
    chi = _vec(chi, p.n, "chi")
    if p.m == 0:
        return np.zeros(0)
    return 0.5 * (_H_times(p, chi) @ chi) + p.b @ chi + p.c


def measure_jacobian(p: QuadraticCanonicalProblem, chi) -> np.ndarray:
    """Columns ``H_k chi + b_k``; shape ``(n, m)``."""
    chi = _vec(chi, p.n, "chi")
    return (_H_times(p, chi) + p.b).T


def eval_primal(p: QuadraticCanonicalProblem, chi, feas_tol=FEAS_TOL) -> float:
    chi = _vec(chi, p.n, "chi")
    xi = eval_measures(p, chi)
    return p.phi.value(xi, feas_tol) + 0.5 * chi @ p.A @ chi - p.f @ chi


def primal_gradient(p: QuadraticCanonicalProblem, chi, S=None) -> np.ndarray:
    """Gradient of Pi; indicator components use ``S`` as their multipliers."""
    chi = _vec(chi, p.n, "chi")
    xi = eval_measures(p, chi)
    mult = p.phi.grad(xi)
    if S is not None:
        mult = np.where(p.phi.indicator, _vec(S, p.m, "S"), mult)
    return p.A @ chi - p.f + measure_jacobian(p, chi) @ mult


def assemble_G(p: QuadraticCanonicalProblem, S) -> GOperator:
    S = _vec(S, p.m, "S")
    n = p.n
    G = p.A + (S @ p.H.reshape(p.m, n * n)).reshape(n, n) if p.m else p.A.copy()
    F = p.f - S @ p.b if p.m else p.f.copy()
    return GOperator(0.5 * (G + G.T), F, float(S @ p.c) if p.m else 0.0)


def _check_domain(S):
    if not np.all(np.isfinite(S)):
        raise DomainError("dual point has non-finite components")


def eval_total_complementary(p: QuadraticCanonicalProblem, chi, S) -> float:
    chi = _vec(chi, p.n, "chi")
    S = _vec(S, p.m, "S")
    _check_domain(S)
    G, F, const = assemble_G(p, S)
    return float(0.5 * chi @ G @ chi - chi @ F + const - p.phi.conjugate(S))


class _GSolve(NamedTuple):
    x: np.ndarray
    definiteness: Definiteness
    eig: Any  # (values, vectors) of G


def _spectral_apply(values, vectors, rhs, eps):
    keep = np.abs(values) > eps
    coef = vectors[:, keep].T @ rhs
    scale = values[keep] if rhs.ndim == 1 else values[keep][:, None]
    return vectors[:, keep] @ (coef / scale)


def _solve_G(G, rhs, eps_pd=None, allow_boundary=False) -> _GSolve:
    """Solve ``G x = rhs``; pseudo-inverse when singular and allowed."""
    if eps_pd is None:
        eps_pd = default_eps_pd(G)
    values, vectors, _ = kernels.jacobi_eigh(G)
    definiteness = classify_values(values, eps_pd)
    if definiteness.singular and not allow_boundary:
        raise BoundaryError(f"G(S) is singular (smallest |eigenvalue| {definiteness.margin:.3e})")
    eps = eps_pd if definiteness.singular else 0.0
    return _GSolve(_spectral_apply(values, vectors, rhs, eps), definiteness, (values, vectors))


def recover_primal(p: QuadraticCanonicalProblem, S, *, allow_boundary=False, eps_pd=None) -> np.ndarray:
    """Primal point ``G(S)^{-1} F(S)`` attached to a dual point."""
    G, F, _ = assemble_G(p, S)
    return _solve_G(G, F, eps_pd, allow_boundary).x


def eval_dual(p: QuadraticCanonicalProblem, S, *, allow_boundary=False, eps_pd=None) -> float:
    S = _vec(S, p.m, "S")
    _check_domain(S)
    G, F, const = assemble_G(p, S)
    chi = _solve_G(G, F, eps_pd, allow_boundary).x
    return float(-0.5 * F @ chi + const - p.phi.conjugate(S))


def dual_gradient(p: QuadraticCanonicalProblem, S, *, allow_boundary=False, eps_pd=None) -> np.ndarray:
    """Gradient of the canonical dual: ``xi(chi(S)) - dPhi*(S)``."""
    S = _vec(S, p.m, "S")
    chi = recover_primal(p, S, allow_boundary=allow_boundary, eps_pd=eps_pd)
    return eval_measures(p, chi) - p.phi.conjugate_grad(S)


class DualState(NamedTuple):
    """Everything the solvers need at one dual point."""

    S: np.ndarray
    G: np.ndarray
    F: np.ndarray
    chi: np.ndarray
    value: float
    grad: np.ndarray
    definiteness: Definiteness
    eig: Any


def dual_state(p: QuadraticCanonicalProblem, S, eps_pd=None, allow_boundary=False) -> DualState:
    S = _vec(S, p.m, "S")
    G, F, const = assemble_G(p, S)
    sol = _solve_G(G, F, eps_pd, allow_boundary)
    chi = sol.x
    value = float(-0.5 * F @ chi + const - p.phi.conjugate(S))
    grad = eval_measures(p, chi) - p.phi.conjugate_grad(S)
    return DualState(S, G, F, chi, value, grad, sol.definiteness, sol.eig)


def dual_hessian(p: QuadraticCanonicalProblem, state: DualState) -> np.ndarray:
    """Hessian of Pi^d: ``-J' G^{-1} J - diag(d^2 Phi*)`` with ``J = [H_k chi + b_k]``."""
    J = measure_jacobian(p, state.chi)
    values, vectors = state.eig
    eps = default_eps_pd(state.G) if state.definiteness.singular else 0.0
    GJ = _spectral_apply(values, vectors, J, eps)
    Hd = -J.T @ GJ - np.diag(p.phi.conjugate_hess_diag())
    return 0.5 * (Hd + Hd.T)


def classify_triality(p: QuadraticCanonicalProblem, S, eps_pd=None) -> TrialityClass:
    """Triality class of a dual point from the definiteness of ``G(S)``.

    Inside the negative cone the branch is the double-max one when the
    canonical dual is locally concave at ``S``; otherwise it is the
    double-min branch, strong only when ``dim chi == dim S``.
    """
    S = _vec(S, p.m, "S")
    state = dual_state(p, S, eps_pd, allow_boundary=True)
    d = state.definiteness
    if d.kind is DefinitenessKind.POSITIVE_DEFINITE:
        return TrialityClass(TrialityKind.GLOBAL_MIN, d.margin)
    if d.singular:
        return TrialityClass(TrialityKind.BOUNDARY, d.margin)
    if d.kind is DefinitenessKind.INDEFINITE:
        return TrialityClass(TrialityKind.UNCLASSIFIED, d.margin)
    hd_values, _, _ = kernels.jacobi_eigh(dual_hessian(p, state))
    if hd_values[-1] < 0:
        return TrialityClass(TrialityKind.LOCAL_MAX, d.margin)
    if p.n == p.m:
        return TrialityClass(TrialityKind.LOCAL_MIN_CANDIDATE, d.margin)
    return TrialityClass(TrialityKind.LOCAL_MIN_WEAK, d.margin)


def multipliers_for(p: QuadraticCanonicalProblem, chi, S_hint=None) -> np.ndarray:
    """Dual point paired with a primal point.

    Quadratic components use the duality map ``a_k xi_k``; indicator
    components are fitted by least squares to ``G(S) chi = F(S)``.
    """
    chi = _vec(chi, p.n, "chi")
    xi = eval_measures(p, chi)
    S = p.phi.grad(xi)
    ind = p.phi.indicator
    if ind.any():
        J = measure_jacobian(p, chi)
        rhs = p.f - p.A @ chi - J[:, ~ind] @ S[~ind]
        sol, *_ = np.linalg.lstsq(J[:, ind], rhs, rcond=None)
        S = S.copy()
        S[ind] = sol
    return S


def verify_solution(p: QuadraticCanonicalProblem, chi, S, *, eps_pd=None, **report_fields) -> SolveReport:
    """Evaluate both sides of the duality at a primal-dual pair.

    The primal residual is the gradient of Pi (indicator components take
    ``S`` as multipliers) stacked with the indicator infeasibility.
    """
    chi = _vec(chi, p.n, "chi")
    S = _vec(S, p.m, "S")
    pi = eval_primal(p, chi)
    xi_val = eval_total_complementary(p, chi, S)
    triality = classify_triality(p, S, eps_pd) if p.m else _classify_no_measures(p, eps_pd)
    state = dual_state(p, S, eps_pd, allow_boundary=True)
    r = primal_gradient(p, chi, S)
    infeas = eval_measures(p, chi)[p.phi.indicator]
    primal_res = float(math.sqrt(r @ r + infeas @ infeas))
    gap = abs(pi - state.value) if math.isfinite(pi) else math.inf
    flags = set(report_fields.pop("flags", ()))
    if p.phi.indicator.any() and np.any(np.abs(S[p.phi.indicator]) < EPS_SIGMA):
        flags.add("SigmaZeroFace")
    return SolveReport(
        primal=chi,
        dual=S,
        pi=float(pi),
        pi_dual=state.value,
        xi=xi_val,
        gap=float(gap),
        primal_residual=primal_res,
        dual_residual=float(np.linalg.norm(state.grad)),
        triality=triality,
        flags=frozenset(flags),
        **report_fields,
    )


def _classify_no_measures(p, eps_pd=None):
    if eps_pd is None:
        eps_pd = default_eps_pd(p.A)
    values, _, _ = kernels.jacobi_eigh(p.A)
    d = classify_values(values, eps_pd)
    kind = {
        DefinitenessKind.POSITIVE_DEFINITE: TrialityKind.GLOBAL_MIN,
        DefinitenessKind.INDEFINITE: TrialityKind.UNCLASSIFIED,
    }.get(d.kind, TrialityKind.BOUNDARY if d.singular else TrialityKind.UNCLASSIFIED)
    return TrialityClass(kind, d.margin)

"""Numerical drivers for the canonical dual.

* ``maximize_dual_on_Splus``: damped Newton ascent of the concave dual over
  ``{S : G(S) > 0}`` with a log-det barrier guarding the cone boundary.
* ``find_stationary_in_Sminus``: Newton search for dual stationary points
  with ``G(S) < 0`` (the local extremum branches).
* ``perturbed_primal_dual``: proximal perturbation loop for cases where the
  dual has no interior stationary point.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .core import (
    EPS_SIGMA,
    QuadraticCanonicalProblem,
    SolveReport,
    TrialityClass,
    TrialityKind,
    assemble_G,
    dual_hessian,
    dual_state,
    eval_measures,
    measure_jacobian,
    multipliers_for,
    verify_solution,
)
from .errors import (
    BoundaryError,
    CDKError,
    LeftCone,
    MaxIterations,
    MaxOuterIterations,
    NoInteriorPoint,
)
from .linalg import default_eps_pd


@dataclass(frozen=True)
class SolverOptions:
    eps_pd: float | None = None  # default 1e-8 (1 + |G|_inf) per matrix
    eps_grad: float | None = None  # default 1e-8 (1 + |f|)
    max_iter: int = 300
    mu0: float = 1.0
    mu_shrink: float = 0.2
    backtrack: float = 0.5
    armijo: float = 1e-4
    n_starts: int = 8
    seed: int = 0
    polish: bool = True
    local_search: bool = True  # one-flip descent after rounding integer problems

    def __post_init__(self):
        for name in ("eps_pd", "eps_grad"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not (self.max_iter > 0 and self.mu0 > 0 and self.n_starts >= 0):
            raise ValueError("iteration counts and barrier weight must be positive")
        if not (0 < self.mu_shrink < 1 and 0 < self.backtrack < 1 and 0 < self.armijo < 0.5):
            raise ValueError("shrink, backtrack and Armijo factors must lie in (0, 1)")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def grad_tol(self, p):
        if self.eps_grad is not None:
            return self.eps_grad
        return 1e-8 * (1.0 + float(np.linalg.norm(p.f)))


@dataclass(frozen=True)
class PerturbationSchedule:
    delta0: float | None = None  # default 0.1, or 1 + |A|_inf for integer problems
    beta: float | Sequence[float] = 0.5
    omega: float | None = None  # default 1e-9 (1 + |Pi(chi_0)|)
    max_outer: int = 200
    delta_min: float = 1e-10
    direction: np.ndarray | None = None  # optional linear perturbation f_p
    magnitude: float = 0.0
    min_outer: int | None = None  # steps before the stopping rule applies; default 1, or 5 for integer problems

    def __post_init__(self):
        if self.delta0 is not None and not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if self.omega is not None and not self.omega > 0:
            raise ValueError("omega must be positive")
        betas = [self.beta] if np.isscalar(self.beta) else list(self.beta)
        if not betas or any(not 0 <= b <= 1 for b in betas):
            raise ValueError("beta values must lie in [0, 1]")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")

    def beta_at(self, k):
        if np.isscalar(self.beta):
            return float(self.beta)
        return float(self.beta[min(k - 1, len(self.beta) - 1)])

    def first_check(self, p):
        if self.min_outer is not None:
            return self.min_outer
        return 5 if p.integrality is not None else 1

    def start_delta(self, p):
        if self.delta0 is not None:
            return self.delta0
        if p.integrality is not None:
            return 1.0 + float(np.abs(p.A).sum(axis=1).max())
        return 0.1

    def delta_at(self, k, p):
        return max(self.start_delta(p) * 0.5 ** (k - 1), self.delta_min)


# ---------------------------------------------------------------------------
# helpers


def _eps_pd(opts, G):
    return opts.eps_pd if opts.eps_pd is not None else default_eps_pd(G)


def _in_plus(G, eps):
    return kernels.cholesky(G - eps * np.eye(G.shape[0])) is not None


def _in_minus(G, eps):
    return kernels.cholesky(-G - eps * np.eye(G.shape[0])) is not None


def _solve_sym(M, rhs, ridge=0.0):
    """Solve with a symmetric matrix through its eigendecomposition."""
    values, vectors, _ = kernels.jacobi_eigh(M)
    scale = max(float(np.abs(values).max()), 1e-300)
    keep = np.abs(values) > 1e-14 * scale
    if ridge:
        values = np.where(values > -ridge, -ridge, values)
        keep = np.ones_like(keep)
    return vectors[:, keep] @ ((vectors[:, keep].T @ rhs) / values[keep])


def _barrier_terms(p, state):
    """Gradient ``tr(G^-1 H_k)`` and Hessian ``-tr(G^-1 H_k G^-1 H_l)`` of log det G."""
    values, vectors = state.eig
    Ginv = (vectors / values) @ vectors.T
    m = p.m
    P = np.matmul(Ginv, p.H)
    g = p.H.reshape(m, -1) @ Ginv.reshape(-1)
    B = P.reshape(m, -1) @ P.transpose(0, 2, 1).reshape(m, -1).T
    return g, -0.5 * (B + B.T)


def _merit(p, chi):
    """Energy used by the outer stopping rule.

    Integer problems are scored at the rounded point (the indicator makes Pi
    infinite elsewhere); otherwise indicator components are dropped.
    """
    if p.integrality is not None:
        xr = round_integral(p, chi)
        return float(0.5 * xr @ p.A @ xr - p.f @ xr)
    xi = eval_measures(p, chi)
    q = ~p.phi.indicator
    return float(0.5 * np.sum(p.phi.weights[q] * xi[q] ** 2) + 0.5 * chi @ p.A @ chi - p.f @ chi)


def one_flip_descent(p, x):
    """Best-improvement single-coordinate flips on ``1/2 x'Ax - f'x`` over the integer set."""
    x = np.array(x, dtype=float)
    lo = 0.0 if p.integrality == "01" else -1.0
    other = lambda v: (1.0 + lo) - v  # maps each level to the other one
    diag = np.diag(p.A)
    scale = 1e-12 * (1.0 + np.abs(p.A).sum() + np.abs(p.f).sum())
    for _ in range(10 * p.n * p.n + 10):
        step = other(x) - x
        delta = step * (p.A @ x) + 0.5 * diag * step ** 2 - p.f * step
        i = int(np.argmin(delta))
        if delta[i] >= -scale:
            break
        x[i] += step[i]
    return x


def round_integral(p, chi):
    if p.integrality == "01":
        return (chi > 0.5).astype(float)
    if p.integrality == "pm1":
        return np.where(chi >= 0, 1.0, -1.0)
    return chi


def find_interior_start(p: QuadraticCanonicalProblem, opts: SolverOptions, sign=+1.0):
    """Dual point with ``sign * G(S)`` positive definite, searched along ``S = sign t 1``."""
    test = _in_plus if sign > 0 else _in_minus
    if p.m == 0:
        return np.zeros(0) if test(p.A, _eps_pd(opts, p.A)) else None
    ones = np.ones(p.m)
    t = 1.0
    for _ in range(80):
        S = sign * t * ones
        G = assemble_G(p, S).G
        if test(G, _eps_pd(opts, G)):
            return S
        t *= 2.0
    return None


# ---------------------------------------------------------------------------
# interior maximization


def maximize_dual_on_Splus(p: QuadraticCanonicalProblem, opts: SolverOptions | None = None, S0=None) -> SolveReport:
    """Maximize the canonical dual over the positive cone.

    Returns an interior report (GlobalMin) when a stationary point with
    ``G > 0`` is reached, or a Boundary report flagged
    ``NoInteriorStationaryPoint`` when the iterates run into the cone
    boundary with a non-vanishing gradient.
    """
    opts = opts or SolverOptions()
    eps_grad = opts.grad_tol(p)
    if S0 is not None:
        S0 = np.asarray(S0, dtype=float)
        G0 = assemble_G(p, S0).G
        if not _in_plus(G0, _eps_pd(opts, G0)):
            S0 = None
    if S0 is None:
        S0 = find_interior_start(p, opts)
    if S0 is None:
        raise NoInteriorPoint("no dual point with G(S) positive definite found")

    S = S0
    state = dual_state(p, S, opts.eps_pd)
    mu = opts.mu0 * (1.0 + abs(state.value)) / max(p.m, 1)
    mu_min = 1e-16 * (1.0 + abs(state.value))
    trace = [(0, state.value, float(np.linalg.norm(state.grad)))]
    it = 0
    stalled = retries = 0
    while it < opts.max_iter:
        gnorm = float(np.linalg.norm(state.grad))
        if gnorm <= eps_grad or p.m == 0:
            break
        Hd = dual_hessian(p, state)
        accepted = None
        # pure Newton first; barrier step when the cone cuts it short
        for use_mu in (0.0, mu):
            if use_mu:
                bg, bH = _barrier_terms(p, state)
                g = state.grad + use_mu * bg
                H = Hd + use_mu * bH
            else:
                g, H = state.grad, Hd
            d = -_solve_sym(H, g, ridge=1e-12 * (1.0 + np.abs(H).max()))
            if not g @ d > 0:
                d = g.copy()
            accepted = _cone_line_search(p, state, d, g, opts, use_mu, full_only=(use_mu == 0.0))
            if accepted is not None:
                break
        if accepted is None:
            # no admissible step even after shrinking the barrier: stuck at the cone boundary
            if mu > mu_min and retries < 6:
                mu *= opts.mu_shrink
                retries += 1
                continue
            break
        it += 1
        retries = 0
        new_state = accepted
        if new_state.value - state.value <= 1e-12 * (1.0 + abs(state.value)):
            stalled += 1
        else:
            stalled = 0
        state = new_state
        mu *= opts.mu_shrink
        trace.append((it, state.value, float(np.linalg.norm(state.grad))))
        if stalled >= 3:
            break

    gnorm = float(np.linalg.norm(state.grad))
    converged = gnorm <= eps_grad and state.definiteness.kind.value == "PositiveDefinite"
    if converged:
        chi = state.chi
        if p.integrality is not None and p.phi.indicator.any():
            chi = _snap_integral(p, chi)
        return verify_solution(p, chi, state.S, eps_pd=opts.eps_pd, route="interior", iterations=it,
                               trace=tuple(trace))
    margin = float(state.eig[0][0])
    near_boundary = margin <= 1e-4 * (1.0 + np.abs(state.G).sum(axis=1).max()) or stalled
    rep = _boundary_report(p, state.S, opts, it, trace)
    if near_boundary:
        return rep
    raise MaxIterations(f"interior dual ascent did not converge in {opts.max_iter} iterations", rep.replace(status="max_iter"))


def _snap_integral(p, chi):
    snapped = round_integral(p, chi)
    return snapped if np.max(np.abs(snapped - chi)) <= 1e-6 else chi


def complete_boundary_primal(p: QuadraticCanonicalProblem, S, opts: SolverOptions | None = None):
    """Primal point for a dual point on (or next to) the cone boundary.

    ``G(S) chi = F(S)`` leaves the near-null eigenvectors of ``G`` free; their
    coefficients are fitted so that ``xi(chi) = dPhi*(S)`` holds in the
    least-squares sense (the "hard case" of trust-region subproblems).
    """
    opts = opts or SolverOptions()
    G, F, _ = assemble_G(p, S)
    values, vectors, _ = kernels.jacobi_eigh(G)
    tol = max(_eps_pd(opts, G), 100.0 * float(np.min(np.abs(values))))
    null = np.abs(values) <= tol
    rng_keep = ~null
    x_p = vectors[:, rng_keep] @ ((vectors[:, rng_keep].T @ F) / values[rng_keep])
    if not null.any() or p.m == 0:
        return x_p
    V = vectors[:, null]
    target = p.phi.conjugate_grad(S)

    def res(t):
        return eval_measures(p, x_p + V @ t) - target

    def jac(t):
        return measure_jacobian(p, x_p + V @ t).T @ V

    best = (float(np.linalg.norm(res(np.zeros(V.shape[1])))), np.zeros(V.shape[1]))
    scale = 1.0 + float(np.max(np.abs(x_p)))
    for j in range(V.shape[1]):
        for sgn in (1.0, -1.0):
            t0 = np.zeros(V.shape[1])
            t0[j] = sgn * scale
            t, r = _levenberg_marquardt(res, jac, t0)
            if r < best[0] - 1e-14:
                best = (r, t)
    return x_p + V @ best[1]


def _levenberg_marquardt(res, jac, t, max_iter=100):
    r = res(t)
    cost = float(r @ r)
    lam = 1e-3
    for _ in range(max_iter):
        J = jac(t)
        g = J.T @ r
        if np.max(np.abs(g)) <= 1e-15 * (1.0 + cost):
            break
        JJ = J.T @ J
        while lam < 1e12:
            step = np.linalg.solve(JJ + lam * (np.diag(np.diag(JJ)) + 1e-12 * np.eye(len(t))), -g)
            tn = t + step
            rn = res(tn)
            cn = float(rn @ rn)
            if cn < cost:
                t, r, cost = tn, rn, cn
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
        else:
            break
        if np.max(np.abs(step)) <= 1e-15 * (1.0 + np.max(np.abs(t))):
            break
    return t, float(np.sqrt(cost))


def _boundary_report(p, S, opts, it, trace):
    chi = complete_boundary_primal(p, S, opts)
    rep = verify_solution(p, chi, S, eps_pd=opts.eps_pd, route="interior", iterations=it,
                          trace=tuple(trace), flags={"Boundary", "NoInteriorStationaryPoint"})
    return rep.replace(status="boundary", triality=TrialityClass(TrialityKind.BOUNDARY, rep.triality.margin))


def _step_to_boundary(p, state, d):
    """Largest ``a`` with ``G(S + a d)`` still positive semidefinite (inf if none)."""
    values, vectors = state.eig
    W = vectors / np.sqrt(values)
    D = np.tensordot(d, p.H, axes=1)
    rho = float(kernels.jacobi_eigh(-(W.T @ D @ W))[0][-1])
    return 1.0 / rho if rho > 0 else math.inf


def _cone_line_search(p, state, d, g, opts, mu, full_only=False):
    """Backtrack along ``d`` keeping ``G > 0`` and the dual value non-decreasing.

    The first trial is capped at 95% of the exact distance to the cone
    boundary; a pure Newton step (``full_only``) is refused when the cap or
    more than two halvings would cut it short.
    """
    base = state.value + (_logdet(state) * mu if mu else 0.0)
    slope = float(g @ d)
    a_max = _step_to_boundary(p, state, d)
    if full_only and a_max <= 1.0:
        return None
    if mu and float(state.grad @ d) < 0:
        # the barrier dominates: the dual value cannot increase along d
        return None
    alpha = min(1.0, 0.95 * a_max)
    for _ in range(60):
        S = state.S + alpha * d
        G = assemble_G(p, S).G
        if _in_plus(G, _eps_pd(opts, G)):
            try:
                new = dual_state(p, S, opts.eps_pd)
            except BoundaryError:
                new = None
            if new is not None and new.definiteness.kind.value == "PositiveDefinite":
                val = new.value + (_logdet(new) * mu if mu else 0.0)
                if new.value >= state.value - 1e-12 and val >= base + opts.armijo * alpha * slope:
                    return new
        if full_only and alpha < 0.25:
            return None
        alpha *= opts.backtrack
    return None


def _logdet(state):
    return float(np.sum(np.log(state.eig[0])))


# ---------------------------------------------------------------------------
# stationary points off the positive cone


def dual_newton(p: QuadraticCanonicalProblem, S0, opts: SolverOptions, cone: str = "nonsingular"):
    """Newton iteration on ``grad Pi^d = 0`` with ``|grad|`` as merit.

    ``cone`` is ``"minus"`` (keep ``G < 0``) or ``"nonsingular"``.
    Returns the final dual state, or None when the search stalls.
    """
    eps_grad = opts.grad_tol(p)
    try:
        state = dual_state(p, S0, opts.eps_pd)
    except BoundaryError:
        return None
    for _ in range(opts.max_iter):
        gnorm = float(np.linalg.norm(state.grad))
        if gnorm <= eps_grad:
            return state
        Hd = dual_hessian(p, state)
        d = -_solve_sym(Hd, state.grad)
        alpha = 1.0
        new = None
        for _ in range(50):
            S = state.S + alpha * d
            G = assemble_G(p, S).G
            ok = _in_minus(G, _eps_pd(opts, G)) if cone == "minus" else True
            if ok:
                try:
                    cand = dual_state(p, S, opts.eps_pd)
                except BoundaryError:
                    cand = None
                if cand is not None and np.linalg.norm(cand.grad) <= (1 - 1e-4 * alpha) * gnorm:
                    new = cand
                    break
            alpha *= opts.backtrack
        if new is None:
            return None
        state = new
    return state if np.linalg.norm(state.grad) <= eps_grad else None


def _dedupe_sorted(p, states, opts, route):
    found = []
    for st in states:
        if any(np.max(np.abs(st.S - o.S)) <= 1e-7 * (1.0 + np.max(np.abs(o.S))) for o in found):
            continue
        found.append(st)
    found.sort(key=lambda st: (-st.value, tuple(st.S)))
    return [verify_solution(p, st.chi, st.S, eps_pd=opts.eps_pd, route=route) for st in found]


def find_stationary_in_Sminus(p: QuadraticCanonicalProblem, start, opts: SolverOptions | None = None,
                              scales: Iterable[float] = (1.0, 0.5, 2.0, 0.25, 4.0, 0.125, 8.0, 1 / 64, 64.0)):
    """Dual stationary points with ``G(S)`` negative definite, ordered by ``Pi^d`` descending.

    Newton runs from ``start`` and from scaled copies of it; scaled starts
    that leave the negative cone and searches that stall are dropped.
    """
    opts = opts or SolverOptions()
    if p.m == 0:
        return []
    start = np.asarray(start, dtype=float).reshape(p.m)
    G = assemble_G(p, start).G
    if not _in_minus(G, _eps_pd(opts, G)):
        raise LeftCone("start point is not in the negative cone")
    states = []
    for s in scales:
        S0 = s * start
        G = assemble_G(p, S0).G
        if not _in_minus(G, _eps_pd(opts, G)):
            continue
        st = dual_newton(p, S0, opts, cone="minus")
        if st is not None:
            states.append(st)
    return _dedupe_sorted(p, states, opts, "s_minus")


# ---------------------------------------------------------------------------
# perturbation route


def linear_perturbation(p: QuadraticCanonicalProblem, direction, magnitude: float) -> QuadraticCanonicalProblem:
    d = np.asarray(direction, dtype=float).reshape(-1)
    if d.shape[0] != p.n:
        raise ValueError("perturbation direction has wrong length")
    if magnitude == 0:
        return p
    prov = dict(p.provenance)
    prov["linear_perturbation"] = {"direction": d.tolist(), "magnitude": float(magnitude)}
    return p.replace(f=p.f + magnitude * d, provenance=prov)


def canonical_newton(p: QuadraticCanonicalProblem, chi, S, max_iter=30):
    """Newton on the joint stationarity system of Xi.

    Unknowns ``(chi, S)``; equations ``G(S) chi - F(S) = 0`` and
    ``xi(chi) - dPhi*(S) = 0`` with Jacobian ``[[G, J], [J', -D]]``.
    """
    n = p.n
    D = p.phi.conjugate_hess_diag()

    def residual(x, s):
        G, F, _ = assemble_G(p, s)
        return np.concatenate([G @ x - F, eval_measures(p, x) - p.phi.conjugate_grad(s)])

    x, s = np.array(chi, dtype=float), np.array(S, dtype=float)
    r = residual(x, s)
    for _ in range(max_iter):
        rn = float(np.linalg.norm(r))
        if rn <= 1e-15 * (1.0 + np.linalg.norm(p.f)):
            break
        G = assemble_G(p, s).G
        J = measure_jacobian(p, x)
        K = np.block([[G, J], [J.T, -np.diag(D)]])
        step = np.linalg.lstsq(K, -r, rcond=None)[0]
        alpha = 1.0
        while alpha > 1e-6:
            xn, sn = x + alpha * step[:n], s + alpha * step[n:]
            rnew = residual(xn, sn)
            if np.linalg.norm(rnew) < rn:
                break
            alpha *= 0.5
        else:
            break
        x, s, r = xn, sn, rnew
    return x, s, float(np.linalg.norm(r))


def perturbed_primal_dual(p: QuadraticCanonicalProblem, sched: PerturbationSchedule | None = None,
                          chi0=None, opts: SolverOptions | None = None) -> SolveReport:
    """Canonical primal-dual loop with quadratic (and optional linear) perturbation.

    Step k solves the dual of ``Pi + delta_k/2 |chi - chi_{k-1}|^2`` (plus the
    decaying linear term), recovers its primal point and relaxes
    ``chi_k = chi_{k-1} + beta_k (chibar_k - chi_{k-1})`` until the energy
    change drops below ``omega``.
    """
    sched = sched or PerturbationSchedule()
    opts = opts or SolverOptions()
    chi = np.zeros(p.n) if chi0 is None else np.array(chi0, dtype=float).reshape(p.n)
    fp = None
    if sched.direction is not None and sched.magnitude:
        fp = np.asarray(sched.direction, dtype=float).reshape(p.n) * sched.magnitude
    energy = _merit(p, chi)
    omega = sched.omega if sched.omega is not None else 1e-9 * (1.0 + abs(energy))
    trace = []
    S_warm = None
    eye = np.eye(p.n)
    done = False
    k = 0
    for k in range(1, sched.max_outer + 1):
        delta = sched.delta_at(k, p)
        f_k = p.f + delta * chi
        if fp is not None:
            f_k = f_k + fp * (delta / sched.start_delta(p))
        sub = p.replace(A=p.A + delta * eye, f=f_k)
        try:
            rep = maximize_dual_on_Splus(sub, opts, S0=S_warm)
        except (MaxIterations, NoInteriorPoint) as exc:
            rep = exc.report
            if rep is None:
                raise
        S_warm = rep.dual if rep.status == "converged" else None
        chibar = rep.primal
        new_chi = chi + sched.beta_at(k) * (chibar - chi)
        new_energy = _merit(p, new_chi)
        trace.append((k, delta, new_energy, rep.gap))
        change = abs(new_energy - energy)
        chi, energy = new_chi, new_energy
        if change <= omega and k >= sched.first_check(p):
            done = True
            break
    if not done:
        raise MaxOuterIterations(f"perturbation loop did not settle within {sched.max_outer} outer steps")

    flags = set()
    if p.integrality is not None:
        chi = round_integral(p, chi)
        if opts.local_search:
            improved = one_flip_descent(p, chi)
            if not np.array_equal(improved, chi):
                chi = improved
                flags.add("LocalSearch")
        S = multipliers_for(p, chi)
    else:
        S = multipliers_for(p, chi)
        if opts.polish:
            x2, s2, r2 = canonical_newton(p, chi, S)
            r0 = canonical_newton(p, chi, S, max_iter=0)[2]
            if r2 < r0:
                chi, S = x2, s2
                flags.add("Polished")
    return verify_solution(p, chi, S, eps_pd=opts.eps_pd, route="perturbed", iterations=k,
                           trace=tuple(trace), flags=flags)


# ---------------------------------------------------------------------------
# orchestration

# only a GlobalMin certificate outranks a lower energy; local maxima go last
_CLASS_RANK = {
    TrialityKind.GLOBAL_MIN: 0,
    TrialityKind.LOCAL_MIN_CANDIDATE: 1,
    TrialityKind.LOCAL_MIN_WEAK: 1,
    TrialityKind.BOUNDARY: 1,
    TrialityKind.UNCLASSIFIED: 1,
    TrialityKind.LOCAL_MAX: 2,
}


def rank_key(rep: SolveReport):
    pi = rep.pi if math.isfinite(rep.pi) else math.inf
    return (_CLASS_RANK[rep.triality.kind], pi, tuple(np.round(rep.primal, 12)))


def sminus_branches(p: QuadraticCanonicalProblem, opts: SolverOptions):
    start = find_interior_start(p, opts, sign=-1.0)
    if start is None:
        return []
    try:
        return find_stationary_in_Sminus(p, start, opts)
    except CDKError:
        return []


def multistart(p: QuadraticCanonicalProblem, opts: SolverOptions | None = None,
               sched: PerturbationSchedule | None = None, sweep_sminus: bool = True) -> SolveReport:
    """Interior solve, then the perturbation route from several starts if needed.

    The returned report is the best by (triality class, Pi, primal); dual
    stationary points found in the negative cone are attached as ``branches``.
    """
    opts = opts or SolverOptions()
    interior = None
    try:
        interior = maximize_dual_on_Splus(p, opts)
    except (NoInteriorPoint, MaxIterations) as exc:
        interior = exc.report
    if interior is not None and interior.status == "converged":
        branches = tuple(sminus_branches(p, opts)) if sweep_sminus else ()
        return interior.replace(branches=branches)

    starts = []
    if interior is not None:
        starts.append(interior.primal)
    starts.extend(p.initial_guesses)
    rng = np.random.default_rng(opts.seed)
    scale = 1.0 + float(np.max(np.abs(starts[0]))) if starts else 1.0
    for _ in range(opts.n_starts):
        starts.append(rng.standard_normal(p.n) * scale)
    candidates = []
    for chi0 in starts:
        try:
            candidates.append(perturbed_primal_dual(p, sched, chi0, opts))
        except CDKError:
            continue
    if not candidates:
        if interior is not None:
            return interior
        raise NoInteriorPoint("neither the interior nor the perturbation route produced a solution")
    best = min(candidates, key=rank_key)
    flags = set(best.flags)
    if interior is not None and interior.status == "boundary":
        flags.add("NoInteriorStationaryPoint")
    branches = tuple(sminus_branches(p, opts)) if sweep_sminus else ()
    return best.replace(flags=frozenset(flags), branches=branches,
                        extra={**best.extra, "candidates": len(candidates)})

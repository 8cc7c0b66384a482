"""Canonical dual finite elements for the static post-buckling of a beam with quartic axial strain.

Energy on ``[0, L]``:

    Pi(w) = int 1/2 EI w''^2 + (alphaE/12) w'^4 - 1/2 lam E w'^2 - f w dx.

Deflection uses C1 Hermite cubics (deflection and rotation per node). The
quartic term is ``(alphaE/3) (1/2 w'^2)^2``; it is integrated with two Gauss
points per element and every Gauss point carries its own canonical measure
``xi_g = 1/2 w'(x_g)^2`` with ``Phi_g(xi) = w_g (alphaE/3) xi^2``, so the
engine reproduces the quadrature of the integrand exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import kernels
from .core import (
    CanonicalFunction,
    assemble_G,
    QuadraticCanonicalProblem,
    SolveReport,
    TrialityKind,
    eval_measures,
    measure_jacobian,
    multipliers_for,
    verify_solution,
)
from .errors import InvalidInput, MaxIterations, NoInteriorPoint, NotPositiveDefinite
from .linalg import real_cubic_roots
from .solvers import (
    SolverOptions,
    canonical_newton,
    linear_perturbation,
    maximize_dual_on_Splus,
)

BOUNDARY_CONDITIONS = ("simply-supported", "clamped-clamped")

_G2 = (np.array([-1.0, 1.0]) / math.sqrt(3.0), np.array([1.0, 1.0]))
_G3 = (np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)]), np.array([5.0, 8.0, 5.0]) / 9.0)


@dataclass(frozen=True)
class BeamModel:
    L: float = 1.0
    EI: float = 1.0
    alphaE: float = 1.0
    lam: float = 0.0
    f: float | Callable[[np.ndarray], np.ndarray] = 0.0
    bc: str = "simply-supported"
    E: float = 1.0

    def __post_init__(self):
        for name in ("L", "EI", "alphaE", "E"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidInput(f"{name} must be a positive finite number")
        if not math.isfinite(self.lam):
            raise InvalidInput("lam must be finite")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise InvalidInput(f"unknown boundary condition {self.bc!r}")
        if not callable(self.f) and not math.isfinite(self.f):
            raise InvalidInput("load must be finite")

    def load(self, x):
        x = np.asarray(x, dtype=float)
        if callable(self.f):
            return np.asarray(self.f(x), dtype=float) * np.ones_like(x)
        return np.full_like(x, float(self.f))

    def with_lam(self, lam):
        return BeamModel(self.L, self.EI, self.alphaE, lam, self.f, self.bc, self.E)


@dataclass(frozen=True)
class BeamMesh:
    n_elements: int

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise InvalidInput("a beam mesh needs at least two elements")

    def nodes(self, L):
        return np.linspace(0.0, L, self.n_elements + 1)

    @property
    def n_dofs(self):
        return 2 * (self.n_elements + 1)

    def free_dofs(self, bc):
        last = 2 * self.n_elements
        fixed = {0, last} if bc == "simply-supported" else {0, 1, last, last + 1}
        return np.array([i for i in range(self.n_dofs) if i not in fixed])


def hermite(t, h):
    """Hermite cubic basis on an element of length ``h`` at ``t`` in [0, 1].

    Returns values, first and second x-derivatives, each of shape (..., 4)
    for the dofs (w_0, theta_0, w_1, theta_1).
    """
    t = np.asarray(t, dtype=float)[..., None]
    N = np.concatenate([1 - 3 * t**2 + 2 * t**3, h * (t - 2 * t**2 + t**3),
                        3 * t**2 - 2 * t**3, h * (-t**2 + t**3)], axis=-1)
    dN = np.concatenate([-6 * t + 6 * t**2, h * (1 - 4 * t + 3 * t**2),
                         6 * t - 6 * t**2, h * (-2 * t + 3 * t**2)], axis=-1) / h
    d2N = np.concatenate([-6 + 12 * t, h * (-4 + 6 * t), 6 - 12 * t, h * (-2 + 6 * t)], axis=-1) / h**2
    return N, dN, d2N


class BeamSystem(NamedTuple):
    problem: QuadraticCanonicalProblem
    Kb: np.ndarray  # reduced bending stiffness
    K1: np.ndarray  # reduced geometric stiffness int w'^2
    free: np.ndarray
    model: BeamModel
    mesh: BeamMesh


def _element_dofs(e):
    return np.arange(2 * e, 2 * e + 4)


def assemble_system(model: BeamModel, mesh: BeamMesh) -> BeamSystem:
    ne = mesh.n_elements
    h = model.L / ne
    nd = mesh.n_dofs
    Kb = np.zeros((nd, nd))
    K1 = np.zeros((nd, nd))
    fv = np.zeros(nd)
    g3, w3 = _G3
    t3 = 0.5 * (g3 + 1.0)
    N3, dN3, d2N3 = hermite(t3, h)
    g2, w2 = _G2
    t2 = 0.5 * (g2 + 1.0)
    _, dN2, _ = hermite(t2, h)
    H = np.zeros((2 * ne, nd, nd))
    weights = np.zeros(2 * ne)
    for e in range(ne):
        dofs = _element_dofs(e)
        ix = np.ix_(dofs, dofs)
        jw = 0.5 * h * w3
        Kb[ix] += model.EI * np.einsum("g,gi,gj->ij", jw, d2N3, d2N3)
        K1[ix] += np.einsum("g,gi,gj->ij", jw, dN3, dN3)
        xg = e * h + t3 * h
        fv[dofs] += np.einsum("g,g,gi->i", jw, model.load(xg), N3)
        for q in range(2):
            k = 2 * e + q
            H[k][ix] = np.outer(dN2[q], dN2[q])
            weights[k] = 2.0 * (0.5 * h * w2[q]) * model.alphaE / 3.0
    free = mesh.free_dofs(model.bc)
    sub = np.ix_(free, free)
    Kb_r, K1_r = Kb[sub], K1[sub]
    A = Kb_r - model.lam * model.E * K1_r
    Hr = H[:, free][:, :, free]
    p = QuadraticCanonicalProblem(
        A=A, f=fv[free], H=Hr, b=np.zeros((2 * ne, len(free))), c=np.zeros(2 * ne),
        phi=CanonicalFunction.shifted_quadratic(weights),
        name=f"beam-{model.bc}-{ne}",
        provenance={"family": "beam", "n_elements": ne, "lam": model.lam, "bc": model.bc},
    )
    return BeamSystem(p, Kb_r, K1_r, free, model, mesh)


def assemble_beam(model: BeamModel, mesh: BeamMesh) -> QuadraticCanonicalProblem:
    return assemble_system(model, mesh).problem


def _generalized_eig(system: BeamSystem):
    """Eigenpairs of ``Kb q = lam E K1 q`` via Cholesky of ``E K1``."""
    Em = system.model.E * system.K1
    L = kernels.cholesky(0.5 * (Em + Em.T))
    if L is None:
        raise NotPositiveDefinite("geometric stiffness is not positive definite")
    Linv = np.linalg.solve(L, np.eye(L.shape[0]))
    C = Linv @ system.Kb @ Linv.T
    values, vectors, _ = kernels.jacobi_eigh(0.5 * (C + C.T))
    return values, Linv.T @ vectors


def buckling_load(model: BeamModel, mesh: BeamMesh) -> float:
    values, _ = _generalized_eig(assemble_system(model, mesh))
    return float(values[0])


def buckling_mode(model: BeamModel, mesh: BeamMesh):
    """Lowest buckling load and mode (reduced dofs, max deflection +1)."""
    system = assemble_system(model, mesh)
    values, vectors = _generalized_eig(system)
    phi = vectors[:, 0]
    full = np.zeros(mesh.n_dofs)
    full[system.free] = phi
    w = full[0::2]
    phi = phi / w[np.argmax(np.abs(w))]
    return float(values[0]), phi


def full_dofs(system: BeamSystem, q):
    out = np.zeros(system.mesh.n_dofs)
    out[system.free] = q
    return out


def primal_hessian(p: QuadraticCanonicalProblem, chi):
    xi = eval_measures(p, chi)
    S = p.phi.grad(xi)
    J = measure_jacobian(p, chi)
    G = assemble_G(p, S).G
    return G + (J * p.phi.weights) @ J.T


def morse_index(p: QuadraticCanonicalProblem, chi, tol=1e-9):
    values, _, _ = kernels.jacobi_eigh(primal_hessian(p, chi))
    return int(np.sum(values < -tol * (1.0 + np.abs(values).max())))


def galerkin_amplitudes(p: QuadraticCanonicalProblem, phi):
    """Stationary amplitudes of the one-mode reduction ``chi = a phi``.

    ``Pi(a phi) = kappa a^2/2 + beta a^4/4 - gamma a`` with
    ``kappa = phi'A phi``, ``beta = sum_k w_k (phi'H_k phi)^2 / 2``.
    """
    kappa = float(phi @ p.A @ phi)
    hk = np.einsum("i,kij,j->k", phi, p.H, phi)
    beta = float(np.sum(p.phi.weights * hk**2)) / 2.0
    gamma = float(p.f @ phi)
    return [r.value for r in real_cubic_roots(beta, 0.0, kappa, -gamma)]


def _state_report(p, state, opts, route, branch, iterations=0):
    rep = verify_solution(p, state.chi, state.S, eps_pd=opts.eps_pd, route=route, iterations=iterations)
    return _tag(p, rep, branch)


def _tag(p, rep, branch):
    return rep.replace(extra={**rep.extra, "branch": branch, "morse_index": morse_index(p, rep.primal)})


def _same(a, b, tol=1e-7):
    return np.max(np.abs(a - b)) <= tol * (1.0 + np.max(np.abs(a)))


def _polish(p, opts, chi, S, **fields):
    x, s, _ = canonical_newton(p, chi, S, max_iter=60)
    return verify_solution(p, x, s, eps_pd=opts.eps_pd, **fields)


def _stationary(p, rep):
    return rep.primal_residual <= 1e-7 * (1.0 + float(np.linalg.norm(p.f)))


def _global_branch(p, opts, phi, perturb):
    """Global minimizer from the interior dual solve.

    The beam dual is badly conditioned near its optimum (the margin of G
    is set by the load, its norm by the bending stiffness), so an interior
    ascent that stalls next to the cone boundary is finished by Newton on
    the joint primal-dual system and accepted when G stays positive
    definite. When the problem is symmetric a linear perturbation along
    the buckling mode selects one of the mirror states instead.
    """
    try:
        rep = maximize_dual_on_Splus(p, opts)
    except (MaxIterations, NoInteriorPoint) as exc:
        rep = exc.report
    if rep is not None:
        if rep.converged:
            return rep
        done = _polish(p, opts, rep.primal, rep.dual, route="interior", iterations=rep.iterations,
                       flags={"Polished"})
        if done.triality.kind is TrialityKind.GLOBAL_MIN and _stationary(p, done):
            return done
    scale = perturb * (1.0 + float(np.linalg.norm(p.f)) + float(np.abs(phi @ p.A @ phi)))
    pp = linear_perturbation(p, phi / np.linalg.norm(phi), scale)
    try:
        rep = maximize_dual_on_Splus(pp, opts)
    except (MaxIterations, NoInteriorPoint) as exc:
        if exc.report is None:
            raise
        rep = exc.report
    return _polish(p, opts, rep.primal, rep.dual, route="perturbed", iterations=rep.iterations,
                   flags={"Perturbed", "Polished"})


def beam_options(p: QuadraticCanonicalProblem, opts: SolverOptions | None = None) -> SolverOptions:
    """Options with a definiteness tolerance suited to beam stiffness.

    Bending stiffness grows like ``h^-4`` while the margin of ``G`` at a
    buckled state is set by the physical load, so the generic relative
    tolerance would hide it; use ``1e-13 (1 + |A|_inf)`` unless given.
    """
    opts = opts or SolverOptions()
    if opts.eps_pd is None:
        opts = opts.replace(eps_pd=1e-13 * (1.0 + float(np.abs(p.A).sum(axis=1).max())))
    return opts


def solve_three_branches(model: BeamModel, mesh: BeamMesh, opts: SolverOptions | None = None,
                         perturb: float = 1e-6) -> list[SolveReport]:
    """Post-buckling branches ordered by energy.

    Below the buckling load a single (convex) branch is returned. Above it
    the global minimum comes from the interior dual solve; the other two
    stationary pairs are found by Newton on the joint primal-dual system
    seeded from the one-mode Galerkin amplitudes. ``extra["branch"]`` names the
    role and ``extra["morse_index"]`` counts negative primal curvatures.
    ``perturb`` (relative, with sign) selects the mirror state when the
    load vanishes.
    """
    system = assemble_system(model, mesh)
    p = system.problem
    opts = beam_options(p, opts)
    lam_c, phi = buckling_mode(model, mesh)
    if model.lam <= lam_c * (1.0 + 1e-8):
        try:
            rep = maximize_dual_on_Splus(p, opts)
        except (MaxIterations, NoInteriorPoint) as exc:
            if exc.report is None:
                raise
            rep = exc.report
        return [_tag(p, rep.replace(extra={**rep.extra, "lam_c": lam_c}), "global_min")]

    glob = _global_branch(p, opts, phi, perturb)
    found = [glob]
    symmetric = not np.any(p.f)
    for a in galerkin_amplitudes(p, phi):
        chi0 = a * phi
        rep = _polish(p, opts, chi0, multipliers_for(p, chi0), route="analytic")
        if not _stationary(p, rep):
            continue
        if any(_same(rep.primal, o.primal) for o in found):
            continue
        found.append(rep)
    rest = sorted(found[1:], key=lambda r: (r.pi, tuple(np.round(r.primal, 12))))
    # ties (the unloaded mirror pair) keep the state chosen by the dual solve first
    if rest and rest[0].pi < glob.pi - 1e-9 * (1.0 + abs(glob.pi)):
        found = sorted(found, key=lambda r: (r.pi, tuple(np.round(r.primal, 12))))
    else:
        found = [glob] + rest
    out = []
    for rep in found:
        idx = morse_index(p, rep.primal)
        if rep is found[0]:
            role = "global_min"
        elif symmetric and _same(rep.primal, -found[0].primal):
            # without load the mirror image of the selected state is equally stable
            role = "mirror_min"
        else:
            role = "local_min" if idx == 0 else "local_max"
        out.append(rep.replace(extra={**rep.extra, "branch": role, "morse_index": idx, "lam_c": lam_c}))
    return out


def export_deflection(report: SolveReport, model: BeamModel, mesh: BeamMesh, samples=None):
    """Sampled deflection ``(x, w(x))`` by Hermite interpolation.

    ``samples`` is a count of uniform points (default: 10 per element) or an
    array of positions in ``[0, L]``.
    """
    system = assemble_system(model, mesh) if len(report.primal) != mesh.n_dofs else None
    q = full_dofs(system, report.primal) if system is not None else np.asarray(report.primal)
    return interpolate(q, model.L, mesh, samples)


def interpolate(q_full, L, mesh: BeamMesh, samples=None):
    ne = mesh.n_elements
    h = L / ne
    if samples is None:
        samples = 10 * ne + 1
    xs = np.linspace(0.0, L, int(samples)) if np.isscalar(samples) else np.asarray(samples, dtype=float)
    if np.any(xs < -1e-12 * L) or np.any(xs > L * (1 + 1e-12)):
        raise InvalidInput("sample points must lie on the beam")
    e = np.clip(np.floor(xs / h).astype(int), 0, ne - 1)
    t = np.clip(xs / h - e, 0.0, 1.0)
    N, _, _ = hermite(t, h)
    idx = 2 * e[:, None] + np.arange(4)
    w = np.sum(N * np.asarray(q_full)[idx], axis=1)
    return np.column_stack([xs, w])


DEFAULT_SCENARIO = dict(L=1.0, EI=1.0, alphaE=1.0, f=-0.1, bc="simply-supported")


def default_model(mesh: BeamMesh, factor=2.0, **overrides):
    """Default scenario with ``lam = factor * lam_c`` on the given mesh."""
    base = BeamModel(**{**DEFAULT_SCENARIO, **overrides})
    return base.with_lam(factor * buckling_load(base, mesh))

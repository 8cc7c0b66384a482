"""Minimal distance between a circle and a nonconvex double-well curve.

    min 1/2 |x - y|^2   s.t.  g(x) = 1/2 (|x|^2 - 1) = 0,
                              h(y) = 1/2 (1/2 |y - c|^2 - 1)^2 - f'(y - c) = 0.

The primal variable is ``chi = (x, y)``. With multipliers ``lam`` for g,
``mu`` for h and the second-level dual ``s`` of ``xi(y) = 1/2|y-c|^2 - 1``,

    Xi = 1/2|x-y|^2 + lam g(x) + mu (s xi(y) - s^2/2 - f'(y-c)),

whose Hessian in ``chi`` is ``G = [[(1+lam) I, -I], [-I, (1+mu s) I]]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import InvalidInput, NoStationaryFound
from ..linalg import Definiteness, classify_definiteness

PAPER_C = (1.0, 0.0)
PAPER_F = (math.sqrt(6.0) / 96.0, 0.0)


@dataclass(frozen=True)
class TwoSurfaceSpec:
    c: tuple = PAPER_C
    f: tuple = PAPER_F
    k: float | None = None  # perturbation index: f_2 += 1/k

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        f = tuple(float(v) for v in self.f)
        if len(c) != len(f) or len(c) < 1:
            raise InvalidInput("c and f must have the same positive length")
        if self.k is not None and (self.k == 0 or not math.isfinite(self.k)):
            raise InvalidInput("perturbation index must be finite and nonzero")
        if len(c) < 2 and self.k is not None:
            raise InvalidInput("perturbation needs at least two dimensions")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "f", f)

    @property
    def dim(self):
        return len(self.c)

    @property
    def f_effective(self):
        f = np.array(self.f)
        if self.k is not None:
            f[1] += 1.0 / self.k
        return f


class TwoSurfaceModel(NamedTuple):
    c: np.ndarray
    f: np.ndarray
    dim: int

    def g(self, x):
        return 0.5 * (x @ x - 1.0)

    def xi(self, y):
        d = y - self.c
        return 0.5 * d @ d - 1.0

    def h(self, y):
        return 0.5 * self.xi(y) ** 2 - self.f @ (y - self.c)

    def objective(self, x, y):
        d = x - y
        return 0.5 * d @ d

    def unpack(self, z):
        n = self.dim
        return z[:n], z[n:2 * n], z[2 * n], z[2 * n + 1], z[2 * n + 2]

    def residual(self, z):
        x, y, lam, mu, s = self.unpack(z)
        d = y - self.c
        xi = self.xi(y)
        return np.concatenate([
            x - y + lam * x,
            y - x + mu * (s * d - self.f),
            [self.g(x)],
            [s * xi - 0.5 * s * s - self.f @ d],
            [xi - s],
        ])

    def jacobian(self, z):
        n = self.dim
        x, y, lam, mu, s = self.unpack(z)
        d = y - self.c
        xi = self.xi(y)
        I = np.eye(n)
        J = np.zeros((2 * n + 3, 2 * n + 3))
        J[:n, :n] = (1 + lam) * I
        J[:n, n:2 * n] = -I
        J[:n, 2 * n] = x
        J[n:2 * n, :n] = -I
        J[n:2 * n, n:2 * n] = (1 + mu * s) * I
        J[n:2 * n, 2 * n + 1] = s * d - self.f
        J[n:2 * n, 2 * n + 2] = mu * d
        J[2 * n, :n] = x
        J[2 * n + 1, n:2 * n] = s * d - self.f
        J[2 * n + 1, 2 * n + 2] = xi - s
        J[2 * n + 2, n:2 * n] = d
        J[2 * n + 2, 2 * n + 2] = -1.0
        return J

    def G(self, lam, mu, s):
        n = self.dim
        I = np.eye(n)
        return np.block([[(1 + lam) * I, -I], [-I, (1 + mu * s) * I]])

    def total_complementary(self, z):
        x, y, lam, mu, s = self.unpack(z)
        return self.objective(x, y) + lam * self.g(x) + mu * (s * self.xi(y) - 0.5 * s * s - self.f @ (y - self.c))

    def dual_value(self, lam, mu, s):
        """``min_chi Xi`` written as ``-1/2 F'G^{-1}F + const`` (G nonsingular)."""
        n = self.dim
        F = np.concatenate([np.zeros(n), mu * (s * self.c + self.f)])
        const = -0.5 * lam + mu * (0.5 * s * self.c @ self.c - s - 0.5 * s * s + self.f @ self.c)
        # least squares keeps the value finite on the singular (symmetric) case
        return float(-0.5 * F @ np.linalg.lstsq(self.G(lam, mu, s), F, rcond=None)[0] + const)


def build_two_surface(spec: TwoSurfaceSpec) -> TwoSurfaceModel:
    return TwoSurfaceModel(np.array(spec.c), spec.f_effective, spec.dim)


class TwoSurfaceSolution(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    lam: float
    mu: float
    s: float
    objective: float
    pi_dual: float
    gap: float
    g_residual: float
    h_residual: float
    stationarity: float
    definiteness: Definiteness
    seed: int


def _seeds(model, count=8):
    """Deterministic starts: x on the circle, y on rays from c at radius sqrt(2)."""
    n = model.dim
    out = []
    for j in range(count):
        ang = 2.0 * math.pi * (j + 0.5) / count
        u = np.zeros(n)
        u[0], u[1 % n] = math.cos(ang), math.sin(ang) if n > 1 else 0.0
        y = model.c + math.sqrt(2.0) * u / max(np.linalg.norm(u), 1e-300)
        x = y / max(np.linalg.norm(y), 1e-300)
        # multipliers from the stationarity equations in least squares
        lam = float(((y - x) @ x) / (x @ x))
        d = y - model.c
        s = model.xi(y)
        v = s * d - model.f
        mu = float(((x - y) @ v) / max(v @ v, 1e-300))
        out.append(np.concatenate([x, y, [lam, mu, s]]))
    return out


def _newton(model, z, max_iter=100, tol=1e-13):
    r = model.residual(z)
    for _ in range(max_iter):
        rn = float(np.linalg.norm(r))
        if rn <= tol:
            return z
        J = model.jacobian(z)
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        alpha = 1.0
        while alpha > 1e-8:
            zn = z + alpha * step
            rnew = model.residual(zn)
            if np.linalg.norm(rnew) < (1 - 1e-4 * alpha) * rn:
                break
            alpha *= 0.5
        else:
            return None
        z, r = zn, rnew
    return z if np.linalg.norm(r) <= 1e-10 else None


def solve_two_surface(spec: TwoSurfaceSpec, n_seeds=8, mu_min=1e-10):
    """Stationary points of Xi from deterministic seeds, sorted by objective.

    Points with ``|mu| <= mu_min`` are discarded (the h-multiplier must not
    vanish); duplicates within 1e-8 are merged.
    """
    model = build_two_surface(spec)
    found = []
    for i, z0 in enumerate(_seeds(model, n_seeds)):
        z = _newton(model, z0)
        if z is None:
            continue
        x, y, lam, mu, s = model.unpack(z)
        if abs(mu) <= mu_min:
            continue
        if any(np.max(np.abs(np.concatenate([x, y]) - np.concatenate([o.x, o.y]))) <= 1e-8 for o in found):
            continue
        obj = model.objective(x, y)
        dual = model.dual_value(lam, mu, s)
        G = model.G(lam, mu, s)
        found.append(TwoSurfaceSolution(
            x=x, y=y, lam=float(lam), mu=float(mu), s=float(s), objective=float(obj),
            pi_dual=dual, gap=abs(obj - dual), g_residual=abs(model.g(x)), h_residual=abs(model.h(y)),
            stationarity=float(np.linalg.norm(model.residual(z))),
            definiteness=classify_definiteness(G), seed=i,
        ))
    if not found:
        raise NoStationaryFound("no stationary point of the total complementary function found")
    found.sort(key=lambda t: (t.objective, tuple(t.y)))
    return found


def curve_points(model: TwoSurfaceModel, phis):
    """Points of ``h(y) = 0`` on rays ``y = c + r (cos phi, sin phi)``, ``r > 0`` (2-D).

    Along a ray h is the quartic ``r^4/8 - r^2/2 - a r + 1/2`` with
    ``a = f'u``; its roots are the eigenvalues of the companion matrices.
    """
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    U = np.stack([np.cos(phis), np.sin(phis)], axis=1)
    a = U @ model.f
    comp = np.zeros((len(phis), 4, 4))
    comp[:, 1:, :3] = np.eye(3)
    # monic form r^4 - 4 r^2 - 8 a r + 4
    comp[:, 0, 1] = 4.0
    comp[:, 0, 2] = 8.0 * a
    comp[:, 0, 3] = -4.0
    roots = np.linalg.eigvals(comp)
    out_phi, out_y = [], []
    for i in range(len(phis)):
        for r in roots[i]:
            if abs(r.imag) <= 1e-9 and r.real > 0:
                out_phi.append(phis[i])
                out_y.append(model.c + r.real * U[i])
    return np.array(out_phi), np.array(out_y).reshape(-1, 2)


def polar_grid_oracle(spec: TwoSurfaceSpec, n_phi=20001, n_theta=4001):
    """Dense grid search over both curves.

    y runs over the nonconvex curve via rays from c, x over the unit circle
    on a polar grid; the best grid pair is refined by locally re-gridding
    the ray angle with the exact nearest circle point.
    """
    if spec.dim != 2:
        raise InvalidInput("the polar grid oracle is two-dimensional")
    model = build_two_surface(spec)
    phis = np.linspace(-math.pi, math.pi, n_phi, endpoint=False)
    thetas = np.linspace(-math.pi, math.pi, n_theta, endpoint=False)
    X = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    ph, Y = curve_points(model, phis)
    # nearest grid x for every y via the angle of y
    ang = np.arctan2(Y[:, 1], Y[:, 0])
    idx = np.rint((ang + math.pi) / (2 * math.pi) * n_theta).astype(int) % n_theta
    vals = np.full(len(Y), math.inf)
    for off in (-1, 0, 1):
        j = (idx + off) % n_theta
        vals = np.minimum(vals, 0.5 * np.sum((X[j] - Y) ** 2, axis=1))
    i = int(np.argmin(vals))
    best = (float(vals[i]), ph[i], Y[i])
    # refine around the best ray angle with the closed-form circle distance
    phi0 = best[1]
    width = 4 * math.pi / n_phi
    for _ in range(3):
        fph, fY = curve_points(model, np.linspace(phi0 - width, phi0 + width, 2001))
        d = 0.5 * (np.linalg.norm(fY, axis=1) - 1.0) ** 2
        j = int(np.argmin(d))
        if d[j] < best[0]:
            best = (float(d[j]), fph[j], fY[j])
        phi0, width = fph[j], width / 100.0
    y = best[2]
    return float(best[0]), y / np.linalg.norm(y), y

"""Least-squares form of the explicit Euler recursion for the logistic equation.

``Pi(X) = 1/2 sum_k (chi_k - chi_{k-1} - h F(chi_{k-1}))^2`` with
``F(chi) = r chi (1 - chi)``, plus optional observation misfit terms.
Each step residual is quadratic in the unknowns and serves as the canonical
measure with ``Phi = 1/2 xi^2``, so the engine reproduces ``Pi`` exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import CanonicalFunction, QuadraticCanonicalProblem
from ..errors import InvalidInput, Unsupported


@dataclass(frozen=True)
class DynamicsSpec:
    rate: float
    horizon: float
    steps: int
    initial: float | None = None  # None leaves chi_0 free
    terminal: float | None = None  # pins chi_n when given
    observations: dict = field(default_factory=dict)  # step index -> observed value
    obs_weight: float = 1.0
    family: str = "logistic"

    def __post_init__(self):
        if self.family != "logistic":
            raise Unsupported(f"right-hand side {self.family!r} is not quadratic in the state")
        if self.steps < 1 or not self.horizon > 0:
            raise InvalidInput("need at least one step and a positive horizon")
        if not self.obs_weight >= 0:
            raise InvalidInput("observation weight must be nonnegative")
        obs = {int(k): float(v) for k, v in dict(self.observations).items()}
        if any(not 0 <= k <= self.steps for k in obs):
            raise InvalidInput("observation index out of range")
        object.__setattr__(self, "observations", obs)

    @property
    def h(self):
        return self.horizon / self.steps

    def rhs(self, x):
        return self.rate * x * (1.0 - x)

    def forward(self, x0=None):
        """Explicit Euler trajectory ``chi_0..chi_n``."""
        x = np.empty(self.steps + 1)
        x[0] = self.initial if x0 is None else x0
        for k in range(1, self.steps + 1):
            x[k] = x[k - 1] + self.h * self.rhs(x[k - 1])
        return x


def _unknown_index(spec):
    pinned = {}
    if spec.initial is not None:
        pinned[0] = spec.initial
    if spec.terminal is not None:
        pinned[spec.steps] = spec.terminal
    idx = {}
    for k in range(spec.steps + 1):
        if k not in pinned:
            idx[k] = len(idx)
    return idx, pinned


def full_trajectory(spec: DynamicsSpec, X) -> np.ndarray:
    idx, pinned = _unknown_index(spec)
    X = np.asarray(X, dtype=float)
    return np.array([pinned[k] if k in pinned else X[idx[k]] for k in range(spec.steps + 1)])


def least_squares_energy(spec: DynamicsSpec, traj) -> float:
    """Direct formula on a full trajectory ``chi_0..chi_n``."""
    x = np.asarray(traj, dtype=float)
    r = x[1:] - x[:-1] - spec.h * spec.rhs(x[:-1])
    misfit = sum((x[k] - y) ** 2 for k, y in spec.observations.items())
    return float(0.5 * r @ r + 0.5 * spec.obs_weight * misfit)


def build_dynamics_least_squares(spec: DynamicsSpec) -> QuadraticCanonicalProblem:
    idx, pinned = _unknown_index(spec)
    n = len(idx)
    if n == 0:
        raise InvalidInput("every state is pinned")
    hr = spec.h * spec.rate
    m = spec.steps
    H = np.zeros((m, n, n))
    b = np.zeros((m, n))
    c = np.zeros(m)
    # r_k = chi_k - (1 + hr) chi_{k-1} + hr chi_{k-1}^2
    for k in range(1, spec.steps + 1):
        row = k - 1
        if k in idx:
            b[row, idx[k]] += 1.0
        else:
            c[row] += pinned[k]
        if k - 1 in idx:
            j = idx[k - 1]
            b[row, j] -= 1.0 + hr
            H[row, j, j] = 2.0 * hr
        else:
            x = pinned[k - 1]
            c[row] += -(1.0 + hr) * x + hr * x * x
    A = np.zeros((n, n))
    f = np.zeros(n)
    for k, y in spec.observations.items():
        if k in idx:
            A[idx[k], idx[k]] += spec.obs_weight
            f[idx[k]] += spec.obs_weight * y
    guess = spec.forward() if spec.initial is not None else None
    guesses = () if guess is None else (np.array([guess[k] for k in sorted(idx)]),)
    const = 0.5 * spec.obs_weight * sum(y * y for k, y in spec.observations.items() if k in idx)
    const += 0.5 * spec.obs_weight * sum((pinned[k] - y) ** 2 for k, y in spec.observations.items() if k in pinned)
    return QuadraticCanonicalProblem(
        A=A,
        f=f,
        H=H,
        b=b,
        c=c,
        phi=CanonicalFunction.shifted_quadratic(np.ones(m)),
        name="dynamics_lsq",
        provenance={"family": "dynamics_lsq", "steps": spec.steps, "rate": spec.rate, "h": spec.h,
                    "energy_offset": const},
        initial_guesses=guesses,
    )

"""Max-cut as a spin problem: maximize ``1/4 sum w_ij (1 - x_i x_j)`` over ``x in {-1,1}^n``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import CanonicalFunction, QuadraticCanonicalProblem
from ..errors import InvalidInput
from .oracles import brute_force_binary


@dataclass(frozen=True)
class MaxCutSpec:
    W: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float, ndmin=2)
        if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] < 1:
            raise InvalidInput("weight matrix must be square")
        if not np.all(np.isfinite(W)) or np.any(W < 0):
            raise InvalidInput("weights must be finite and nonnegative")
        if np.any(W != W.T) or np.any(np.diag(W) != 0):
            raise InvalidInput("weights must be symmetric with zero diagonal")
        object.__setattr__(self, "W", W)

    @property
    def n(self):
        return self.W.shape[0]


def random_graph(n, seed, density=0.5, integral=True):
    rng = np.random.default_rng(seed)
    W = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    mask = rng.random(len(iu[0])) < density
    w = rng.integers(1, 4, len(iu[0])).astype(float) if integral else rng.random(len(iu[0])) + 0.1
    W[iu] = np.where(mask, w, 0.0)
    return MaxCutSpec(W + W.T)


def cut_value(W, x):
    """Cut weight of a ``{-1,1}`` or ``{0,1}`` labelling."""
    x = np.asarray(x)
    s = x if np.any(x < 0) else 2 * x - 1
    W = np.asarray(W)
    return float(0.25 * np.sum(W * (1 - np.outer(s, s))))


def spins_to_bits(x):
    return ((np.asarray(x) > 0)).astype(int)


def bits_to_spins(b):
    return 2 * np.asarray(b, dtype=int) - 1


def build_max_cut(spec: MaxCutSpec, eps: float = 0.0) -> QuadraticCanonicalProblem:
    """Minimize ``1/4 x'Wx + eps 1'x`` with measures ``xi_k = x_k^2 - 1`` (zero indicator).

    Maximizing the cut equals minimizing ``1/4 x'Wx`` because
    ``1/4 sum w_ij (1 - x_i x_j) = (sum w_ij - x'Wx) / 4``.
    """
    if eps < 0:
        raise InvalidInput("perturbation must be nonnegative")
    n = spec.n
    H = np.zeros((n, n, n))
    H[np.arange(n), np.arange(n), np.arange(n)] = 2.0
    return QuadraticCanonicalProblem(
        A=spec.W / 2.0,
        f=-eps * np.ones(n),
        H=H,
        b=np.zeros((n, n)),
        c=-np.ones(n),
        phi=CanonicalFunction.zero_indicator(n),
        name="max_cut",
        provenance={"family": "max_cut", "n": n, "eps": float(eps)},
        integrality="pm1",
    )


def max_cut_oracle(spec: MaxCutSpec):
    x, v = brute_force_binary(spec.W / 2.0, np.zeros(spec.n), "pm1")
    return x, cut_value(spec.W, x)

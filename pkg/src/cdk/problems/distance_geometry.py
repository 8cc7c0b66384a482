"""Distance geometry: ``W = sum_e w_e (|p_i - p_j|^2 - d_e)^2`` over an edge list.

Nodes ``0..n_sensors-1`` are sensors (unknown); anchors follow them with
fixed positions. Each measure is ``xi_e = |p_i - p_j|^2 - d_e`` with
``Phi_e = w_e xi_e^2``, i.e. weight ``2 w_e`` in ``1/2 a xi^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import CanonicalFunction, QuadraticCanonicalProblem
from ..errors import InvalidInput, UnderdeterminedGauge


@dataclass(frozen=True)
class DistanceGeometrySpec:
    dim: int
    n_sensors: int
    anchors: tuple = ()  # positions, one tuple of length dim each
    edges: tuple = ()  # (i, j, weight, squared distance)
    gauge: str | None = None  # None, "pin" (fix rigid motions) or "free"

    def __post_init__(self):
        if self.dim < 1 or self.n_sensors < 1:
            raise InvalidInput("dimension and sensor count must be positive")
        anchors = tuple(tuple(float(v) for v in a) for a in self.anchors)
        if any(len(a) != self.dim for a in anchors):
            raise InvalidInput("anchor positions must have length dim")
        edges = []
        total = self.n_sensors + len(anchors)
        for e in self.edges:
            i, j, w, d = int(e[0]), int(e[1]), float(e[2]), float(e[3])
            if not (0 <= i < total and 0 <= j < total) or i == j:
                raise InvalidInput(f"edge ({i}, {j}) references an invalid node pair")
            if w < 0 or not d > 0 or not np.isfinite(w) or not np.isfinite(d):
                raise InvalidInput("edge weights must be nonnegative and distances positive")
            edges.append((i, j, w, d))
        if self.gauge not in (None, "pin", "free"):
            raise InvalidInput(f"unknown gauge option {self.gauge!r}")
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "edges", tuple(edges))

    @property
    def n_nodes(self):
        return self.n_sensors + len(self.anchors)


def _layout(spec):
    """Fixed coordinates and the index of each free coordinate (-1 when fixed)."""
    d, ns = spec.dim, spec.n_sensors
    fixed = np.zeros((spec.n_nodes, d))
    free = -np.ones((spec.n_nodes, d), dtype=int)
    if spec.anchors:
        fixed[ns:] = np.array(spec.anchors)
    pinned = np.zeros((ns, d), dtype=bool)
    if not spec.anchors:
        if spec.gauge is None:
            raise UnderdeterminedGauge("no anchors: pass gauge='pin' to fix rigid motions")
        if spec.gauge == "pin":
            # node k pins coordinates k..d-1, removing translations and rotations
            for k in range(min(d, ns)):
                pinned[k, k:] = True
    count = 0
    for i in range(ns):
        for a in range(d):
            if not pinned[i, a]:
                free[i, a] = count
                count += 1
    return fixed, free, count


def positions(spec: DistanceGeometrySpec, chi) -> np.ndarray:
    """Node positions ``(n_nodes, dim)`` for a vector of free coordinates."""
    fixed, free, _ = _layout(spec)
    P = fixed.copy()
    mask = free >= 0
    P[mask] = np.asarray(chi, dtype=float)[free[mask]]
    return P


def build_distance_geometry(spec: DistanceGeometrySpec) -> QuadraticCanonicalProblem:
    fixed, free, n = _layout(spec)
    if n == 0:
        raise InvalidInput("no free coordinates")
    edges = [e for e in spec.edges if e[2] > 0]
    m = len(edges)
    H = np.zeros((m, n, n))
    b = np.zeros((m, n))
    c = np.zeros(m)
    for k, (i, j, w, dist) in enumerate(edges):
        # p_i - p_j = c0 + E chi
        E = np.zeros((spec.dim, n))
        c0 = fixed[i] - fixed[j]
        for a in range(spec.dim):
            if free[i, a] >= 0:
                E[a, free[i, a]] += 1.0
            if free[j, a] >= 0:
                E[a, free[j, a]] -= 1.0
        H[k] = 2.0 * E.T @ E
        b[k] = 2.0 * E.T @ c0
        c[k] = c0 @ c0 - dist
    weights = np.array([2.0 * e[2] for e in edges])
    return QuadraticCanonicalProblem(
        A=np.zeros((n, n)),
        f=np.zeros(n),
        H=H,
        b=b,
        c=c,
        phi=CanonicalFunction.shifted_quadratic(weights),
        name="distance_geometry",
        provenance={"family": "distance_geometry", "dim": spec.dim, "n_sensors": spec.n_sensors,
                    "edges": m},
    )


def stress(spec: DistanceGeometrySpec, P) -> float:
    """Direct evaluation of ``W`` from node positions."""
    P = np.asarray(P, dtype=float)
    total = 0.0
    for i, j, w, d in spec.edges:
        r = P[i] - P[j]
        total += w * (r @ r - d) ** 2
    return float(total)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdk.core import TrialityKind, eval_primal
from cdk.errors import InvalidInput, UnderdeterminedGauge
from cdk.problems import DistanceGeometrySpec, build_distance_geometry, positions, stress
from cdk.solvers import multistart


def ring(n, gauge):
    edges = [(i, (i + 1) % n, 1.0, 1.0) for i in range(n)] + [(0, 2, 0.5, 1.5)]
    return DistanceGeometrySpec(2, n, (), edges, gauge)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@given(st.integers(3, 6), st.floats(0, 2 * np.pi), st.integers(0, 10**6))
def test_energy_is_objective_under_rigid_motions(n, theta, seed):
    spec = ring(n, "free")
    p = build_distance_geometry(spec)
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((n, 2))
    moved = P @ rotation(theta).T + rng.standard_normal(2)
    e0 = eval_primal(p, P.reshape(-1))
    assert e0 == pytest.approx(stress(spec, P), rel=1e-12, abs=1e-12)
    assert eval_primal(p, moved.reshape(-1)) == pytest.approx(e0, rel=1e-9, abs=1e-9)


def test_gauge_is_required_without_anchors():
    with pytest.raises(UnderdeterminedGauge):
        build_distance_geometry(ring(3, None))
    pinned = build_distance_geometry(ring(3, "pin"))
    free = build_distance_geometry(ring(3, "free"))
    # pinning removes 3 coordinates in the plane (2 translations, 1 rotation)
    assert free.n - pinned.n == 3


def test_touching_circles():
    spec = DistanceGeometrySpec(2, 1, ((0, 0), (2, 0)), ((0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0)))
    rep = multistart(build_distance_geometry(spec))
    assert np.allclose(rep.primal, [1.0, 0.0], atol=1e-6)
    assert rep.pi <= 1e-12


def test_separated_circles_analytic():
    # anchors 3 apart, both distances 1: minimizer at the midpoint, W = 2 (9/4 - 1)^2
    spec = DistanceGeometrySpec(2, 1, ((0, 0), (3, 0)), ((0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0)))
    rep = multistart(build_distance_geometry(spec))
    assert rep.triality.kind is TrialityKind.GLOBAL_MIN
    assert np.allclose(rep.primal, [1.5, 0.0], atol=1e-9)
    assert rep.pi == pytest.approx(3.125, abs=1e-12)
    assert rep.dual == pytest.approx([2.5, 2.5])
    assert rep.gap <= 1e-12


def test_realizable_triangle_with_pin_gauge():
    spec = DistanceGeometrySpec(2, 3, (), ((0, 1, 1, 1), (1, 2, 1, 1), (0, 2, 1, 2)), gauge="pin")
    rep = multistart(build_distance_geometry(spec))
    P = positions(spec, rep.primal)
    assert stress(spec, P) <= 1e-10
    assert P[0] == pytest.approx([0.0, 0.0]) and P[1][1] == 0.0


def test_validation():
    with pytest.raises(InvalidInput):
        DistanceGeometrySpec(2, 1, ((0, 0, 0),), ())
    with pytest.raises(InvalidInput):
        DistanceGeometrySpec(2, 1, ((0, 0),), ((0, 0, 1.0, 1.0),))
    with pytest.raises(InvalidInput):
        DistanceGeometrySpec(2, 1, ((0, 0),), ((0, 5, 1.0, 1.0),))
    with pytest.raises(InvalidInput):
        DistanceGeometrySpec(2, 1, ((0, 0),), ((0, 1, -1.0, 1.0),))
    with pytest.raises(InvalidInput):
        DistanceGeometrySpec(2, 1, ((0, 0),), ((0, 1, 1.0, 1.0),), gauge="fix")

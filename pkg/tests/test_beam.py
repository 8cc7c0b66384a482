import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss

from cdk.beam import (
    BeamMesh,
    BeamModel,
    assemble_system,
    buckling_load,
    buckling_mode,
    default_model,
    export_deflection,
    full_dofs,
    galerkin_amplitudes,
    interpolate,
    morse_index,
    solve_three_branches,
)
from cdk.core import TrialityKind, eval_primal
from cdk.errors import InvalidInput


def element_cubic(w0, t0, w1, t1, h):
    # w(s) on [0, h] from end values and slopes
    V = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [1, h, h**2, h**3], [0, 1, 2 * h, 3 * h**2]], dtype=float)
    return Polynomial(np.linalg.solve(V, [w0, t0, w1, t1]))


def quadrature_energy(model, mesh, q_full):
    """Energy integrand of the beam evaluated element by element.

    Same rules as the engine: 3-point Gauss for bending, geometric and load
    terms, 2-point Gauss for the quartic term.
    """
    ne = mesh.n_elements
    h = model.L / ne
    g3, w3 = leggauss(3)
    g2, w2 = leggauss(2)
    total = 0.0
    for e in range(ne):
        w = element_cubic(*q_full[2 * e:2 * e + 4], h)
        dw, d2w = w.deriv(), w.deriv(2)
        s3 = 0.5 * h * (g3 + 1)
        x3 = e * h + s3
        total += 0.5 * h * np.sum(w3 * (0.5 * model.EI * d2w(s3) ** 2 - 0.5 * model.lam * model.E * dw(s3) ** 2
                                        - model.load(x3) * w(s3)))
        s2 = 0.5 * h * (g2 + 1)
        total += 0.5 * h * np.sum(w2 * model.alphaE / 12.0 * dw(s2) ** 4)
    return total


@pytest.mark.parametrize("ne,bc", [(2, "simply-supported"), (5, "clamped-clamped"), (12, "simply-supported")])
def test_energy_matches_independent_quadrature(ne, bc, rng):
    model = BeamModel(L=1.3, EI=0.7, alphaE=1.9, lam=15.0, f=lambda x: 0.3 - x, bc=bc, E=1.1)
    mesh = BeamMesh(ne)
    system = assemble_system(model, mesh)
    for _ in range(200):
        q = rng.standard_normal(len(system.free))
        ref = quadrature_energy(model, mesh, full_dofs(system, q))
        assert eval_primal(system.problem, q) == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_zero_deflection_has_zero_energy():
    system = assemble_system(BeamModel(lam=30.0, f=-1.0), BeamMesh(6))
    assert eval_primal(system.problem, np.zeros(system.problem.n)) == 0.0


def test_unloaded_compressionless_beam_is_convex():
    system = assemble_system(BeamModel(lam=0.0), BeamMesh(6))
    assert np.linalg.eigvalsh(system.problem.A)[0] > 0


def test_buckling_load_and_mesh_consistency():
    lc60 = buckling_load(BeamModel(), BeamMesh(60))
    lc120 = buckling_load(BeamModel(), BeamMesh(120))
    assert lc60 == pytest.approx(math.pi**2, rel=1e-6)
    assert abs(lc120 - lc60) / lc120 <= 1e-3
    clamped = buckling_load(BeamModel(bc="clamped-clamped"), BeamMesh(60))
    assert clamped == pytest.approx(4 * math.pi**2, rel=1e-5)
    _, phi = buckling_mode(BeamModel(), BeamMesh(20))
    xs = np.linspace(0, 1, 41)
    w = interpolate(full_dofs(assemble_system(BeamModel(), BeamMesh(20)), phi), 1.0, BeamMesh(20), xs)[:, 1]
    assert np.allclose(w, np.sin(np.pi * xs), atol=1e-4)


def test_export_deflection():
    mesh = BeamMesh(4)
    model = BeamModel()
    system = assemble_system(model, mesh)
    zero = export_deflection(type("R", (), {"primal": np.zeros(system.problem.n)})(), model, mesh)
    assert zero.shape == (41, 2) and np.all(zero[:, 1] == 0)
    q = np.random.default_rng(1).standard_normal(mesh.n_dofs)
    table = interpolate(q, 1.0, mesh, mesh.nodes(1.0))
    assert np.allclose(table[:, 1], q[0::2], atol=1e-14)
    with pytest.raises(InvalidInput):
        interpolate(q, 1.0, mesh, [1.5])


def test_single_element_rotation_shape():
    # rotation theta at the left end only: w(x) = theta x (1 - x/L)^2
    mesh = BeamMesh(2)
    q = np.zeros(mesh.n_dofs)
    q[1] = 0.7
    xs = np.linspace(0, 0.5, 11)
    w = interpolate(q, 1.0, mesh, xs)[:, 1]
    h = 0.5
    assert np.allclose(w, 0.7 * xs * (1 - xs / h) ** 2, atol=1e-14)


@pytest.mark.parametrize("ne", [30, 40])
def test_three_branches_structure(ne):
    mesh = BeamMesh(ne)
    model = default_model(mesh)
    branches = solve_three_branches(model, mesh)
    assert [b.extra["branch"] for b in branches] == ["global_min", "local_min", "local_max"]
    pis = [b.pi for b in branches]
    assert pis[0] < pis[1] < pis[2]
    for b in branches:
        assert b.gap <= 1e-6 * (1 + abs(b.pi))
    assert branches[0].triality.kind is TrialityKind.GLOBAL_MIN
    shapes = [export_deflection(b, model, mesh)[:, 1] for b in branches]
    mid = len(shapes[0]) // 2
    assert np.sign(shapes[0][mid]) == -np.sign(shapes[1][mid])
    assert np.abs(shapes[2]).max() <= 1e-2 * np.abs(shapes[0]).max()
    assert [b.extra["morse_index"] for b in branches] == [0, 0, 1]


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_unloaded_beam_mirror_states(sign):
    mesh = BeamMesh(20)
    model = default_model(mesh, f=0.0)
    branches = solve_three_branches(model, mesh, perturb=sign * 1e-6)
    roles = [b.extra["branch"] for b in branches]
    assert roles == ["global_min", "mirror_min", "local_max"]
    a, b = branches[0].primal, branches[1].primal
    assert np.abs(a + b).max() <= 1e-8 * np.abs(a).max()
    assert branches[0].pi == pytest.approx(branches[1].pi, rel=1e-10)  # G is singular here, Newton stalls near 1e-11
    w = export_deflection(branches[0], model, mesh)[:, 1]
    assert np.sign(w[len(w) // 2]) == sign


def test_prebuckling_single_branch():
    mesh = BeamMesh(10)
    model = default_model(mesh, factor=0.5)
    branches = solve_three_branches(model, mesh)
    assert len(branches) == 1
    assert branches[0].triality.kind is TrialityKind.GLOBAL_MIN
    assert branches[0].extra["morse_index"] == 0


@settings(max_examples=20)
@given(st.floats(1.2, 4.0), st.floats(-0.5, 0.5))
def test_galerkin_amplitudes_solve_the_reduced_cubic(factor, load):
    mesh = BeamMesh(8)
    model = default_model(mesh, factor=factor, f=load)
    system = assemble_system(model, mesh)
    p = system.problem
    _, phi = buckling_mode(model, mesh)
    for a in galerkin_amplitudes(p, phi):
        h = 1e-6 * (1 + abs(a))
        slope = (eval_primal(p, (a + h) * phi) - eval_primal(p, (a - h) * phi)) / (2 * h)
        assert abs(slope) <= 1e-5 * (1 + abs(eval_primal(p, a * phi)))


def test_validation():
    with pytest.raises(InvalidInput):
        BeamMesh(1)
    with pytest.raises(InvalidInput):
        BeamModel(L=0.0)
    with pytest.raises(InvalidInput):
        BeamModel(bc="free")
    with pytest.raises(InvalidInput):
        BeamModel(f=math.inf)
    assert morse_index(assemble_system(BeamModel(), BeamMesh(3)).problem, np.zeros(2 * 4 - 2)) == 0

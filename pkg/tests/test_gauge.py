import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covmech import (AbelianBackground, BracketContext, HamiltonianSpec,
                     IntegratorConfig, NonAbelianBackground, ScalarPotential,
                     StructureConstants, apply_gauge_transformation,
                     euclidean_chart, field_strength_abelian,
                     field_strength_nonabelian, integrate,
                     su2_structure_constants)
from covmech.errors import CovmechError

from conftest import uniform_b_background


# ---------------------------------------------------------------------------
# structure constants

def test_su2_structure_constants_invariants():
    f = su2_structure_constants()
    assert f.algebra_dim == 3
    assert f.antisymmetry_defect() == 0.0
    assert f.jacobi_defect() <= 1e-14
    f.validate()


def test_structure_constants_reject_symmetric_part():
    bad = np.zeros((2, 2, 2))
    bad[0, 1, 0] = bad[1, 0, 0] = 1.0
    with pytest.raises(CovmechError):
        StructureConstants(bad).validate()


@given(st.integers(min_value=0, max_value=2),
       st.integers(min_value=0, max_value=2),
       st.integers(min_value=0, max_value=2))
def test_su2_f_is_levi_civita(a, b, c):
    f = su2_structure_constants().f
    perm = {(0, 1, 2): 1.0, (1, 2, 0): 1.0, (2, 0, 1): 1.0,
            (2, 1, 0): -1.0, (1, 0, 2): -1.0, (0, 2, 1): -1.0}
    assert f[a, b, c] == perm.get((a, b, c), 0.0)


# ---------------------------------------------------------------------------
# abelian field strengths

def test_zero_potential_zero_field():
    chart = euclidean_chart(2)
    bg = AbelianBackground(charge=1.0, potential=lambda x: np.zeros(2))
    assert np.array_equal(field_strength_abelian(bg, chart, np.zeros(2)),
                          np.zeros((2, 2)))


def test_uniform_b_curl():
    chart = euclidean_chart(2)
    bg = uniform_b_background(B=0.9)
    F = field_strength_abelian(bg, chart, np.array([0.3, -1.1]))
    assert F[0, 1] == pytest.approx(0.9, rel=1e-13)
    assert np.array_equal(F, -F.T)


def test_pure_gauge_potential_zero_field():
    # A = grad(Lambda) for Lambda = x*y
    chart = euclidean_chart(2)
    bg = AbelianBackground(charge=1.0,
                           potential=lambda x: np.array([x[1], x[0]]))
    F = field_strength_abelian(bg, chart, np.array([0.7, 0.2]))
    assert np.max(np.abs(F)) < 1e-12


def test_abelian_antisymmetry_random_points(rng):
    chart = euclidean_chart(2)
    bg = uniform_b_background(B=1.7)
    for _ in range(100):
        F = field_strength_abelian(bg, chart, rng.uniform(-3, 3, size=2))
        assert np.array_equal(F, -F.T)


# ---------------------------------------------------------------------------
# non-abelian field strengths

def test_nonabelian_zero_potential():
    chart = euclidean_chart(2)
    bg = NonAbelianBackground(coupling=0.7,
                              structure=su2_structure_constants(),
                              potential=lambda x: np.zeros((3, 2)))
    F = field_strength_nonabelian(bg, chart, np.zeros(2))
    assert np.array_equal(F, np.zeros((3, 2, 2)))


def test_su2_plane_field_is_constant_epsilon_pattern(su2, rng):
    # F^a_{ij} = eps_{ij} B^a; the quadratic term cancels because the
    # antisymmetric structure constants hit the symmetric B^b B^c factor
    bg = su2.ctx.background
    B = np.asarray(su2.params["B"])
    for _ in range(100):
        x = rng.uniform(-2, 2, size=2)
        F = field_strength_nonabelian(bg, su2.chart, x)
        for a in range(3):
            assert F[a, 0, 1] == pytest.approx(B[a], rel=1e-13, abs=1e-13)
            assert F[a, 0, 0] == 0.0 and F[a, 1, 1] == 0.0
            assert F[a, 1, 0] == -F[a, 0, 1]


def test_abelian_embedding_algebra_dim_one():
    # algebra_dim = 1 with f = 0 reproduces the abelian field strength
    chart = euclidean_chart(2)
    ab = uniform_b_background(B=1.3)
    trivial = StructureConstants(np.zeros((1, 1, 1)))
    na = NonAbelianBackground(
        coupling=1.0, structure=trivial,
        potential=lambda x: ab.potential(x)[None, :],
        potential_partials=lambda x: ab.potential_partials(x)[:, None, :])
    x = np.array([0.4, -0.9])
    F_na = field_strength_nonabelian(na, chart, x)
    F_ab = field_strength_abelian(ab, chart, x)
    assert np.max(np.abs(F_na[0] - F_ab)) < 1e-14


def test_su2_field_modulus_spatially_constant(su2, rng):
    bg = su2.ctx.background
    ref = None
    for _ in range(20):
        F = field_strength_nonabelian(bg, su2.chart, rng.uniform(-2, 2, 2))
        mod = float(np.sum(F[:, 0, 1] ** 2))
        ref = mod if ref is None else ref
        assert mod == pytest.approx(ref, rel=1e-14)


# ---------------------------------------------------------------------------
# gauge transformations

def test_constant_shift_leaves_potential_unchanged():
    bg = uniform_b_background(B=0.9)
    bg2 = apply_gauge_transformation(bg, lambda x: 4.2,
                                     lam_gradient=lambda x: np.zeros(2))
    x = np.array([0.3, 0.8])
    assert np.array_equal(np.asarray(bg2.potential(x), float),
                          np.asarray(bg.potential(x), float))


def test_gauge_shift_preserves_field_strength(rng):
    chart = euclidean_chart(2)
    bg = uniform_b_background(B=0.9)
    bg2 = apply_gauge_transformation(bg, lambda x: x[0] * x[1],
                                     lam_gradient=lambda x: np.array([x[1], x[0]]))
    for _ in range(10):
        x = rng.uniform(-2, 2, size=2)
        F1 = field_strength_abelian(bg, chart, x)
        F2 = field_strength_abelian(bg2, chart, x)
        assert np.max(np.abs(F1 - F2)) < 1e-10
        assert F2[0, 1] == pytest.approx(0.9, abs=1e-10)


def test_gauge_shift_numeric_gradient_fallback():
    chart = euclidean_chart(2)
    bg = uniform_b_background(B=0.9)
    bg2 = apply_gauge_transformation(bg, lambda x: x[0] * x[1])
    F2 = field_strength_abelian(bg2, chart, np.array([0.5, -0.2]))
    assert F2[0, 1] == pytest.approx(0.9, abs=1e-7)


def test_trajectories_gauge_invariant(plane_b):
    # same covariant initial data, transformed potential: identical x(tau)
    from covmech import PhasePoint
    bg2 = apply_gauge_transformation(
        plane_b.ctx.background, lambda x: x[0] * x[1],
        lam_gradient=lambda x: np.array([x[1], x[0]]))
    ctx2 = BracketContext(chart=plane_b.ctx.chart, background=bg2)
    spec2 = HamiltonianSpec(mass=plane_b.mass, ctx=ctx2)
    p0 = PhasePoint.make([1.0, 0.5], [0.0, 0.8])
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    t1 = integrate(plane_b, p0, cfg, 10.0, [plane_b.observable()])
    t2 = integrate(spec2, p0, cfg, 10.0, [spec2.observable()])
    # step sequences may differ in the last bits; the physics may not
    assert np.max(np.abs(t1.states[-1] - t2.states[-1])) < 1e-9
    # gauge-invariant observables unchanged: H along the run, |F|^2 pointwise
    assert t1.monitor_values["H"][0] == pytest.approx(
        t2.monitor_values["H"][0], rel=1e-12)
    x = np.array([0.4, 1.2])
    f1 = field_strength_abelian(plane_b.ctx.background, plane_b.ctx.chart, x)
    f2 = field_strength_abelian(bg2, plane_b.ctx.chart, x)
    assert np.sum(f1 ** 2) == pytest.approx(np.sum(f2 ** 2), rel=1e-10)


# ---------------------------------------------------------------------------
# scalar potential

def test_scalar_potential_gradient_consistency(qdot, rng):
    pot = qdot.ctx.scalar_potential
    chart = qdot.chart
    for _ in range(10):
        x = np.array([rng.uniform(0.3, 2.0), rng.uniform(-1.5, 1.5), 0.0])
        analytic = pot.gradient(x)
        numeric = ScalarPotential(value=pot.value).gradient_at(chart, x)
        assert np.max(np.abs(analytic - numeric)) \
            <= 1e-6 * max(1.0, np.max(np.abs(analytic)))

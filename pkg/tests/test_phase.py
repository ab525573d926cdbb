import math

import numpy as np
import pytest

from covmech import (BracketContext, HamiltonianSpec, Observable, PhasePoint,
                     axial_chart, charge_observable, coordinate_observable,
                     covariant_bracket, covariant_observable_derivative,
                     euclidean_chart, jacobi_residual, momentum_observable,
                     noether_flow, product_observable)
from covmech.phase import bracket_with_scale, jacobi_report
from covmech.verify import random_polynomial_observable

from conftest import uniform_b_background


def contexts(kerr, qdot, su2):
    return {"geodesic": BracketContext(chart=axial_chart()),
            "abelian": qdot.ctx, "nonabelian": su2.ctx}


def sample_for(ctx, rng):
    if ctx.chart.dim == 4:
        from conftest import random_kerr_point
        return random_kerr_point(rng)
    if ctx.chart.dim == 3:
        x = np.array([rng.uniform(0.3, 2.0), rng.uniform(-1.5, 1.5),
                      rng.uniform(0, 2 * math.pi)])
    else:
        x = rng.uniform(-2.0, 2.0, size=2)
    pi = rng.uniform(-1.0, 1.0, size=ctx.chart.dim)
    t = rng.uniform(-1.0, 1.0, size=ctx.algebra_dim) \
        if ctx.algebra_dim else None
    return PhasePoint.make(x, pi, t)


# ---------------------------------------------------------------------------
# covariant observable derivative

def test_geodesic_hamiltonian_covariantly_constant(kerr, rng):
    hobs = kerr.hamiltonian.observable()
    for _ in range(10):
        p = kerr.sample(rng)
        d = covariant_observable_derivative(kerr.ctx, hobs, p)
        assert np.max(np.abs(d)) < 1e-10


def test_hamiltonian_derivative_reduces_to_potential_gradient(qdot, rng):
    hobs = qdot.hamiltonian.observable()
    for _ in range(10):
        p = qdot.sample(rng)
        d = covariant_observable_derivative(qdot.ctx, hobs, p)
        grad = qdot.ctx.scalar_potential.gradient(p.x)
        assert np.max(np.abs(d - grad)) < 1e-10


def test_coordinate_function_derivative_is_delta():
    chart = euclidean_chart(2)
    ctx = BracketContext(chart=chart)
    p = PhasePoint.make([0.3, -0.7], [0.2, 0.9])
    for nu in range(2):
        d = covariant_observable_derivative(ctx, coordinate_observable(nu), p)
        expected = np.zeros(2)
        expected[nu] = 1.0
        assert np.array_equal(d, expected)


def test_momentum_component_derivative_is_christoffel_term():
    from covmech import christoffel_at
    chart = axial_chart()
    ctx = BracketContext(chart=chart)
    p = PhasePoint.make([1.4, 0.2, 0.6], [0.3, -0.8, 1.1])
    gamma = christoffel_at(chart, p.x)
    for nu in range(3):
        d = covariant_observable_derivative(ctx, momentum_observable(nu), p)
        expected = np.einsum("ml,l->m", gamma[:, nu, :], p.pi)
        assert np.max(np.abs(d - expected)) < 1e-13


# ---------------------------------------------------------------------------
# bracket examples and invariants

def test_momentum_bracket_reproduces_field_strength(rng):
    chart = euclidean_chart(2)
    B, q = 0.9, 1.3
    ctx = BracketContext(chart=chart, background=uniform_b_background(B, q))
    for _ in range(20):
        p = PhasePoint.make(rng.uniform(-2, 2, 2), rng.uniform(-1, 1, 2))
        v = covariant_bracket(ctx, momentum_observable(0),
                              momentum_observable(1), p)
        assert v == pytest.approx(q * B, rel=1e-12)


def test_charge_bracket_reproduces_lie_algebra(su2, rng):
    f = su2.ctx.background.structure.f
    for _ in range(20):
        p = su2.sample(rng)
        for a in range(3):
            for b in range(3):
                v = covariant_bracket(su2.ctx, charge_observable(a),
                                      charge_observable(b), p)
                expected = float(f[a, b] @ p.t)
                assert v == pytest.approx(expected, rel=1e-13, abs=1e-15)


def test_self_bracket_exactly_zero(kerr, qdot, su2, rng):
    for name, ctx in contexts(kerr, qdot, su2).items():
        for i in range(20):
            p = sample_for(ctx, rng)
            g = random_polynomial_observable(rng, ctx.chart.dim,
                                             ctx.algebra_dim, name=f"g{i}")
            assert covariant_bracket(ctx, g, g, p) == 0.0, name


def test_antisymmetry_exact_random_observables(kerr, qdot, su2, rng):
    for name, ctx in contexts(kerr, qdot, su2).items():
        for i in range(100):
            p = sample_for(ctx, rng)
            g = random_polynomial_observable(rng, ctx.chart.dim,
                                             ctx.algebra_dim, name="g")
            k = random_polynomial_observable(rng, ctx.chart.dim,
                                             ctx.algebra_dim, name="k")
            gk = covariant_bracket(ctx, g, k, p)
            kg = covariant_bracket(ctx, k, g, p)
            assert gk + kg == 0.0, name


def test_canonical_pairs_every_context(kerr, qdot, su2, rng):
    for name, ctx in contexts(kerr, qdot, su2).items():
        d = ctx.chart.dim
        for _ in range(10):
            p = sample_for(ctx, rng)
            for mu in range(d):
                for nu in range(d):
                    v = covariant_bracket(ctx, coordinate_observable(mu),
                                          momentum_observable(nu), p)
                    expected = 1.0 if mu == nu else 0.0
                    assert abs(v - expected) < 1e-12, name


def test_ricci_identity_all_catalog_backgrounds(qdot, su2, rng):
    # {pi_mu, pi_nu} = qF_{mu nu} against the independent closed forms
    wl = qdot.params["omega_L"]
    for _ in range(100):
        p = qdot.sample(rng)
        v = covariant_bracket(qdot.ctx, momentum_observable(0),
                              momentum_observable(2), p)
        assert abs(v - 2.0 * wl * p.x[0]) < 1e-10 * max(1.0, abs(v))
    g = su2.params["coupling"]
    B = np.asarray(su2.params["B"])
    for _ in range(100):
        p = su2.sample(rng)
        v = covariant_bracket(su2.ctx, momentum_observable(0),
                              momentum_observable(1), p)
        expected = g * float(B @ p.t)
        assert abs(v - expected) < 1e-10 * max(1.0, abs(expected))


def test_leibniz_rule(kerr, qdot, su2, rng):
    for name, ctx in contexts(kerr, qdot, su2).items():
        for _ in range(10):
            p = sample_for(ctx, rng)
            g = random_polynomial_observable(rng, ctx.chart.dim,
                                             ctx.algebra_dim, name="g")
            k = random_polynomial_observable(rng, ctx.chart.dim,
                                             ctx.algebra_dim, name="k")
            j = random_polynomial_observable(rng, ctx.chart.dim,
                                             ctx.algebra_dim, name="j")
            lhs = covariant_bracket(ctx, product_observable(g, k), j, p)
            rhs = g.value(p) * covariant_bracket(ctx, k, j, p) \
                + covariant_bracket(ctx, g, j, p) * k.value(p)
            scale = max(1.0, abs(lhs), abs(rhs))
            assert abs(lhs - rhs) < 1e-9 * scale, name


# ---------------------------------------------------------------------------
# Jacobi identity

def test_jacobi_linear_observables_flat():
    chart = euclidean_chart(2)
    ctx = BracketContext(chart=chart)
    a = Observable(name="a", eval=lambda p: p.pi[0] + 2.0 * p.x[1],
                   dpi=lambda p: np.array([1.0, 0.0]),
                   dx=lambda p: np.array([0.0, 2.0]))
    b = Observable(name="b", eval=lambda p: p.pi[1] - p.x[0],
                   dpi=lambda p: np.array([0.0, 1.0]),
                   dx=lambda p: np.array([-1.0, 0.0]))
    c = Observable(name="c", eval=lambda p: 0.5 * p.pi[0] + p.x[0],
                   dpi=lambda p: np.array([0.5, 0.0]),
                   dx=lambda p: np.array([1.0, 0.0]))
    p = PhasePoint.make([0.4, -0.2], [0.7, 0.1])
    assert abs(jacobi_residual(ctx, a, b, c, p)) < 1e-9


def test_jacobi_quantum_dot_quadratics(qdot, rng):
    g = Observable(name="pr2", eval=lambda p: p.pi[0] ** 2,
                   dpi=lambda p: np.array([2.0 * p.pi[0], 0.0, 0.0]),
                   dx=lambda p: np.zeros(3))
    k = momentum_observable(2, "pphi")
    j = Observable(name="rho2", eval=lambda p: p.x[0] ** 2,
                   dpi=lambda p: np.zeros(3),
                   dx=lambda p: np.array([2.0 * p.x[0], 0.0, 0.0]))
    for _ in range(10):
        p = qdot.sample(rng)
        res, scale = jacobi_report(qdot.ctx, g, k, j, p)
        assert abs(res) <= 1e-7 * max(scale, 1.0)


def test_jacobi_charges_reduces_to_structure_jacobi(su2, rng):
    p = su2.sample(rng)
    res = jacobi_residual(su2.ctx, charge_observable(0), charge_observable(1),
                          charge_observable(2), p)
    assert abs(res) < 1e-10


def test_jacobi_random_polynomials_all_contexts(kerr, qdot, su2, rng):
    for name, ctx in contexts(kerr, qdot, su2).items():
        for _ in range(5):
            p = sample_for(ctx, rng)
            obs = [random_polynomial_observable(rng, ctx.chart.dim,
                                                ctx.algebra_dim, name=f"o{i}")
                   for i in range(3)]
            res, scale = jacobi_report(ctx, *obs, p)
            assert abs(res) <= 1e-6 * max(scale, 1e-12), name


# ---------------------------------------------------------------------------
# Noether flow

def test_noether_flow_rotation_generator():
    chart = euclidean_chart(2)
    ctx = BracketContext(chart=chart)
    rot = Observable(name="J",
                     eval=lambda p: -p.x[1] * p.pi[0] + p.x[0] * p.pi[1],
                     dpi=lambda p: np.array([-p.x[1], p.x[0]]),
                     dx=lambda p: np.array([p.pi[1], -p.pi[0]]))
    p = PhasePoint.make([0.8, -0.3], [0.4, 1.2])
    dx, dpi = noether_flow(ctx, rot, p)
    assert np.array_equal(dx, np.array([0.3, 0.8]))        # tangent rotation
    assert np.array_equal(dpi, np.array([-1.2, 0.4]))      # momenta rotate


def test_noether_flow_first_order_invariance(rng):
    # flat geodesic context: the covariant flow is the canonical one, and
    # G(p + eps*flow) - G(p) = O(eps^2) since Delta G = {G, G} = 0
    chart = euclidean_chart(2)
    ctx = BracketContext(chart=chart)
    g = Observable(name="J",
                   eval=lambda p: -p.x[1] * p.pi[0] + p.x[0] * p.pi[1]
                   + 0.5 * p.pi[0] ** 2,
                   dpi=lambda p: np.array([-p.x[1] + p.pi[0], p.x[0]]),
                   dx=lambda p: np.array([p.pi[1], -p.pi[0]]))
    p = PhasePoint.make(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2))
    dx, dpi = noether_flow(ctx, g, p)
    base = g.value(p)
    deltas = []
    for eps in (1e-4, 5e-5):
        shifted = PhasePoint.make(p.x + eps * dx, p.pi + eps * dpi, p.t)
        deltas.append(abs(g.value(shifted) - base))
    # halving eps shrinks the defect by ~4 (second order)
    assert deltas[1] <= 0.3 * deltas[0] + 1e-14


def test_noether_flow_of_hamiltonian_matches_covariant_eom(kerr):
    # geodesic context: Delta x = xdot, Delta pi = covariant momentum rate
    from covmech import christoffel_at, equations_of_motion
    spec = kerr.hamiltonian
    p = kerr.default_initial
    dx, dpi = noether_flow(kerr.ctx, spec.observable(), p)
    xdot, pidot, _ = equations_of_motion(spec, p)
    gamma = christoffel_at(kerr.chart, p.x)
    transported = pidot - np.einsum("lmn,l,n->m", gamma, xdot, p.pi)
    assert np.max(np.abs(dx - xdot)) < 1e-12
    assert np.max(np.abs(dpi - transported)) < 1e-12


# ---------------------------------------------------------------------------
# derivative closures vs finite differences (gradient check)

def test_supplied_derivatives_match_finite_differences(kerr, qdot, su2, rng):
    systems = {"kerr": kerr, "qdot": qdot, "su2": su2}
    for sname, system in systems.items():
        for oname, obs in system.observables.items():
            if obs.dpi is None:
                continue
            for _ in range(3):
                p = system.sample(rng)
                fd = Observable(name="fd", eval=obs.eval)
                for attr, analytic in (("pi", obs.dpi_at), ("x", obs.dx_at),
                                       ("t", obs.dt_at)):
                    a = analytic(p)
                    if a.size == 0:
                        continue
                    n = fd._fd(p, attr)
                    scale = max(1.0, float(np.max(np.abs(a))))
                    assert np.max(np.abs(a - n)) < 1e-6 * scale, \
                        (sname, oname, attr)


def test_polynomial_form_agrees_with_direct_eval(qdot, kerr, rng):
    # series-backed observables evaluate bit-consistently with the series
    for system, name in ((qdot, "G4"), (kerr, "K_carter")):
        obs = system.observables[name]
        series = obs.polynomial_form
        for _ in range(10):
            p = system.sample(rng)
            assert obs.value(p) == series.evaluate(p.x, p.pi)

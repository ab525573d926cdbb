import math

import numpy as np
import pytest

from covmech import (OutOfDomain, SingularMetric, axial_chart,
                     christoffel_at, covariant_tensor_derivative,
                     euclidean_chart, inverse_metric_at, metric_at,
                     metric_partials_at)
from covmech.diff import dual_jacobian, fd_jacobian
from covmech.geometry import MetricChart, inverse_metric_field, \
    raise_first_index
from covmech.killing import SymmetricTensorField, field_from_monomials

from conftest import schwarzschild_christoffel


def catalog_charts(kerr, qdot, su2):
    return {"euclidean": su2.chart, "axial": qdot.chart, "kerr": kerr.chart}


def sample_chart_point(name, chart, rng):
    if name == "kerr":
        return np.array([rng.uniform(0, 1), rng.uniform(3, 20),
                         rng.uniform(0.2, math.pi - 0.2),
                         rng.uniform(0, 2 * math.pi)])
    if name == "axial":
        return np.array([rng.uniform(0.3, 2.0), rng.uniform(-1.5, 1.5),
                         rng.uniform(0, 2 * math.pi)])
    return rng.uniform(-2.0, 2.0, size=chart.dim)


# ---------------------------------------------------------------------------
# inverse metric

def test_inverse_metric_flat_identity():
    chart = euclidean_chart(2)
    assert np.array_equal(inverse_metric_at(chart, np.array([0.3, -1.0])),
                          np.eye(2))


def test_inverse_metric_axial_diagonal():
    chart = axial_chart()
    ginv = inverse_metric_at(chart, np.array([2.0, 0.0, 0.1]))
    assert np.allclose(ginv, np.diag([1.0, 1.0, 0.25]), rtol=0, atol=1e-15)


def test_inverse_metric_kerr_product_is_identity():
    from covmech import KerrParams, kerr_chart
    chart = kerr_chart(KerrParams(M=1.0, a=0.5))
    x = np.array([0.0, 10.0, math.pi / 3.0, 0.0])
    g = metric_at(chart, x)
    ginv = inverse_metric_at(chart, x)
    assert np.max(np.abs(g @ ginv - np.eye(4))) < 1e-12
    assert np.array_equal(ginv, ginv.T)


def test_out_of_domain_and_singular_metric_errors():
    chart = axial_chart()
    with pytest.raises(OutOfDomain):
        inverse_metric_at(chart, np.array([-1.0, 0.0, 0.0]))

    degenerate = MetricChart(
        dim=2, coordinate_names=("u", "v"),
        metric=lambda x: np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(SingularMetric):
        inverse_metric_at(degenerate, np.zeros(2))


# ---------------------------------------------------------------------------
# Christoffel symbols

def test_christoffel_flat_all_zero():
    chart = euclidean_chart(3)
    assert np.array_equal(christoffel_at(chart, np.array([1.0, 2.0, -0.5])),
                          np.zeros((3, 3, 3)))


def test_christoffel_axial_closed_form():
    chart = axial_chart()
    rho = 1.7
    gamma = christoffel_at(chart, np.array([rho, 0.3, 1.1]))
    expected = np.zeros((3, 3, 3))
    expected[2, 2, 0] = -rho            # Gamma_{phph}^rho
    expected[0, 2, 2] = 1.0 / rho       # Gamma_{rho ph}^ph
    expected[2, 0, 2] = 1.0 / rho
    assert np.max(np.abs(gamma - expected)) < 1e-13


def test_christoffel_kerr_a0_matches_schwarzschild_oracle(rng):
    from covmech import KerrParams, kerr_chart
    chart = kerr_chart(KerrParams(M=1.0, a=0.0))
    for _ in range(5):
        x = np.array([0.0, rng.uniform(3, 20),
                      rng.uniform(0.2, math.pi - 0.2), rng.uniform(0, 6.28)])
        gamma = christoffel_at(chart, x)
        oracle = schwarzschild_christoffel(1.0, x)
        assert np.max(np.abs(gamma - oracle)) < 1e-9


def test_christoffel_lower_index_symmetry(kerr, qdot, su2, rng):
    for name, chart in catalog_charts(kerr, qdot, su2).items():
        for _ in range(10):
            x = sample_chart_point(name, chart, rng)
            gamma = christoffel_at(chart, x)
            assert np.array_equal(gamma, np.swapaxes(gamma, 0, 1)), name


# ---------------------------------------------------------------------------
# covariant tensor derivative

def test_metric_postulate_all_catalog_charts(kerr, qdot, su2, rng):
    # nabla g^{mu nu} = 0 to 1e-10 at random domain points
    for name, chart in catalog_charts(kerr, qdot, su2).items():
        field = inverse_metric_field(chart)
        for _ in range(100):
            x = sample_chart_point(name, chart, rng)
            nab = covariant_tensor_derivative(chart, field, x)
            scale = max(1.0, float(np.max(np.abs(metric_partials_at(chart, x)))))
            assert np.max(np.abs(nab)) < 1e-10 * scale, name


def test_constant_vector_field_flat_derivative_zero():
    chart = euclidean_chart(2)
    field = field_from_monomials(2, 1, {(0,): lambda x: 0.7,
                                        (1,): lambda x: -1.2})
    nab = covariant_tensor_derivative(chart, field, np.array([0.4, 0.9]))
    assert np.array_equal(nab, np.zeros((2, 2)))


def test_axial_rotation_generator_killing_combination():
    # J = d/dphi: nabla^(mu J^nu) symmetrized vanishes (rotation isometry)
    chart = axial_chart()
    field = field_from_monomials(3, 1, {(2,): lambda x: 1.0})
    x = np.array([1.3, -0.2, 0.8])
    nab = covariant_tensor_derivative(chart, field, x)
    raised = raise_first_index(inverse_metric_at(chart, x), nab)
    sym = raised + raised.T
    assert np.max(np.abs(sym)) < 1e-10


def test_rank0_reduces_to_plain_gradient():
    chart = axial_chart()
    field = field_from_monomials(3, 0, {(): lambda x: x[0] * x[0] + x[1]})
    nab = covariant_tensor_derivative(chart, field, np.array([1.5, 0.3, 0.2]))
    assert nab == pytest.approx(np.array([3.0, 1.0, 0.0]), abs=1e-12)


# ---------------------------------------------------------------------------
# differentiation-scheme consistency

def test_fd_vs_dual_christoffels_all_catalog_charts(kerr, qdot, su2, rng):
    for name, chart in catalog_charts(kerr, qdot, su2).items():
        for _ in range(5):
            x = sample_chart_point(name, chart, rng)
            ginv = inverse_metric_at(chart, x)
            _, dg_dual = dual_jacobian(chart.metric, x)
            _, dg_fd = fd_jacobian(chart.metric, x)
            g_dual = christoffel_at(chart, x, ginv=ginv, dg=dg_dual)
            g_fd = christoffel_at(chart, x, ginv=ginv, dg=dg_fd)
            scale = max(1.0, float(np.max(np.abs(g_dual))))
            assert np.max(np.abs(g_dual - g_fd)) < 1e-6 * scale, name


def test_kerr_analytic_partials_match_dual_mode(kerr, rng):
    chart = kerr.chart
    for _ in range(10):
        x = sample_chart_point("kerr", chart, rng)
        analytic = chart.metric_partials(x)
        _, dual = dual_jacobian(chart.metric, x)
        scale = max(1.0, float(np.max(np.abs(dual))))
        assert np.max(np.abs(analytic - dual)) < 1e-12 * scale


def test_fd_partials_consistent_with_analytic_axial(rng):
    chart = axial_chart()
    for _ in range(5):
        x = np.array([rng.uniform(0.5, 2.0), 0.0, 1.0])
        analytic = chart.metric_partials(x)
        _, fd = fd_jacobian(chart.metric, x)
        assert np.max(np.abs(analytic - fd)) < 1e-9

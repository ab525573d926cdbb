"""Coordinate charts, metrics, connection coefficients, covariant derivatives.

Conventions, fixed once for the whole package:

* the metric closure returns the lower-index matrix g_{mu nu}(x);
* momenta are covariant (lower index), velocities are derived;
* partial-derivative arrays carry the differentiation index first,
  ``partials[lam, mu, nu] = d_lam g_{mu nu}``;
* Christoffel symbols are stored with the contravariant index LAST,
  ``Gamma[lam, nu, mu] = Gamma_{lam nu}^{mu}``, symmetric in (lam, nu).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .diff import DifferentiationScheme, dual_jacobian, fd_jacobian
from .errors import OutOfDomain, SingularMetric


@dataclass(frozen=True)
class MetricChart:
    """A coordinate chart with metric and a validity predicate.

    ``domain`` marks exclusion zones (coordinate singularities, horizons);
    operations refuse points outside it rather than returning garbage.
    ``boundary_distance`` is an optional scalar proximity measure used by the
    integrator's margin stop.
    """

    dim: int
    coordinate_names: tuple[str, ...]
    metric: Callable[[np.ndarray], object]
    metric_partials: Callable[[np.ndarray], np.ndarray] | None = None
    domain: Callable[[np.ndarray], bool] = field(default=lambda x: True)
    signature_hint: tuple[int, ...] | None = None
    boundary_distance: Callable[[np.ndarray], float] | None = None
    singularity_tolerance: float = 1e-12
    scheme: DifferentiationScheme = field(default=DifferentiationScheme("auto"))

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("chart dimension must be positive")
        if len(self.coordinate_names) != self.dim:
            raise ValueError("need one coordinate name per dimension")

    def in_domain(self, x: np.ndarray) -> bool:
        return bool(self.domain(np.asarray(x, dtype=float)))

    def require_domain(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.domain(x):
            raise OutOfDomain(
                f"point {x.tolist()} outside chart domain "
                f"({', '.join(self.coordinate_names)})")
        return x


def metric_at(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    x = chart.require_domain(x)
    g = np.asarray(chart.metric(x), dtype=float)
    return g


def inverse_metric_at(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    g = metric_at(chart, x)
    det = np.linalg.det(g)
    # scale-free near-singularity test: Hadamard ratio |det| / prod(row sups)
    hadamard = float(np.prod(np.max(np.abs(g), axis=1)))
    if abs(det) <= chart.singularity_tolerance * hadamard or hadamard == 0.0:
        raise SingularMetric(f"|det g| = {abs(det):.3e} at {x}")
    ginv = np.linalg.inv(g)
    return 0.5 * (ginv + ginv.T)


def metric_partials_at(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """d_lam g_{mu nu}, shape (d, d, d), derivative index first."""
    x = chart.require_domain(x)
    return chart.scheme.partials(chart.metric, x, analytic=chart.metric_partials)


def christoffel_at(chart: MetricChart, x: np.ndarray,
                   ginv: np.ndarray | None = None,
                   dg: np.ndarray | None = None) -> np.ndarray:
    """Gamma_{lam nu}^{mu} = 1/2 g^{mu k}(d_lam g_{k nu} + d_nu g_{k lam} - d_k g_{lam nu}).

    Returned as Gamma[lam, nu, mu] (contravariant index last).
    """
    if ginv is None:
        ginv = inverse_metric_at(chart, x)
    if dg is None:
        dg = metric_partials_at(chart, x)
    a = np.einsum("lkn->lnk", dg)     # d_lam g_{k nu} as [lam, nu, k]
    b = np.einsum("nkl->lnk", dg)     # d_nu  g_{k lam}
    c = np.einsum("kln->lnk", dg)     # d_k   g_{lam nu}
    return 0.5 * np.einsum("mk,lnk->lnm", ginv, a + b - c)


def _field_partials(chart: MetricChart, fieldobj, x: np.ndarray) -> np.ndarray:
    analytic = getattr(fieldobj, "partials", None)
    return chart.scheme.partials(fieldobj.components, x, analytic=analytic)


def covariant_tensor_derivative(chart: MetricChart, fieldobj, x: np.ndarray,
                                return_parts: bool = False):
    """nabla_lam G^{mu_1...mu_n} for a contravariant symmetric tensor field.

    One Christoffel correction per tensor index; rank 0 reduces to the plain
    gradient.  Output is the raw (unsymmetrized) array with the derivative
    index first.  With ``return_parts`` the individual addends (gradient plus
    each correction) are returned as well, for cancellation-aware scales.
    """
    x = chart.require_domain(x)
    rank = fieldobj.rank
    grad = _field_partials(chart, fieldobj, x)
    parts = [grad]
    if rank > 0:
        gamma = christoffel_at(chart, x)
        comps = np.asarray(fieldobj.components(x), dtype=float)
        for slot in range(rank):
            # Gamma[lam, kappa, mu_slot] G^{...kappa...}
            corr = np.tensordot(gamma, comps, axes=([1], [slot]))
            corr = np.moveaxis(corr, 1, 1 + slot)
            parts.append(corr)
    total = parts[0] if len(parts) == 1 else np.sum(parts, axis=0)
    if return_parts:
        return total, parts
    return total


def raise_first_index(ginv: np.ndarray, arr: np.ndarray) -> np.ndarray:
    return np.tensordot(ginv, arr, axes=([1], [0]))


def _matrix_inverse_generic(m: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse over generic scalars (floats or duals), so the
    inverse metric can be differentiated in forward mode."""
    from .diff import value

    n = m.shape[0]
    a = [[m[i, j] for j in range(n)] for i in range(n)]
    inv = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(value(a[r][col])))
        if value(a[pivot][col]) == 0.0:
            raise SingularMetric("metric not invertible")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        diag = a[col][col]
        a[col] = [v / diag for v in a[col]]
        inv[col] = [v / diag for v in inv[col]]
        for row in range(n):
            if row == col:
                continue
            factor = a[row][col]
            if isinstance(factor, float) and factor == 0.0:
                continue
            a[row] = [v - factor * w for v, w in zip(a[row], a[col])]
            inv[row] = [v - factor * w for v, w in zip(inv[row], inv[col])]
    return np.array(inv, dtype=object)


def inverse_metric_field(chart: MetricChart):
    """The inverse metric g^{mu nu} as a rank-2 tensor field whose components
    closure stays differentiable in forward mode (used by the metric-postulate
    checks and anywhere nabla g^{-1} is needed)."""
    from .killing import SymmetricTensorField

    def components(x):
        arr = np.asarray(chart.metric(x))
        if arr.dtype == object:
            return _matrix_inverse_generic(arr)
        return inverse_metric_at(chart, x)

    return SymmetricTensorField(rank=2, dim=chart.dim, components=components,
                                name="inverse-metric")


def euclidean_chart(dim: int = 2,
                    names: Sequence[str] | None = None) -> MetricChart:
    """Flat chart with the identity metric."""
    if names is None:
        names = tuple(f"x{i+1}" for i in range(dim))
    eye = np.eye(dim)
    zeros = np.zeros((dim, dim, dim))
    return MetricChart(
        dim=dim,
        coordinate_names=tuple(names),
        metric=lambda x, _e=eye: _e.copy(),
        metric_partials=lambda x, _z=zeros: _z,
        signature_hint=tuple([1] * dim),
        boundary_distance=lambda x: np.inf,
    )


def axial_chart() -> MetricChart:
    """Cylindrical chart (rho, z, phi) with metric diag(1, 1, rho^2); excludes
    the axis rho = 0."""

    def metric(x):
        rho = x[0]
        return np.array([[1.0, 0.0, 0.0],
                         [0.0, 1.0, 0.0],
                         [0.0, 0.0, rho * rho]])

    def partials(x):
        out = np.zeros((3, 3, 3))
        out[0, 2, 2] = 2.0 * x[0]
        return out

    return MetricChart(
        dim=3,
        coordinate_names=("rho", "z", "phi"),
        metric=metric,
        metric_partials=partials,
        domain=lambda x: x[0] > 0.0,
        signature_hint=(1, 1, 1),
        boundary_distance=lambda x: float(x[0]),
    )

"""Abelian and non-abelian gauge backgrounds.

Field strengths are assembled antisymmetrically, so F_{mu nu} = -F_{nu mu}
holds bitwise.  For the curl part of the non-abelian field strength the
covariant derivatives reduce to plain partials: the Christoffel terms cancel
in the antisymmetrized combination, so none are evaluated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .diff import jacobian
from .errors import CovmechError
from .geometry import MetricChart


@dataclass(frozen=True)
class StructureConstants:
    """Structure constants f[a, b, c] = f_{ab}^{ c} of the charge algebra."""

    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.ndim != 3 or len(set(f.shape)) != 1:
            raise ValueError("structure constants must be a cubic array")
        object.__setattr__(self, "f", f)

    @property
    def algebra_dim(self) -> int:
        return self.f.shape[0]

    def antisymmetry_defect(self) -> float:
        return float(np.max(np.abs(self.f + np.swapaxes(self.f, 0, 1))))

    def jacobi_defect(self) -> float:
        # f_{ab}^{ d} f_{dc}^{ e} + cyclic(a, b, c)
        fdf = np.einsum("abd,dce->abce", self.f, self.f)
        cyc = fdf + np.einsum("bcd,dae->abce", self.f, self.f) \
            + np.einsum("cad,dbe->abce", self.f, self.f)
        return float(np.max(np.abs(cyc)))

    def validate(self, tol: float = 1e-14) -> None:
        if self.antisymmetry_defect() != 0.0:
            raise CovmechError("structure constants not antisymmetric")
        if self.jacobi_defect() > tol:
            raise CovmechError("structure constants violate the Jacobi identity")


def su2_structure_constants() -> StructureConstants:
    """so(3)/su(2) in the standard basis: f_{ab}^{ c} = epsilon_{abc}."""
    f = np.zeros((3, 3, 3))
    for a, b, c, s in ((0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
                       (1, 0, 2, -1.0), (2, 1, 0, -1.0), (0, 2, 1, -1.0)):
        f[a, b, c] = s
    return StructureConstants(f)


@dataclass(frozen=True)
class AbelianBackground:
    """Vector potential A_mu(x) coupled with charge q."""

    charge: float
    potential: Callable[[np.ndarray], object]
    potential_partials: Callable[[np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True)
class NonAbelianBackground:
    """Lie-algebra valued potential A[a, mu](x) with coupling g."""

    coupling: float
    structure: StructureConstants
    potential: Callable[[np.ndarray], object]
    potential_partials: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def algebra_dim(self) -> int:
        return self.structure.algebra_dim


@dataclass(frozen=True)
class ScalarPotential:
    """Scalar potential Phi(x) added to the kinetic Hamiltonian."""

    value: Callable[[np.ndarray], object]
    gradient: Callable[[np.ndarray], np.ndarray] | None = None

    def gradient_at(self, chart: MetricChart, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        grad = chart.scheme.partials(
            lambda y: np.asarray([self.value(y)], dtype=object),
            x, analytic=None if self.gradient is None
            else (lambda y: np.asarray(self.gradient(y), float).reshape(-1, 1)))
        return grad[:, 0]


def _potential_partials(bg, chart: MetricChart, x: np.ndarray) -> np.ndarray:
    return chart.scheme.partials(bg.potential, x, analytic=bg.potential_partials)


def field_strength_abelian(bg: AbelianBackground, chart: MetricChart,
                           x: np.ndarray) -> np.ndarray:
    """F_{mu nu} = d_mu A_nu - d_nu A_mu."""
    x = chart.require_domain(x)
    da = _potential_partials(bg, chart, x)          # da[mu, nu] = d_mu A_nu
    return da - da.T


def field_strength_nonabelian(bg: NonAbelianBackground, chart: MetricChart,
                              x: np.ndarray) -> np.ndarray:
    """F^a_{mu nu} = d_mu A^a_nu - d_nu A^a_mu + g f_{bc}^{ a} A^b_mu A^c_nu."""
    x = chart.require_domain(x)
    da = _potential_partials(bg, chart, x)          # da[mu, a, nu]
    curl = np.einsum("man->amn", da) - np.einsum("nam->amn", da)
    a_val = np.asarray(bg.potential(x), dtype=float)
    quad = bg.coupling * np.einsum("bca,bm,cn->amn", bg.structure.f, a_val, a_val)
    quad = 0.5 * (quad - np.swapaxes(quad, 1, 2))
    return curl + quad


def apply_gauge_transformation(bg: AbelianBackground,
                               lam: Callable[[np.ndarray], object],
                               lam_gradient: Callable[[np.ndarray], np.ndarray]
                               | None = None) -> AbelianBackground:
    """Shift the potential by the gradient of a scalar: A' = A + grad(Lambda).

    The returned background produces the same field strength; trajectories are
    untouched because the dynamics only sees F.
    """
    base = bg.potential
    base_partials = bg.potential_partials

    def potential(x):
        a = np.asarray(base(x), dtype=object)
        if lam_gradient is not None:
            grad = lam_gradient(x)
        else:
            grad = jacobian(lambda y: np.asarray([lam(y)], dtype=object),
                            np.asarray(x, dtype=float))[:, 0]
        return a + np.asarray(grad, dtype=object)

    partials = None
    if base_partials is not None and lam_gradient is not None:
        def partials(x):
            hess = jacobian(lambda y: np.asarray(lam_gradient(y), dtype=object), x)
            return np.asarray(base_partials(x), float) + hess

    return AbelianBackground(charge=bg.charge, potential=potential,
                             potential_partials=partials)

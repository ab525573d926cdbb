"""Pre-built systems: Kerr geodesics, the axial quantum-dot pair, and an
SU(2) point charge in the plane, each with its registered constants of motion
and deliberately broken negative-control variants.

Conventions fixed here (and asserted by the test suite):

* Kerr uses Boyer-Lindquist coordinates (t, r, theta, phi), signature -+++,
  exterior domain r > r_+ with the axis excluded; pi_t is negative for
  future-directed orbits.  The Carter tensor ships in the bracket-verified
  form whose angular term is r^2 (a sin(theta) pi_t + pi_phi / sin(theta))^2;
  the variant with r^2 (a pi_t + pi_phi / sin^2(theta))^2 is available as
  ``carter_variant="printed"`` and fails conservation (negative control).
* The quantum dot absorbs charge and mass (m = 1); the magnetic field enters
  only through the Larmor frequency, with field term q F_{rho phi} =
  +2 omega_L rho, the sign under which the registered quartic invariant
  commutes with H (the opposite sign fails by construction and is used as a
  detuned-adjacent sanity check in the tests).
* The SU(2) background uses structure constants epsilon_{abc} and the
  rotation-gauge-fixed potential A^a_i = -1/2 eps_{ij} x^j B^a; gauge charges
  are dynamical phase-space variables, so conservation of the registered
  observables exercises the full charge-sector bracket.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .diff import cos, sin, sqrt
from .dynamics import HamiltonianSpec
from .errors import DetunedParameters, ExtremalParams
from .gauge import (AbelianBackground, NonAbelianBackground, ScalarPotential,
                    su2_structure_constants)
from .geometry import MetricChart, axial_chart, euclidean_chart
from .killing import (GeneratorSeries, SymmetricTensorField,
                      field_from_monomials, series_observable)
from .phase import BracketContext, Observable, PhasePoint, \
    momentum_observable


@dataclass(frozen=True)
class NegativeControl:
    """A variant that must FAIL its check, guarding against vacuous tests."""

    name: str
    check: str                      # "conserved" | "hierarchy"
    observable: Observable | None = None
    series: GeneratorSeries | None = None
    tolerance: float = 1e-8          # tolerance of the matching positive check
    min_failure_ratio: float = 1e3   # must exceed tolerance by this factor


@dataclass(eq=False)
class CatalogSystem:
    name: str
    params: dict
    chart: MetricChart
    ctx: BracketContext
    hamiltonian: HamiltonianSpec
    observables: dict[str, Observable]
    conserved_tolerances: dict[str, float]
    killing_fields: dict[str, SymmetricTensorField] = field(default_factory=dict)
    killing_tolerances: dict[str, float] = field(default_factory=dict)
    series: dict[str, GeneratorSeries] = field(default_factory=dict)
    hierarchy_tolerances: dict[str, float] = field(default_factory=dict)
    closure_pairs: tuple = ()
    negative_controls: tuple = ()
    default_initial: PhasePoint | None = None
    default_span: float = 100.0
    sample: Callable = None
    initial_charges: np.ndarray | None = None

    def observable(self, name: str) -> Observable:
        return self.observables[name]


def _momentum_ball(rng, dim: int, scale: float) -> np.ndarray:
    v = rng.normal(size=dim)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return np.zeros(dim)
    r = rng.uniform() ** (1.0 / dim)
    return scale * r * v / norm


def _sphere(rng, dim: int, radius: float) -> np.ndarray:
    v = rng.normal(size=dim)
    return radius * v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# Kerr

@dataclass(frozen=True)
class KerrParams:
    """Black-hole mass M and angular momentum per unit mass a = J/M."""

    M: float = 1.0
    a: float = 0.8

    def __post_init__(self):
        if self.M <= 0:
            raise ExtremalParams("mass must be positive")
        if abs(self.a) >= self.M:
            raise ExtremalParams(
                f"|a| = {abs(self.a)} >= M = {self.M}: not subextremal")

    @property
    def outer_horizon(self) -> float:
        return self.M + math.sqrt(self.M ** 2 - self.a ** 2)


def kerr_chart(params: KerrParams) -> MetricChart:
    """Boyer-Lindquist chart; exclusion zones are the horizon Delta^2 = 0 and
    the axis sin(theta) = 0."""
    M, a = params.M, params.a
    rp = params.outer_horizon

    def metric(x):
        _, r, th, _ = x
        s = sin(th)
        c = cos(th)
        s2 = s * s
        p = r * r + a * a * c * c
        dd = r * r - 2.0 * M * r + a * a
        gtt = -(1.0 - 2.0 * M * r / p)
        gtf = -2.0 * M * a * r * s2 / p
        return np.array([
            [gtt, 0.0, 0.0, gtf],
            [0.0, p / dd, 0.0, 0.0],
            [0.0, 0.0, p, 0.0],
            [gtf, 0.0, 0.0, (r * r + a * a + 2.0 * M * a * a * r * s2 / p) * s2],
        ])

    def metric_partials(x):
        _, r, th, _ = x
        s = math.sin(th)
        c = math.cos(th)
        s2 = s * s
        p = r * r + a * a * c * c
        dd = r * r - 2.0 * M * r + a * a
        p2 = p * p
        out = np.zeros((4, 4, 4))
        out[1, 0, 0] = 2.0 * M * (p - 2.0 * r * r) / p2
        out[2, 0, 0] = 4.0 * M * a * a * r * s * c / p2
        out[1, 0, 3] = out[1, 3, 0] = -2.0 * M * a * s2 * (p - 2.0 * r * r) / p2
        out[2, 0, 3] = out[2, 3, 0] = \
            -4.0 * M * a * r * s * c * (r * r + a * a) / p2
        out[1, 1, 1] = (2.0 * r * dd - p * (2.0 * r - 2.0 * M)) / (dd * dd)
        out[2, 1, 1] = -2.0 * a * a * s * c / dd
        out[1, 2, 2] = 2.0 * r
        out[2, 2, 2] = -2.0 * a * a * s * c
        out[1, 3, 3] = 2.0 * r * s2 + 2.0 * M * a * a * s2 * s2 \
            * (p - 2.0 * r * r) / p2
        out[2, 3, 3] = 2.0 * s * c * (r * r + a * a) \
            + 2.0 * M * a * a * r * s2 * s * c * (4.0 * p + 2.0 * a * a * s2) / p2
        return out

    def domain(x):
        r, th = x[1], x[2]
        return r > rp and 0.0 < th < math.pi

    def boundary_distance(x):
        r, th = x[1], x[2]
        return float(min(r - rp, th, math.pi - th))

    return MetricChart(
        dim=4,
        coordinate_names=("t", "r", "theta", "phi"),
        metric=metric,
        metric_partials=metric_partials,
        domain=domain,
        signature_hint=(-1, 1, 1, 1),
        boundary_distance=boundary_distance,
    )


def carter_tensor(params: KerrParams,
                  variant: str = "verified") -> SymmetricTensorField:
    """Rank-2 tensor K^{mu nu} of the quadratic invariant K = 1/2 K^{mu nu}
    pi_mu pi_nu.  ``variant="printed"`` selects the angular term
    r^2 (a pi_t + pi_phi / sin^2 theta)^2, which is NOT conserved."""
    if variant not in ("verified", "printed"):
        raise ValueError(f"unknown Carter variant {variant!r}")
    M, a = params.M, params.a

    def components(x):
        _, r, th, _ = x
        s = sin(th)
        c = cos(th)
        s2 = s * s
        c2 = c * c
        r2 = r * r
        p = r2 + a * a * c2
        dd = r2 - 2.0 * M * r + a * a
        ra2 = r2 + a * a
        if variant == "verified":
            ktt = (r2 * a * a * s2 + a * a * c2 * ra2 * ra2 / dd) / p
            ktf = (r2 * a + a * a * a * c2 * ra2 / dd) / p
            kff = (r2 / s2 + a ** 4 * c2 / dd) / p
        else:
            ktt = (r2 * a * a + a * a * c2 * ra2 * ra2 / dd) / p
            ktf = (r2 * a / s2 + a * a * a * c2 * ra2 / dd) / p
            kff = (r2 / (s2 * s2) + a ** 4 * c2 / dd) / p
        krr = -dd * a * a * c2 / p
        khh = r2 / p
        return np.array([
            [ktt, 0.0, 0.0, ktf],
            [0.0, krr, 0.0, 0.0],
            [0.0, 0.0, khh, 0.0],
            [ktf, 0.0, 0.0, kff],
        ])

    return SymmetricTensorField(rank=2, dim=4, components=components,
                                name=f"carter-{variant}")


def carter_series(params: KerrParams,
                  variant: str = "verified") -> GeneratorSeries:
    terms: list[SymmetricTensorField | None] = [None, None,
                                                carter_tensor(params, variant)]
    return GeneratorSeries(tuple(terms), weighted=True,
                           name="K_carter" if variant == "verified"
                           else "K_carter_printed")


def kerr_bound_orbit(params: KerrParams,
                     energy: float = 0.96, angular_momentum: float = 3.0,
                     r0: float = 10.0, theta0: float = math.pi / 3.0,
                     ) -> PhasePoint:
    """Generic non-equatorial bound initial data on the mass shell
    g^{mu nu} pi_mu pi_nu = -1 (proper-time parametrization, pi_r = 0)."""
    M, a = params.M, params.a
    pt, pph = -energy, angular_momentum
    s = math.sin(theta0)
    r2 = r0 * r0
    p = r2 + a * a * math.cos(theta0) ** 2
    dd = r2 - 2.0 * M * r0 + a * a
    ang = a * s * pt + pph / s
    lin = (r2 + a * a) * pt + a * pph
    pth_sq = -p - ang * ang + lin * lin / dd
    if pth_sq <= 0.0:
        raise ValueError("no timelike solution with pi_r = 0 at these values")
    return PhasePoint.make([0.0, r0, theta0, 0.0],
                           [pt, 0.0, math.sqrt(pth_sq), pph])


def build_kerr(params: KerrParams = KerrParams(),
               carter_variant: str = "verified") -> CatalogSystem:
    """Kerr geodesics with registered observables {H, p_t, p_phi, K_carter}."""
    chart = kerr_chart(params)
    ctx = BracketContext(chart=chart)
    ham = HamiltonianSpec(mass=1.0, ctx=ctx)
    kfield = carter_tensor(params, carter_variant)
    kobs = series_observable(carter_series(params, carter_variant),
                             name="K_carter")
    printed = series_observable(carter_series(params, "printed"),
                                name="K_carter_printed")
    observables = {
        "H": ham.observable(),
        "p_t": momentum_observable(0, "p_t"),
        "p_phi": momentum_observable(3, "p_phi"),
        "K_carter": kobs,
    }

    M = params.M

    def sample(rng) -> PhasePoint:
        x = np.array([rng.uniform(0.0, 1.0),
                      rng.uniform(3.0 * M, 20.0 * M),
                      rng.uniform(0.2, math.pi - 0.2),
                      rng.uniform(0.0, 2.0 * math.pi)])
        return PhasePoint.make(x, _momentum_ball(rng, 4, 1.0))

    system = CatalogSystem(
        name="kerr",
        params={"M": params.M, "a": params.a},
        chart=chart,
        ctx=ctx,
        hamiltonian=ham,
        observables=observables,
        conserved_tolerances={"H": 1e-10, "p_t": 1e-10, "p_phi": 1e-10,
                              "K_carter": 1e-8},
        killing_fields={"K_carter": kfield},
        killing_tolerances={"K_carter": 1e-8},
        series={"K_carter": carter_series(params, carter_variant)},
        hierarchy_tolerances={"K_carter": 1e-8},
        closure_pairs=(("p_phi", "K_carter", 1e-7),),
        negative_controls=(
            NegativeControl(name="K_carter_printed", check="conserved",
                            observable=printed, tolerance=1e-8),
        ),
        default_initial=kerr_bound_orbit(params),
        default_span=1000.0,
        sample=sample,
    )
    return system


# ---------------------------------------------------------------------------
# quantum dot

@dataclass(frozen=True)
class QuantumDotParams:
    """Axial two-electron dot: harmonic frequencies, Larmor frequency
    (omega_L = eB/2), and Coulomb strength."""

    omega0: float = 1.0
    omega_z: float = 1.0
    omega_L: float = math.sqrt(3.0)
    kappa: float = 0.5

    def __post_init__(self):
        if self.omega0 <= 0 or self.omega_z <= 0:
            raise ValueError("harmonic frequencies must be positive")

    @property
    def tuned(self) -> bool:
        lhs = self.omega_L ** 2 + self.omega0 ** 2
        rhs = 4.0 * self.omega_z ** 2
        return abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


def quantum_dot_background(params: QuantumDotParams) -> AbelianBackground:
    wl = params.omega_L

    def potential(x):
        rho = x[0]
        return np.array([0.0, 0.0, wl * rho * rho])

    def potential_partials(x):
        out = np.zeros((3, 3))
        out[0, 2] = 2.0 * wl * x[0]
        return out

    return AbelianBackground(charge=1.0, potential=potential,
                             potential_partials=potential_partials)


def quantum_dot_potential(params: QuantumDotParams) -> ScalarPotential:
    w0sq = params.omega0 ** 2
    wzsq = params.omega_z ** 2
    kap = params.kappa

    def value(x):
        rho, z = x[0], x[1]
        return 0.5 * (w0sq * rho * rho + wzsq * z * z) \
            - kap / sqrt(rho * rho + z * z)

    def gradient(x):
        rho, z = x[0], x[1]
        s3 = (rho * rho + z * z) ** 1.5
        return np.array([w0sq * rho + kap * rho / s3,
                         wzsq * z + kap * z / s3,
                         0.0])

    return ScalarPotential(value=value, gradient=gradient)


def quantum_dot_quartic_series(params: QuantumDotParams,
                               allow_detuned: bool = False) -> GeneratorSeries:
    """The registered rank-4 invariant as a monomial-coefficient series in
    (pi_rho, pi_z, pi_phi); a constant of motion only under the tuning
    omega_L^2 + omega0^2 = 4 omega_z^2."""
    if not params.tuned and not allow_detuned:
        raise DetunedParameters(
            "quartic invariant requires omega_L^2 + omega0^2 = 4 omega_z^2")
    w0sq = params.omega0 ** 2
    wzsq = params.omega_z ** 2
    wl = params.omega_L
    wlsq = wl * wl
    kap = params.kappa

    def s(x):
        return sqrt(x[0] * x[0] + x[1] * x[1])

    c4 = field_from_monomials(3, 4, {
        (1, 1, 1, 1): lambda x: x[0] * x[0],
        (0, 1, 1, 1): lambda x: -2.0 * x[0] * x[1],
        (0, 0, 1, 1): lambda x: x[1] * x[1],
        (2, 2, 2, 2): lambda x: 1.0 / (x[0] * x[0]),
        (0, 0, 2, 2): lambda x: 1.0,
        (1, 1, 2, 2): lambda x: 2.0 + x[1] * x[1] / (x[0] * x[0]),
    }, name="quartic-rank4")
    c3 = field_from_monomials(3, 3, {
        (0, 0, 2): lambda x: 2.0 * wl * x[0] * x[0],
        (1, 1, 2): lambda x: 2.0 * wl * (2.0 * x[0] * x[0] + x[1] * x[1]),
    }, name="quartic-rank3")
    c2 = field_from_monomials(3, 2, {
        (0, 1): lambda x: 2.0 * wzsq * x[1] ** 3 * x[0]
        + 2.0 * kap * x[1] * x[0] / s(x),
        (1, 1): lambda x: (2.0 * wzsq - w0sq) * x[1] * x[1] * x[0] * x[0]
        + 2.0 * wlsq * x[0] ** 4 - 2.0 * kap * x[0] * x[0] / s(x),
        (0, 0): lambda x: wlsq * x[0] ** 4,
        (2, 2): lambda x: 2.0 * wzsq * x[1] * x[1]
        + (w0sq - 5.0 * wlsq) * x[0] * x[0] - 2.0 * kap / s(x),
    }, name="quartic-rank2")
    c1 = field_from_monomials(3, 1, {
        (2,): lambda x: -2.0 * wl * ((3.0 * wlsq - w0sq) * x[0] ** 4
                                     - 2.0 * wzsq * x[0] * x[0] * x[1] * x[1]
                                     + 2.0 * kap * x[0] * x[0] / s(x)),
    }, name="quartic-rank1")
    c0 = field_from_monomials(3, 0, {
        (): lambda x: wzsq * wzsq * x[0] * x[0] * x[1] ** 4
        + 2.0 * wzsq * wlsq * x[0] ** 4 * x[1] * x[1]
        - wlsq * (3.0 * wlsq - 4.0 * wzsq) * x[0] ** 6
        + 2.0 * kap / s(x) * (wzsq * x[0] * x[0] * x[1] * x[1]
                              - wlsq * x[0] ** 4)
        + 0.5 * kap * kap * (x[0] * x[0] - x[1] * x[1])
        / (x[0] * x[0] + x[1] * x[1]),
    }, name="quartic-rank0")
    return GeneratorSeries((c0, c1, c2, c3, c4), weighted=False, name="G4")


def build_quantum_dot(params: QuantumDotParams = QuantumDotParams(),
                      include_quartic: bool | None = None) -> CatalogSystem:
    """Axial quantum-dot system with registered {H, J, G4}; G4 only when the
    tuning condition holds (DetunedParameters otherwise)."""
    chart = axial_chart()
    ctx = BracketContext(chart=chart,
                         background=quantum_dot_background(params),
                         scalar_potential=quantum_dot_potential(params))
    ham = HamiltonianSpec(mass=1.0, ctx=ctx)
    wl = params.omega_L

    jobs = Observable(
        name="J",
        eval=lambda p: p.pi[2] + wl * p.x[0] * p.x[0],
        dpi=lambda p: np.array([0.0, 0.0, 1.0]),
        dx=lambda p: np.array([2.0 * wl * p.x[0], 0.0, 0.0]),
        dt=lambda p: np.zeros(0),
    )
    observables = {"H": ham.observable(), "J": jobs}
    conserved_tol = {"H": 1e-10, "J": 1e-10}
    series = {}
    hierarchy_tol = {}
    if include_quartic is None:
        include_quartic = params.tuned
    if include_quartic:
        quartic = quantum_dot_quartic_series(params)
        observables["G4"] = series_observable(quartic, name="G4")
        conserved_tol["G4"] = 1e-7
        series["G4"] = quartic
        hierarchy_tol["G4"] = 1e-7

    controls = []
    if params.tuned and params.omega_L > 0:
        detuned = QuantumDotParams(omega0=params.omega0,
                                   omega_z=params.omega_z,
                                   omega_L=1.1 * params.omega_L,
                                   kappa=params.kappa)
        controls.append(NegativeControl(
            name="G4_detuned", check="hierarchy",
            series=quantum_dot_quartic_series(detuned, allow_detuned=True),
            tolerance=1e-7))

    def sample(rng) -> PhasePoint:
        x = np.array([rng.uniform(0.3, 2.0),
                      rng.uniform(-1.5, 1.5),
                      rng.uniform(0.0, 2.0 * math.pi)])
        return PhasePoint.make(x, _momentum_ball(rng, 3, 1.0))

    return CatalogSystem(
        name="quantum-dot",
        params={"omega0": params.omega0, "omega_z": params.omega_z,
                "omega_L": params.omega_L, "kappa": params.kappa},
        chart=chart,
        ctx=ctx,
        hamiltonian=ham,
        observables=observables,
        conserved_tolerances=conserved_tol,
        series=series,
        hierarchy_tolerances=hierarchy_tol,
        closure_pairs=(("J", "G4", 1e-6),) if include_quartic else (),
        negative_controls=tuple(controls),
        default_initial=PhasePoint.make([1.1, 0.4, 0.2], [0.3, -0.2, 0.7]),
        default_span=1000.0,
        sample=sample,
    )


# ---------------------------------------------------------------------------
# SU(2) plane

@dataclass(frozen=True)
class SU2PlaneParams:
    """Coupling g, constant adjoint field B^a, and the initial gauge charge."""

    coupling: float = 0.7
    B: tuple[float, float, float] = (0.6, -0.8, 1.0)
    t0: tuple[float, float, float] = (0.6, 0.0, 0.8)

    def __post_init__(self):
        if np.linalg.norm(self.B) == 0.0:
            raise ValueError("field direction must be nonzero")


def su2_plane_background(params: SU2PlaneParams) -> NonAbelianBackground:
    b = np.asarray(params.B, dtype=float)

    def potential(x):
        # A^a_i = -1/2 eps_{ij} x^j B^a
        return np.array([[-0.5 * x[1] * b[a], 0.5 * x[0] * b[a]]
                         for a in range(3)])

    def potential_partials(x):
        out = np.zeros((2, 3, 2))
        out[1, :, 0] = -0.5 * b
        out[0, :, 1] = 0.5 * b
        return out

    return NonAbelianBackground(coupling=params.coupling,
                                structure=su2_structure_constants(),
                                potential=potential,
                                potential_partials=potential_partials)


def _su2_invariants(params: SU2PlaneParams) -> dict[str, Observable]:
    g = params.coupling
    b = np.asarray(params.B, dtype=float)

    def s_of(p):
        return g * float(b @ p.t)

    def jorb(p):
        return p.x[0] * p.pi[1] - p.x[1] * p.pi[0]

    def xsq(p):
        return float(p.x @ p.x)

    jfull = Observable(
        name="J",
        eval=lambda p: jorb(p) + 0.5 * s_of(p) * xsq(p),
        dpi=lambda p: np.array([-p.x[1], p.x[0]]),
        dx=lambda p: np.array([p.pi[1] + s_of(p) * p.x[0],
                               -p.pi[0] + s_of(p) * p.x[1]]),
        dt=lambda p: 0.5 * g * b * xsq(p),
    )

    def k1_eval(p):
        s = s_of(p)
        return (p.x[0] * float(p.pi @ p.pi) - p.pi[0] * float(p.pi @ p.x)
                + s * (0.5 * p.pi[1] * xsq(p) + p.x[0] * jorb(p))
                + 0.5 * s * s * p.x[0] * xsq(p))

    def k1_dpi(p):
        s = s_of(p)
        return np.array([
            -p.pi[1] * p.x[1] - s * p.x[0] * p.x[1],
            2.0 * p.x[0] * p.pi[1] - p.pi[0] * p.x[1]
            + 0.5 * s * (3.0 * p.x[0] ** 2 + p.x[1] ** 2),
        ])

    def k1_dx(p):
        s = s_of(p)
        return np.array([
            p.pi[1] ** 2 + s * (3.0 * p.x[0] * p.pi[1] - p.x[1] * p.pi[0])
            + 0.5 * s * s * (3.0 * p.x[0] ** 2 + p.x[1] ** 2),
            -p.pi[0] * p.pi[1] + s * (p.pi[1] * p.x[1] - p.pi[0] * p.x[0])
            + s * s * p.x[0] * p.x[1],
        ])

    def k1_dt(p):
        s = s_of(p)
        return g * b * (0.5 * p.pi[1] * xsq(p) + p.x[0] * jorb(p)
                        + s * p.x[0] * xsq(p))

    def k2_eval(p):
        s = s_of(p)
        return (p.x[1] * float(p.pi @ p.pi) - p.pi[1] * float(p.pi @ p.x)
                + s * (-0.5 * p.pi[0] * xsq(p) + p.x[1] * jorb(p))
                + 0.5 * s * s * p.x[1] * xsq(p))

    def k2_dpi(p):
        s = s_of(p)
        return np.array([
            2.0 * p.x[1] * p.pi[0] - p.pi[1] * p.x[0]
            - 0.5 * s * (p.x[0] ** 2 + 3.0 * p.x[1] ** 2),
            -p.pi[0] * p.x[0] + s * p.x[0] * p.x[1],
        ])

    def k2_dx(p):
        s = s_of(p)
        return np.array([
            -p.pi[0] * p.pi[1] + s * (p.x[1] * p.pi[1] - p.x[0] * p.pi[0])
            + s * s * p.x[0] * p.x[1],
            p.pi[0] ** 2 + s * (p.x[0] * p.pi[1] - 3.0 * p.x[1] * p.pi[0])
            + 0.5 * s * s * (p.x[0] ** 2 + 3.0 * p.x[1] ** 2),
        ])

    def k2_dt(p):
        s = s_of(p)
        return g * b * (-0.5 * p.pi[0] * xsq(p) + p.x[1] * jorb(p)
                        + s * p.x[1] * xsq(p))

    casimir = Observable(
        name="casimir",
        eval=lambda p: float(p.t @ p.t),
        dpi=lambda p: np.zeros(2),
        dx=lambda p: np.zeros(2),
        dt=lambda p: 2.0 * p.t,
    )
    return {
        "J": jfull,
        "K_x": Observable(name="K_x", eval=k1_eval, dpi=k1_dpi, dx=k1_dx,
                          dt=k1_dt),
        "K_y": Observable(name="K_y", eval=k2_eval, dpi=k2_dpi, dx=k2_dx,
                          dt=k2_dt),
        "casimir": casimir,
        "J_naive": Observable(
            name="J_naive",
            eval=jorb,
            dpi=lambda p: np.array([-p.x[1], p.x[0]]),
            dx=lambda p: np.array([p.pi[1], -p.pi[0]]),
            dt=lambda p: np.zeros(3),
        ),
    }


def su2_runge_lenz_fields() -> dict[str, SymmetricTensorField]:
    """The pure rank-2 (flat Killing tensor) parts of the Runge-Lenz pair."""
    kx = field_from_monomials(2, 2, {
        (1, 1): lambda x: x[0],
        (0, 1): lambda x: -x[1],
    }, name="runge-lenz-x")
    ky = field_from_monomials(2, 2, {
        (0, 0): lambda x: x[1],
        (0, 1): lambda x: -x[0],
    }, name="runge-lenz-y")
    return {"K_x_rank2": kx, "K_y_rank2": ky}


def build_su2_plane(params: SU2PlaneParams = SU2PlaneParams()) -> CatalogSystem:
    """Non-abelian point charge in the plane with registered
    {H, casimir, J, K_x, K_y}; the charge-stripped J is the negative control."""
    chart = euclidean_chart(2, ("x", "y"))
    ctx = BracketContext(chart=chart, background=su2_plane_background(params))
    ham = HamiltonianSpec(mass=1.0, ctx=ctx)
    inv = _su2_invariants(params)
    observables = {"H": ham.observable(), "casimir": inv["casimir"],
                   "J": inv["J"], "K_x": inv["K_x"], "K_y": inv["K_y"]}
    t0 = np.asarray(params.t0, dtype=float)

    def sample(rng) -> PhasePoint:
        x = rng.uniform(-2.0, 2.0, size=2)
        return PhasePoint.make(x, _momentum_ball(rng, 2, 1.0),
                               _sphere(rng, 3, np.linalg.norm(t0)))

    return CatalogSystem(
        name="su2-plane",
        params={"coupling": params.coupling, "B": list(params.B),
                "t0": list(params.t0)},
        chart=chart,
        ctx=ctx,
        hamiltonian=ham,
        observables=observables,
        conserved_tolerances={"H": 1e-10, "casimir": 1e-9, "J": 1e-9,
                              "K_x": 1e-9, "K_y": 1e-9},
        killing_fields=su2_runge_lenz_fields(),
        killing_tolerances={"K_x_rank2": 1e-10, "K_y_rank2": 1e-10},
        closure_pairs=(("J", "K_x", 1e-6),),
        negative_controls=(
            NegativeControl(name="J_naive", check="conserved",
                            observable=inv["J_naive"], tolerance=1e-9),
        ),
        default_initial=PhasePoint.make([1.0, 0.0], [0.4, 0.9], t0),
        default_span=1000.0,
        sample=sample,
        initial_charges=t0,
    )


# ---------------------------------------------------------------------------
# free particle (plumbing checks and CLI demos)

def build_free_particle(dim: int = 2) -> CatalogSystem:
    chart = euclidean_chart(dim)
    ctx = BracketContext(chart=chart)
    ham = HamiltonianSpec(mass=1.0, ctx=ctx)
    observables = {"H": ham.observable()}
    for i in range(dim):
        observables[f"p_{chart.coordinate_names[i]}"] = momentum_observable(
            i, f"p_{chart.coordinate_names[i]}")

    def sample(rng) -> PhasePoint:
        return PhasePoint.make(rng.uniform(-2.0, 2.0, size=dim),
                               _momentum_ball(rng, dim, 1.0))

    return CatalogSystem(
        name="free-particle",
        params={"dim": dim},
        chart=chart,
        ctx=ctx,
        hamiltonian=ham,
        observables=observables,
        conserved_tolerances={name: 1e-12 for name in observables},
        default_initial=PhasePoint.make([0.0] * dim, [1.0] + [0.5] * (dim - 1)),
        default_span=10.0,
        sample=sample,
    )


BUILDERS = {
    "kerr": lambda params: build_kerr(KerrParams(**params)),
    "quantum-dot": lambda params: build_quantum_dot(QuantumDotParams(**params)),
    "su2-plane": lambda params: build_su2_plane(_su2_params(params)),
    "free-particle": lambda params: build_free_particle(**params),
}


def _su2_params(params: dict) -> SU2PlaneParams:
    kw = dict(params)
    if "B" in kw:
        kw["B"] = tuple(kw["B"])
    if "t0" in kw:
        kw["t0"] = tuple(kw["t0"])
    return SU2PlaneParams(**kw)


def build_system(name: str, params: dict | None = None) -> CatalogSystem:
    if name not in BUILDERS:
        raise KeyError(f"unknown catalog system {name!r}; "
                       f"available: {sorted(BUILDERS)}")
    return BUILDERS[name](params or {})

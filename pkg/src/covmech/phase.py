"""Covariant phase space: points, observables, and the covariant bracket.

One bracket implementation serves all three regimes.  The field-strength and
charge-algebra terms are toggled by what the context carries:

    {G, K} = D_mu G dK/dpi_mu - dG/dpi_mu D_mu K
             + Q_{mu nu} dG/dpi_mu dK/dpi_nu            (Q = qF or g t_a F^a)
             + f_{ab}^{ c} t_c dG/dt_a dK/dt_b          (non-abelian only)

    D_mu G = dG/dx^mu + Gamma_{mu nu}^{ lam} pi_lam dG/dpi_nu
             + g f_{ab}^{ c} t_c A^a_mu dG/dt_b         (non-abelian only)

The antisymmetric pieces are assembled pairwise so that bracket antisymmetry
and {G, G} = 0 hold bitwise, not merely to rounding.

Sign convention: dG/dtau = {G, H} and {x^mu, pi_nu} = +delta^mu_nu.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .diff import fd_step
from .errors import CovmechError
from .gauge import (AbelianBackground, NonAbelianBackground, ScalarPotential,
                    field_strength_abelian, field_strength_nonabelian)
from .geometry import (MetricChart, christoffel_at, inverse_metric_at,
                       metric_at, metric_partials_at)

_EMPTY = np.zeros(0)


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """Position, covariant momenta, and optional internal gauge charges."""

    x: np.ndarray
    pi: np.ndarray
    t: np.ndarray = field(default_factory=lambda: _EMPTY.copy())

    @staticmethod
    def make(x, pi, t=None) -> "PhasePoint":
        return PhasePoint(np.asarray(x, dtype=float),
                          np.asarray(pi, dtype=float),
                          _EMPTY.copy() if t is None else np.asarray(t, dtype=float))

    def replace(self, **kw) -> "PhasePoint":
        return dataclasses.replace(self, **kw)

    def copy(self) -> "PhasePoint":
        return PhasePoint(self.x.copy(), self.pi.copy(), self.t.copy())


@dataclass(frozen=True, eq=False)
class Observable:
    """Scalar phase-space function with optional analytic first derivatives.

    Missing derivative closures fall back to central differences of ``eval``;
    the step follows the h = cbrt(eps) * max(1, |v|) rule componentwise.
    """

    name: str
    eval: Callable[[PhasePoint], float]
    dpi: Callable[[PhasePoint], np.ndarray] | None = None
    dx: Callable[[PhasePoint], np.ndarray] | None = None
    dt: Callable[[PhasePoint], np.ndarray] | None = None
    polynomial_form: object = None

    def value(self, p: PhasePoint) -> float:
        return float(self.eval(p))

    def _fd(self, p: PhasePoint, attr: str) -> np.ndarray:
        base = getattr(p, attr)
        out = np.empty(base.size)
        for i in range(base.size):
            h = fd_step(base[i])
            vp = base.copy()
            vm = base.copy()
            vp[i] += h
            vm[i] -= h
            out[i] = (self.eval(p.replace(**{attr: vp}))
                      - self.eval(p.replace(**{attr: vm}))) / (2.0 * h)
        return out

    def dpi_at(self, p: PhasePoint) -> np.ndarray:
        if self.dpi is not None:
            return np.asarray(self.dpi(p), dtype=float)
        return self._fd(p, "pi")

    def dx_at(self, p: PhasePoint) -> np.ndarray:
        if self.dx is not None:
            return np.asarray(self.dx(p), dtype=float)
        return self._fd(p, "x")

    def dt_at(self, p: PhasePoint) -> np.ndarray:
        if p.t.size == 0:
            return _EMPTY.copy()
        if self.dt is not None:
            return np.asarray(self.dt(p), dtype=float)
        return self._fd(p, "t")


@dataclass(frozen=True, eq=False)
class Frame:
    """Per-point geometric data shared by bracket evaluations."""

    x: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray
    fs: np.ndarray | None        # abelian: q F[mu,nu]; non-abelian: F[a,mu,nu]
    pot: np.ndarray | None       # non-abelian potential values A[a,mu]
    phi_grad: np.ndarray | None


@dataclass(eq=False)
class BracketContext:
    """Chart + gauge background + optional scalar potential.

    Frames are memoized per position; contexts are otherwise immutable and
    safe to share.
    """

    chart: MetricChart
    background: AbelianBackground | NonAbelianBackground | None = None
    scalar_potential: ScalarPotential | None = None
    _frames: dict = field(default_factory=dict, repr=False, compare=False)

    _CACHE_MAX = 2048

    @property
    def kind(self) -> str:
        if self.background is None:
            return "geodesic"
        if isinstance(self.background, AbelianBackground):
            return "abelian"
        return "nonabelian"

    @property
    def algebra_dim(self) -> int:
        bg = self.background
        return bg.algebra_dim if isinstance(bg, NonAbelianBackground) else 0

    def check_point(self, p: PhasePoint) -> None:
        if p.pi.size != self.chart.dim:
            raise CovmechError("momentum dimension does not match the chart")
        if p.t.size != self.algebra_dim:
            raise CovmechError("charge dimension does not match the background")

    def frame(self, x: np.ndarray) -> Frame:
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        hit = self._frames.get(key)
        if hit is not None:
            return hit
        self.chart.require_domain(x)
        g = metric_at(self.chart, x)
        ginv = inverse_metric_at(self.chart, x)
        dg = metric_partials_at(self.chart, x)
        gamma = christoffel_at(self.chart, x, ginv=ginv, dg=dg)
        fs = pot = None
        if isinstance(self.background, AbelianBackground):
            fs = self.background.charge * field_strength_abelian(
                self.background, self.chart, x)
        elif isinstance(self.background, NonAbelianBackground):
            fs = field_strength_nonabelian(self.background, self.chart, x)
            pot = np.asarray(self.background.potential(x), dtype=float)
        phi_grad = None
        if self.scalar_potential is not None:
            phi_grad = self.scalar_potential.gradient_at(self.chart, x)
        frame = Frame(x=x, g=g, ginv=ginv, dg=dg, gamma=gamma,
                      fs=fs, pot=pot, phi_grad=phi_grad)
        if len(self._frames) >= self._CACHE_MAX:
            self._frames.clear()
        self._frames[key] = frame
        return frame

    def field_matrix(self, frame: Frame, t: np.ndarray) -> np.ndarray | None:
        """Q_{mu nu}: qF for abelian, g t_a F^a for non-abelian contexts."""
        if frame.fs is None:
            return None
        if self.kind == "abelian":
            return frame.fs
        return self.background.coupling * np.einsum("a,amn->mn", t, frame.fs)


def _assemble_derivative(ctx: BracketContext, frame: Frame, p: PhasePoint,
                         dx: np.ndarray, dpi: np.ndarray,
                         dt: np.ndarray | None) -> np.ndarray:
    out = dx + np.einsum("mnl,l,n->m", frame.gamma, p.pi, dpi)
    if ctx.kind == "nonabelian" and dt is not None:
        f = ctx.background.structure.f
        out = out + ctx.background.coupling * np.einsum(
            "abc,c,am,b->m", f, p.t, frame.pot, dt)
    return out


def covariant_observable_derivative(ctx: BracketContext, obs: Observable,
                                    p: PhasePoint,
                                    frame: Frame | None = None) -> np.ndarray:
    """D_mu G: plain x-gradient corrected by parallel transport of momenta and,
    in non-abelian contexts, by the charge rotation along A."""
    ctx.check_point(p)
    if frame is None:
        frame = ctx.frame(p.x)
    dt = obs.dt_at(p) if ctx.kind == "nonabelian" else None
    return _assemble_derivative(ctx, frame, p, obs.dx_at(p), obs.dpi_at(p), dt)


def _pair_antisym(w: np.ndarray, ga: np.ndarray, kb: np.ndarray):
    """(sum, max |addend|) of w_{mn} (ga_m kb_n - ga_n kb_m) over m < n."""
    total = 0.0
    scale = 0.0
    n = ga.size
    for m in range(n):
        for k in range(m + 1, n):
            wmk = w[m, k]
            if wmk == 0.0:
                continue
            term = wmk * (ga[m] * kb[k] - ga[k] * kb[m])
            total += term
            scale = max(scale, abs(wmk * ga[m] * kb[k]), abs(wmk * ga[k] * kb[m]))
    return total, scale


def _derivative_magnitude(ctx: BracketContext, frame: Frame, p: PhasePoint,
                          dx: np.ndarray, dpi: np.ndarray,
                          dt: np.ndarray | None) -> np.ndarray:
    """Componentwise sum of |addend| entering D_mu: the honest magnitude
    against which cancellations inside the covariant derivative are judged."""
    mag = np.abs(dx) + np.einsum("mnl,l,n->m", np.abs(frame.gamma),
                                 np.abs(p.pi), np.abs(dpi))
    if ctx.kind == "nonabelian" and dt is not None:
        f = ctx.background.structure.f
        mag = mag + abs(ctx.background.coupling) * np.einsum(
            "abc,c,am,b->m", np.abs(f), np.abs(p.t), np.abs(frame.pot),
            np.abs(dt))
    return mag


def bracket_with_scale(ctx: BracketContext, G: Observable, K: Observable,
                       p: PhasePoint) -> tuple[float, float]:
    """Covariant bracket value plus a cancellation-aware magnitude estimate
    (the largest addend entering the sum, with the addends inside each
    covariant derivative counted individually)."""
    ctx.check_point(p)
    frame = ctx.frame(p.x)
    gpi = G.dpi_at(p)
    kpi = K.dpi_at(p)
    gdx = G.dx_at(p)
    kdx = K.dx_at(p)
    gdt = G.dt_at(p) if ctx.kind == "nonabelian" else None
    kdt = K.dt_at(p) if ctx.kind == "nonabelian" else None
    dg_ = _assemble_derivative(ctx, frame, p, gdx, gpi, gdt)
    dk_ = _assemble_derivative(ctx, frame, p, kdx, kpi, kdt)
    dg_mag = _derivative_magnitude(ctx, frame, p, gdx, gpi, gdt)
    dk_mag = _derivative_magnitude(ctx, frame, p, kdx, kpi, kdt)
    main = np.dot(dg_, kpi) - np.dot(gpi, dk_)
    scale = max(float(np.max(np.abs(dg_mag * kpi), initial=0.0)),
                float(np.max(np.abs(gpi * dk_mag), initial=0.0)))
    total = main
    q = ctx.field_matrix(frame, p.t)
    if q is not None:
        fterm, fscale = _pair_antisym(q, gpi, kpi)
        total += fterm
        scale = max(scale, fscale)
    if ctx.kind == "nonabelian":
        gt = G.dt_at(p)
        kt = K.dt_at(p)
        w = np.einsum("abc,c->ab", ctx.background.structure.f, p.t)
        tterm, tscale = _pair_antisym(w, gt, kt)
        total += tterm
        scale = max(scale, tscale)
    return float(total), scale


def covariant_bracket(ctx: BracketContext, G: Observable, K: Observable,
                      p: PhasePoint) -> float:
    return bracket_with_scale(ctx, G, K, p)[0]


def bracket_observable(ctx: BracketContext, G: Observable, K: Observable,
                       name: str | None = None) -> Observable:
    """The inner bracket {G, K} wrapped as a new Observable whose derivatives
    come from the differentiation scheme (no analytic second derivatives)."""
    label = name or f"{{{G.name},{K.name}}}"
    return Observable(name=label,
                      eval=lambda p: covariant_bracket(ctx, G, K, p))


def jacobi_report(ctx: BracketContext, G: Observable, K: Observable,
                  J: Observable, p: PhasePoint) -> tuple[float, float]:
    """Cyclic double-bracket sum and the scale of its largest contribution."""
    b_gk = bracket_observable(ctx, G, K)
    b_kj = bracket_observable(ctx, K, J)
    b_jg = bracket_observable(ctx, J, G)
    v1, s1 = bracket_with_scale(ctx, b_gk, J, p)
    v2, s2 = bracket_with_scale(ctx, b_kj, G, p)
    v3, s3 = bracket_with_scale(ctx, b_jg, K, p)
    return v1 + v2 + v3, max(s1, s2, s3)


def jacobi_residual(ctx: BracketContext, G: Observable, K: Observable,
                    J: Observable, p: PhasePoint) -> float:
    return jacobi_report(ctx, G, K, J, p)[0]


def noether_flow(ctx: BracketContext, G: Observable,
                 p: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """Covariant phase-space transformation generated by G:
    Delta x^mu = dG/dpi_mu, Delta pi_mu = -D_mu G."""
    dx = G.dpi_at(p)
    dpi = -covariant_observable_derivative(ctx, G, p)
    return dx, dpi


def coordinate_observable(index: int, name: str | None = None) -> Observable:
    def grad_x(p, i=index):
        out = np.zeros(p.x.size)
        out[i] = 1.0
        return out

    return Observable(name=name or f"x{index}",
                      eval=lambda p: p.x[index],
                      dpi=lambda p: np.zeros(p.pi.size),
                      dx=grad_x,
                      dt=lambda p: np.zeros(p.t.size))


def momentum_observable(index: int, name: str | None = None) -> Observable:
    def grad_pi(p, i=index):
        out = np.zeros(p.pi.size)
        out[i] = 1.0
        return out

    return Observable(name=name or f"pi{index}",
                      eval=lambda p: p.pi[index],
                      dpi=grad_pi,
                      dx=lambda p: np.zeros(p.x.size),
                      dt=lambda p: np.zeros(p.t.size))


def charge_observable(index: int, name: str | None = None) -> Observable:
    def grad_t(p, a=index):
        out = np.zeros(p.t.size)
        out[a] = 1.0
        return out

    return Observable(name=name or f"t{index}",
                      eval=lambda p: p.t[index],
                      dpi=lambda p: np.zeros(p.pi.size),
                      dx=lambda p: np.zeros(p.x.size),
                      dt=grad_t)


def product_observable(G: Observable, K: Observable,
                       name: str | None = None) -> Observable:
    return Observable(
        name=name or f"{G.name}*{K.name}",
        eval=lambda p: G.eval(p) * K.eval(p),
        dpi=lambda p: G.dpi_at(p) * K.value(p) + G.value(p) * K.dpi_at(p),
        dx=lambda p: G.dx_at(p) * K.value(p) + G.value(p) * K.dx_at(p),
        dt=lambda p: G.dt_at(p) * K.value(p) + G.value(p) * K.dt_at(p),
    )

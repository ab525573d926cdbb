"""Symmetric tensor fields, Killing residuals, the gauge-covariant hierarchy,
and the tensor bracket algebra.

Tensor fields are contravariant; residuals are computed with all indices
raised so complete symmetrization (unit weight: average over permutations) is
well defined.  Hierarchy bookkeeping follows the power-series convention
G = sum_n (1/n!) G^(n) : pi^n; monomial-convention series (no weights) are
supported and rescaled internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .diff import Dual, jacobian
from .errors import RankZeroOperand
from .geometry import (MetricChart, covariant_tensor_derivative,
                       inverse_metric_at, raise_first_index)
from .phase import BracketContext, Observable, PhasePoint, bracket_observable, \
    bracket_with_scale


# ---------------------------------------------------------------------------
# symmetric arrays

def symmetrize(arr: np.ndarray) -> np.ndarray:
    """Average over all index permutations (unit-weight symmetrizer)."""
    arr = np.asarray(arr)
    n = arr.ndim
    if n <= 1:
        return arr
    acc = np.zeros_like(arr, dtype=float)
    for perm in permutations(range(n)):
        acc += np.transpose(arr, perm)
    return acc / math.factorial(n)


def _distinct_permutations(idx: tuple) -> set[tuple]:
    return set(permutations(idx))


def dense_from_monomials(dim: int, rank: int,
                         coeffs: Mapping[tuple, object]) -> np.ndarray:
    """Dense symmetric array whose contraction with pi^rank reproduces the
    polynomial sum(coeffs[idx] * pi_idx...); each monomial coefficient is
    spread evenly over the distinct index permutations."""
    isdual = any(isinstance(v, Dual) for v in coeffs.values())
    arr = np.zeros((dim,) * rank, dtype=object if isdual else float)
    for idx, v in coeffs.items():
        idx = tuple(idx)
        if len(idx) != rank:
            raise ValueError(f"multi-index {idx} has wrong length for rank {rank}")
        perms = _distinct_permutations(idx)
        share = v / len(perms)
        for pidx in perms:
            arr[pidx] = arr[pidx] + share
    return arr


def canonical_from_dense(arr: np.ndarray) -> dict[tuple, float]:
    """Canonical non-decreasing multi-index map; raises if the array is not
    permutation symmetric."""
    arr = np.asarray(arr)
    out: dict[tuple, float] = {}
    for idx in np.ndindex(arr.shape):
        key = tuple(sorted(idx))
        v = arr[idx]
        if key in out:
            if out[key] != v:
                raise ValueError(f"array not symmetric at {idx}")
        else:
            out[key] = v
    return out


def dense_from_canonical(dim: int, rank: int,
                         canon: Mapping[tuple, float]) -> np.ndarray:
    arr = np.zeros((dim,) * rank)
    for idx, v in canon.items():
        for pidx in _distinct_permutations(tuple(idx)):
            arr[pidx] = v
    return arr


def contract_with_momenta(arr: np.ndarray, pi: np.ndarray, times: int):
    out = arr
    for _ in range(times):
        out = np.tensordot(out, pi, axes=([out.ndim - 1], [0]))
    return out


# ---------------------------------------------------------------------------
# fields and series

@dataclass(frozen=True, eq=False)
class SymmetricTensorField:
    """Contravariant symmetric tensor field G^{mu_1...mu_n}(x)."""

    rank: int
    dim: int
    components: Callable[[np.ndarray], np.ndarray]
    partials: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    def scaled(self, factor: float) -> "SymmetricTensorField":
        comp = self.components
        part = self.partials
        return SymmetricTensorField(
            rank=self.rank, dim=self.dim,
            components=lambda x: np.asarray(comp(x)) * factor,
            partials=None if part is None
            else (lambda x: factor * np.asarray(part(x), float)),
            name=self.name)


def field_from_monomials(dim: int, rank: int,
                         coeff_fns: Mapping[tuple, Callable],
                         name: str = "") -> SymmetricTensorField:
    """Tensor field from monomial coefficient closures {multi-index: c(x)}."""
    fns = {tuple(idx): fn for idx, fn in coeff_fns.items()}

    def components(x):
        vals = {idx: fn(x) for idx, fn in fns.items()}
        return dense_from_monomials(dim, rank, vals)

    return SymmetricTensorField(rank=rank, dim=dim, components=components,
                                name=name)


def constant_field(dim: int, arr: np.ndarray,
                   name: str = "") -> SymmetricTensorField:
    arr = np.asarray(arr, dtype=float)
    rank = arr.ndim
    zeros = np.zeros((dim,) + arr.shape)
    return SymmetricTensorField(rank=rank, dim=dim,
                                components=lambda x: arr.copy(),
                                partials=lambda x: zeros.copy(),
                                name=name)


@dataclass(frozen=True, eq=False)
class GeneratorSeries:
    """Momentum power series of symmetric tensor coefficients.

    ``weighted=True`` means the 1/n! convention; ``weighted=False`` stores the
    plain monomial coefficients of G = sum_n C^(n) : pi^n.  Either way
    ``weighted_component`` returns the 1/n!-convention tensor used by the
    hierarchy equations.
    """

    terms: tuple[SymmetricTensorField | None, ...]
    weighted: bool = True
    name: str = ""

    def __post_init__(self):
        for n, f in enumerate(self.terms):
            if f is not None and f.rank != n:
                raise ValueError(f"series slot {n} holds a rank-{f.rank} field")

    @property
    def max_rank(self) -> int:
        return len(self.terms) - 1

    def component(self, n: int) -> SymmetricTensorField | None:
        if n < 0 or n > self.max_rank:
            return None
        return self.terms[n]

    def weighted_component(self, n: int) -> SymmetricTensorField | None:
        f = self.component(n)
        if f is None or self.weighted:
            return f
        return f.scaled(float(math.factorial(n)))

    def evaluate(self, x: np.ndarray, pi: np.ndarray) -> float:
        total = 0.0
        for n, f in enumerate(self.terms):
            if f is None:
                continue
            w = 1.0 / math.factorial(n) if self.weighted else 1.0
            comps = np.asarray(f.components(x), dtype=float)
            total += w * float(contract_with_momenta(comps, pi, n))
        return total

    def momentum_gradient(self, x: np.ndarray, pi: np.ndarray) -> np.ndarray:
        out = np.zeros(pi.size)
        for n, f in enumerate(self.terms):
            if f is None or n == 0:
                continue
            w = 1.0 / math.factorial(n) if self.weighted else 1.0
            comps = np.asarray(f.components(x), dtype=float)
            out += w * n * np.asarray(
                contract_with_momenta(comps, pi, n - 1), dtype=float).reshape(pi.size)
        return out

    def position_gradient(self, x: np.ndarray, pi: np.ndarray) -> np.ndarray:
        out = np.zeros(np.asarray(x).size)
        for n, f in enumerate(self.terms):
            if f is None:
                continue
            w = 1.0 / math.factorial(n) if self.weighted else 1.0
            dcomp = jacobian(f.components, x, analytic=f.partials)
            out += w * np.asarray(contract_with_momenta(dcomp, pi, n),
                                  dtype=float).reshape(out.size)
        return out


def series_observable(series: GeneratorSeries, name: str | None = None,
                      algebra_dim: int = 0) -> Observable:
    """Observable wrapper of a series; evaluation and derivatives contract the
    stored tensor coefficients, so it stays consistent with the series."""
    return Observable(
        name=name or series.name or "series",
        eval=lambda p: series.evaluate(p.x, p.pi),
        dpi=lambda p: series.momentum_gradient(p.x, p.pi),
        dx=lambda p: series.position_gradient(p.x, p.pi),
        dt=lambda p: np.zeros(p.t.size),
        polynomial_form=series,
    )


def monomial_observable(fieldobj: SymmetricTensorField,
                        name: str | None = None) -> Observable:
    """Observable G = G^{mu_1..mu_n} pi_{mu_1} ... pi_{mu_n} (no 1/n!)."""
    terms: list[SymmetricTensorField | None] = [None] * (fieldobj.rank + 1)
    terms[fieldobj.rank] = fieldobj
    series = GeneratorSeries(tuple(terms), weighted=False,
                             name=name or fieldobj.name)
    return series_observable(series, name=name or fieldobj.name)


# ---------------------------------------------------------------------------
# residuals

def killing_residual(chart: MetricChart, fieldobj: SymmetricTensorField,
                     x: np.ndarray, with_scale: bool = False):
    """Unit-weight symmetrization of nabla^{(mu_{n+1}} G^{mu_1...mu_n)}.

    Zero iff the field is Killing at x.  The optional scale is the largest
    raised addend (gradient or Christoffel correction) before cancellation.
    """
    nab, parts = covariant_tensor_derivative(chart, fieldobj, x,
                                             return_parts=True)
    ginv = inverse_metric_at(chart, x)
    res = symmetrize(raise_first_index(ginv, nab))
    if not with_scale:
        return res
    scale = 0.0
    for part in parts:
        scale = max(scale, float(np.max(np.abs(raise_first_index(ginv, part)),
                                        initial=0.0)))
    return res, scale


def _effective_field(ctx: BracketContext, x: np.ndarray,
                     charges: np.ndarray | None) -> np.ndarray | None:
    frame = ctx.frame(x)
    if frame.fs is None:
        return None
    if ctx.kind == "abelian":
        return frame.fs
    if charges is None:
        raise ValueError("non-abelian hierarchy needs the gauge charges")
    return ctx.background.coupling * np.einsum(
        "a,amn->mn", np.asarray(charges, float), frame.fs)


def hierarchy_residual(ctx: BracketContext, series: GeneratorSeries,
                       x: np.ndarray, charges: np.ndarray | None = None,
                       mass: float = 1.0, with_scale: bool = False):
    """Per-rank residuals of the covariant constancy condition for a series.

    Entry k >= 1: sym(nabla^{(mu_1} G^(k-1) - Q^{(mu_1}_nu G^(k) nu)...)
                  - (mass/k) dPhi_nu G^(k+1) nu...
    Entry 0 (scalar): dPhi_nu G^(1) nu, the pi^0 compatibility condition.

    All entries vanish iff the series generates a constant of motion at x (for
    the given charges in a non-abelian context).  Returns {rank: array}, and
    with ``with_scale`` also {rank: largest addend magnitude}.
    """
    chart = ctx.chart
    x = chart.require_domain(x)
    ginv = inverse_metric_at(chart, x)
    feff = _effective_field(ctx, x, charges)
    fmix = None if feff is None else ginv @ feff      # Q^{lam}_{ nu}
    phi_grad = None
    if ctx.scalar_potential is not None:
        phi_grad = ctx.scalar_potential.gradient_at(chart, x)

    nmax = series.max_rank
    res: dict[int, np.ndarray] = {}
    scales: dict[int, float] = {}

    w1 = series.weighted_component(1)
    r0 = 0.0
    s0 = 0.0
    if phi_grad is not None and w1 is not None:
        comps1 = np.asarray(w1.components(x), dtype=float)
        r0 = float(np.dot(phi_grad, comps1))
        s0 = float(np.max(np.abs(phi_grad * comps1), initial=0.0))
    res[0] = np.asarray(r0)
    scales[0] = s0

    for k in range(1, nmax + 2):
        parts: list[np.ndarray] = []
        wprev = series.weighted_component(k - 1)
        if wprev is not None:
            nab, nab_parts = covariant_tensor_derivative(chart, wprev, x,
                                                         return_parts=True)
            parts.extend(raise_first_index(ginv, pp) for pp in nab_parts)
        wk = series.weighted_component(k)
        if wk is not None and fmix is not None:
            comps = np.asarray(wk.components(x), dtype=float)
            parts.append(-np.tensordot(fmix, comps, axes=([1], [0])))
        total = np.zeros((chart.dim,) * k)
        scale = 0.0
        for part in parts:
            total = total + part
            scale = max(scale, float(np.max(np.abs(part), initial=0.0)))
        entry = symmetrize(total)
        wnext = series.weighted_component(k + 1)
        if phi_grad is not None and wnext is not None:
            comps = np.asarray(wnext.components(x), dtype=float)
            phi_term = (mass / k) * np.tensordot(phi_grad, comps,
                                                 axes=([0], [0]))
            entry = entry - phi_term
            scale = max(scale, float(np.max(np.abs(phi_term), initial=0.0)))
        res[k] = entry
        scales[k] = scale

    if with_scale:
        return res, scales
    return res


@dataclass(frozen=True)
class SweepResult:
    """Worst-case |{G, H}|-style sweep over sample points."""

    max_abs: float
    worst_point: PhasePoint | None
    max_scale: float

    def ratio(self) -> float:
        if self.max_scale == 0.0:
            return 0.0
        return self.max_abs / self.max_scale


def _hamiltonian_observable(ham) -> Observable:
    if isinstance(ham, Observable):
        return ham
    return ham.observable()


def conserved_check(ctx: BracketContext, obs: Observable, ham,
                    samples: Iterable[PhasePoint]) -> SweepResult:
    """max |{G, H}| over the samples, with the point achieving it."""
    hobs = _hamiltonian_observable(ham)
    worst = 0.0
    worst_point = None
    scale = 0.0
    for p in samples:
        v, s = bracket_with_scale(ctx, obs, hobs, p)
        if abs(v) >= worst:
            worst = abs(v)
            worst_point = p
        scale = max(scale, s)
    return SweepResult(worst, worst_point, scale)


def closure_check(ctx: BracketContext, G: Observable, K: Observable, ham,
                  samples: Iterable[PhasePoint]) -> SweepResult:
    """max |{{G, K}, H}|: certifies the bracket of two constants of motion is
    again conserved.

    The scale includes the inner bracket's own cancellation scale: when
    {G, K} vanishes identically, the outer evaluation sees only the noise of
    differentiating an exact zero, and judging that noise against itself
    would be vacuous.
    """
    hobs = _hamiltonian_observable(ham)
    inner = bracket_observable(ctx, G, K)
    worst = 0.0
    worst_point = None
    scale = 0.0
    for p in samples:
        v, s_outer = bracket_with_scale(ctx, inner, hobs, p)
        _, s_inner = bracket_with_scale(ctx, G, K, p)
        if abs(v) >= worst:
            worst = abs(v)
            worst_point = p
        scale = max(scale, s_outer, s_inner)
    return SweepResult(worst, worst_point, scale)


def generator_bracket(chart: MetricChart, A: SymmetricTensorField,
                      B: SymmetricTensorField) -> SymmetricTensorField:
    """Schouten-type bracket of symmetric contravariant tensor fields.

    rank(A) = n, rank(B) = m  ->  rank n + m - 1, components
        sym( m B^{lam(..} nabla_lam A^{..)} - n A^{lam(..} nabla_lam B^{..)} ),
    which reproduces the vector-field commutator for n = m = 1 and the tensor
    transformation rule for (n, 1), and agrees pointwise with the covariant
    bracket of the wrapped monomial observables.
    """
    n, m = A.rank, B.rank
    if n < 1 or m < 1:
        raise RankZeroOperand("generator bracket needs rank >= 1 operands")

    def components(x):
        nab_a = covariant_tensor_derivative(chart, A, x)
        nab_b = covariant_tensor_derivative(chart, B, x)
        bc = np.asarray(B.components(x), dtype=float)
        ac = np.asarray(A.components(x), dtype=float)
        t1 = m * np.tensordot(bc, nab_a, axes=([0], [0]))
        t2 = n * np.tensordot(ac, nab_b, axes=([0], [0]))
        return symmetrize(t1 - t2)

    return SymmetricTensorField(rank=n + m - 1, dim=A.dim,
                                components=components,
                                name=f"[{A.name},{B.name}]")

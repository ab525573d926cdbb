"""Verification sweeps over random phase-space samples, and their reports.

Every check compares a residual against ``tolerance * scale`` where the scale
is the largest addend entering the cancelling sum (never an absolute number:
Kerr components span many orders of magnitude across the domain).  Reports
are plain dicts, JSON-serializable and byte-deterministic for a fixed seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .catalog import CatalogSystem, NegativeControl
from .dynamics import HamiltonianSpec
from .killing import (GeneratorSeries, closure_check, conserved_check,
                      hierarchy_residual, killing_residual)
from .phase import BracketContext, Observable, PhasePoint, \
    bracket_with_scale, covariant_bracket
from .errors import UnknownObservable


def sample_points(system: CatalogSystem, rng, n: int) -> list[PhasePoint]:
    return [system.sample(rng) for _ in range(n)]


# ---------------------------------------------------------------------------
# random polynomial observables (smooth test functions)

def random_polynomial_observable(rng, dim: int, algebra_dim: int = 0,
                                 n_terms: int = 4,
                                 name: str = "poly") -> Observable:
    """Random low-degree polynomial in (x, pi, t) with analytic gradients."""
    terms = []
    for _ in range(n_terms):
        coeff = rng.uniform(-1.0, 1.0)
        ax = np.zeros(dim, dtype=int)
        for _ in range(rng.integers(0, 3)):
            ax[rng.integers(0, dim)] += 1
        api = np.zeros(dim, dtype=int)
        for _ in range(rng.integers(0, 3)):
            api[rng.integers(0, dim)] += 1
        at = np.zeros(algebra_dim, dtype=int)
        if algebra_dim and rng.uniform() < 0.5:
            at[rng.integers(0, algebra_dim)] += 1
        terms.append((coeff, ax, api, at))

    def _mono(v, a):
        out = 1.0
        for vi, ai in zip(v, a):
            if ai:
                out *= vi ** ai
        return out

    def eval_fn(p):
        return sum(c * _mono(p.x, ax) * _mono(p.pi, api) * _mono(p.t, at)
                   for c, ax, api, at in terms)

    def _grad(p, which):
        base = getattr(p, which)
        out = np.zeros(base.size)
        for c, ax, api, at in terms:
            sel = {"x": ax, "pi": api, "t": at}[which]
            rest = {"x": (p.x, ax), "pi": (p.pi, api), "t": (p.t, at)}
            for i in range(base.size):
                if sel[i] == 0:
                    continue
                val = c * sel[i] * base[i] ** (sel[i] - 1)
                for key, (vec, exps) in rest.items():
                    if key == which:
                        for j in range(vec.size):
                            if j != i and exps[j]:
                                val *= vec[j] ** exps[j]
                    else:
                        val *= _mono(vec, exps)
                out[i] += val
        return out

    return Observable(name=name, eval=eval_fn,
                      dpi=lambda p: _grad(p, "pi"),
                      dx=lambda p: _grad(p, "x"),
                      dt=lambda p: _grad(p, "t"))


# ---------------------------------------------------------------------------
# sweep drivers

def conserved_sweep(system: CatalogSystem, points: Sequence[PhasePoint],
                    name: str, obs: Observable | None = None,
                    tolerance: float | None = None) -> dict:
    obs = obs if obs is not None else system.observables[name]
    tolerance = tolerance if tolerance is not None \
        else system.conserved_tolerances.get(name, 1e-9)
    res = conserved_check(system.ctx, obs, system.hamiltonian, points)
    return {
        "check": "conserved",
        "observable": name,
        "max_abs": res.max_abs,
        "scale": res.max_scale,
        "tolerance": tolerance,
        "worst_point": None if res.worst_point is None
        else res.worst_point.x.tolist(),
        "pass": bool(res.max_abs <= tolerance * res.max_scale),
    }


def killing_sweep(system: CatalogSystem, points: Sequence[PhasePoint],
                  name: str) -> dict:
    fieldobj = system.killing_fields[name]
    tolerance = system.killing_tolerances.get(name, 1e-9)
    worst = 0.0
    scale = 0.0
    worst_x = None
    total = 0.0
    for p in points:
        res, sc = killing_residual(system.chart, fieldobj, p.x,
                                   with_scale=True)
        mx = float(np.max(np.abs(res)))
        total += mx
        if mx >= worst:
            worst = mx
            worst_x = p.x.tolist()
        scale = max(scale, sc)
    return {
        "check": "killing_residual",
        "observable": name,
        "rank": fieldobj.rank + 1,
        "max_abs": worst,
        "mean_abs": total / max(len(points), 1),
        "scale": scale,
        "tolerance": tolerance,
        "worst_point": worst_x,
        "pass": bool(worst <= tolerance * scale),
    }


def hierarchy_sweep(system: CatalogSystem, points: Sequence[PhasePoint],
                    name: str, series: GeneratorSeries | None = None,
                    tolerance: float | None = None) -> dict:
    series = series if series is not None else system.series[name]
    tolerance = tolerance if tolerance is not None \
        else system.hierarchy_tolerances.get(name, 1e-7)
    ranks: dict[int, dict] = {}
    overall_pass = True
    for p in points:
        charges = p.t if p.t.size else None
        res, scales = hierarchy_residual(system.ctx, series, p.x,
                                         charges=charges, with_scale=True)
        for k, arr in res.items():
            mx = float(np.max(np.abs(arr)))
            entry = ranks.setdefault(k, {"max_abs": 0.0, "scale": 0.0,
                                         "worst_point": None, "sum": 0.0})
            entry["sum"] += mx
            if mx >= entry["max_abs"]:
                entry["max_abs"] = mx
                entry["worst_point"] = p.x.tolist()
            entry["scale"] = max(entry["scale"], scales[k])
    out_ranks = {}
    for k in sorted(ranks):
        e = ranks[k]
        ok = bool(e["max_abs"] <= tolerance * e["scale"]) \
            if e["scale"] > 0.0 else bool(e["max_abs"] == 0.0)
        overall_pass = overall_pass and ok
        out_ranks[str(k)] = {
            "max_abs": e["max_abs"],
            "mean_abs": e["sum"] / max(len(points), 1),
            "scale": e["scale"],
            "worst_point": e["worst_point"],
            "pass": ok,
        }
    return {
        "check": "hierarchy_residual",
        "observable": name,
        "tolerance": tolerance,
        "ranks": out_ranks,
        "pass": overall_pass,
    }


def closure_sweep(system: CatalogSystem, points: Sequence[PhasePoint],
                  pair: tuple[str, str, float]) -> dict:
    gn, kn, tolerance = pair
    res = closure_check(system.ctx, system.observables[gn],
                        system.observables[kn], system.hamiltonian, points)
    return {
        "check": "closure",
        "observable": f"{{{gn},{kn}}}",
        "max_abs": res.max_abs,
        "scale": res.max_scale,
        "tolerance": tolerance,
        "worst_point": None if res.worst_point is None
        else res.worst_point.x.tolist(),
        "pass": bool(res.max_abs <= tolerance * res.max_scale),
    }


def negative_control_sweep(system: CatalogSystem,
                           points: Sequence[PhasePoint],
                           control: NegativeControl) -> dict:
    """A negative control passes when its check FAILS by the demanded factor."""
    if control.check == "conserved":
        base = conserved_sweep(system, points, control.name,
                               obs=control.observable,
                               tolerance=control.tolerance)
        ratio = base["max_abs"] / max(base["tolerance"] * base["scale"], 1e-300)
    else:
        base = hierarchy_sweep(system, points, control.name,
                               series=control.series,
                               tolerance=control.tolerance)
        ratio = max(
            e["max_abs"] / max(base["tolerance"] * e["scale"], 1e-300)
            for e in base["ranks"].values())
    base["expected"] = "fail"
    base["failure_ratio"] = ratio
    base["pass"] = bool(ratio >= control.min_failure_ratio)
    return base


def verify_report(system: CatalogSystem, seed: int, n_points: int,
                  include_negative_controls: bool = False) -> dict:
    rng = np.random.default_rng(seed)
    points = sample_points(system, rng, n_points)
    checks = []
    for name in sorted(system.observables):
        checks.append(conserved_sweep(system, points, name))
    for name in sorted(system.killing_fields):
        checks.append(killing_sweep(system, points, name))
    for name in sorted(system.series):
        checks.append(hierarchy_sweep(system, points, name))
    for pair in system.closure_pairs:
        checks.append(closure_sweep(system, points, pair))
    controls = []
    if include_negative_controls:
        for control in system.negative_controls:
            controls.append(negative_control_sweep(system, points, control))
    overall = all(c["pass"] for c in checks) and all(c["pass"] for c in controls)
    return {
        "system": system.name,
        "params": system.params,
        "seed": seed,
        "points": n_points,
        "checks": checks,
        "negative_controls": controls,
        "overall_pass": overall,
    }


def bracket_table(system: CatalogSystem, names: Sequence[str],
                  points: Sequence[PhasePoint],
                  commute_tolerance: float = 1e-8) -> dict:
    """Pairwise max |{G_i, G_j}| over the sweep, with commuting-pair flags."""
    obs = []
    for name in names:
        if name not in system.observables:
            raise UnknownObservable(name)
        obs.append(system.observables[name])
    n = len(obs)
    values = np.zeros((n, n))
    scales = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            worst = 0.0
            sc = 0.0
            for p in points:
                v, s = bracket_with_scale(system.ctx, obs[i], obs[j], p)
                worst = max(worst, abs(v))
                sc = max(sc, s)
            values[i, j] = values[j, i] = worst
            scales[i, j] = scales[j, i] = sc
    commuting = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(True)
            else:
                row.append(bool(values[i, j]
                                <= commute_tolerance * max(scales[i, j], 1e-300)))
        commuting.append(row)
    return {
        "observables": list(names),
        "max_abs": [[float(v) for v in row] for row in values],
        "scale": [[float(v) for v in row] for row in scales],
        "commute_tolerance": commute_tolerance,
        "commuting": commuting,
    }

"""Hamiltonians and numerical integration of the generated flows.

The equations of motion exist twice on purpose: a closed-form right-hand side
(used by the integrators) and a bracket-derived one (coordinates, momenta and
charges bracketed with H).  Tests hold the two routes against each other.

Integration state is the flat concatenation (x, pi, t); charges ride along in
the same ODE.  No symplectic scheme: an embedded Dormand-Prince 5(4) pair with
drift monitoring is the verification tool, plus a fixed-step RK4 for
convergence-order measurements.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (MaxStepsExceeded, NonFiniteState, OutOfDomain)
from .phase import BracketContext, Observable, PhasePoint, \
    charge_observable, coordinate_observable, covariant_bracket, \
    momentum_observable


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """H = (1/2m) g^{mu nu} pi_mu pi_nu + Phi(x), with Phi from the context."""

    mass: float
    ctx: BracketContext

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")

    @property
    def kind(self) -> str:
        return self.ctx.kind

    @property
    def scalar_potential(self):
        return self.ctx.scalar_potential

    def observable(self) -> Observable:
        ctx = self.ctx
        m = self.mass

        def eval_h(p: PhasePoint) -> float:
            frame = ctx.frame(p.x)
            val = 0.5 / m * float(p.pi @ frame.ginv @ p.pi)
            if ctx.scalar_potential is not None:
                val += float(ctx.scalar_potential.value(p.x))
            return val

        def dpi(p: PhasePoint) -> np.ndarray:
            return ctx.frame(p.x).ginv @ p.pi / m

        def dx(p: PhasePoint) -> np.ndarray:
            frame = ctx.frame(p.x)
            dginv = -np.einsum("ab,pbc,cd->pad", frame.ginv, frame.dg,
                               frame.ginv)
            out = 0.5 / m * np.einsum("pmn,m,n->p", dginv, p.pi, p.pi)
            if frame.phi_grad is not None:
                out = out + frame.phi_grad
            return out

        return Observable(name="H", eval=eval_h, dpi=dpi, dx=dx,
                          dt=lambda p: np.zeros(p.t.size))


def hamiltonian_eval(spec: HamiltonianSpec, p: PhasePoint) -> float:
    frame = spec.ctx.frame(p.x)
    val = 0.5 / spec.mass * float(p.pi @ frame.ginv @ p.pi)
    if spec.ctx.scalar_potential is not None:
        val += float(spec.ctx.scalar_potential.value(p.x))
    return val


def momentum_from_velocity(spec: HamiltonianSpec, x: np.ndarray,
                           v: np.ndarray) -> np.ndarray:
    """pi_mu = m g_{mu nu} v^nu."""
    frame = spec.ctx.frame(np.asarray(x, dtype=float))
    return spec.mass * frame.g @ np.asarray(v, dtype=float)


def velocity_from_momentum(spec: HamiltonianSpec, x: np.ndarray,
                           pi: np.ndarray) -> np.ndarray:
    frame = spec.ctx.frame(np.asarray(x, dtype=float))
    return frame.ginv @ np.asarray(pi, dtype=float) / spec.mass


def equations_of_motion(spec: HamiltonianSpec, p: PhasePoint,
                        via: str = "closed-form"):
    """Tangent (xdot, pidot, tdot) of the flow generated by H.

    via="closed-form": curved-space Lorentz/Wong right-hand side.
    via="bracket":     every component bracketed with H (cross-check route).
    """
    ctx = spec.ctx
    ctx.check_point(p)
    if via == "bracket":
        hobs = spec.observable()
        d = ctx.chart.dim
        xdot = np.array([covariant_bracket(ctx, coordinate_observable(i), hobs, p)
                         for i in range(d)])
        pidot = np.array([covariant_bracket(ctx, momentum_observable(i), hobs, p)
                          for i in range(d)])
        tdot = np.array([covariant_bracket(ctx, charge_observable(a), hobs, p)
                         for a in range(p.t.size)])
        return xdot, pidot, tdot
    if via != "closed-form":
        raise ValueError(f"unknown route {via!r}")

    frame = ctx.frame(p.x)
    xdot = frame.ginv @ p.pi / spec.mass
    pidot = np.einsum("mnl,l,n->m", frame.gamma, p.pi, xdot)
    q = ctx.field_matrix(frame, p.t)
    if q is not None:
        pidot = pidot + q @ xdot
    if frame.phi_grad is not None:
        pidot = pidot - frame.phi_grad
    if ctx.kind == "nonabelian":
        f = ctx.background.structure.f
        tdot = -ctx.background.coupling * np.einsum(
            "abc,c,bm,m->a", f, p.t, frame.pot, xdot)
    else:
        tdot = np.zeros(p.t.size)
    return xdot, pidot, tdot


# ---------------------------------------------------------------------------
# integration

@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45-adaptive"          # or "rk4-fixed"
    step: float | None = None              # fixed-step size
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 2_000_000
    domain_margin: float = 0.0

    def __post_init__(self):
        if self.method not in ("rk4-fixed", "rk45-adaptive"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "rk4-fixed" and (self.step is None or self.step <= 0):
            raise ValueError("rk4-fixed needs a positive step")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass(eq=False)
class Trajectory:
    """Accepted samples of an integrated flow plus monitor drift logs."""

    chart_dim: int
    algebra_dim: int
    taus: np.ndarray
    states: np.ndarray                     # (N, 2*chart_dim + algebra_dim)
    monitor_names: tuple[str, ...]
    monitor_values: dict[str, np.ndarray]
    accepted: int
    rejected: int
    status: str                            # "completed" | "domain-stop"

    def point(self, i: int) -> PhasePoint:
        d, k = self.chart_dim, self.algebra_dim
        y = self.states[i]
        return PhasePoint(y[:d].copy(), y[d:2 * d].copy(), y[2 * d:].copy())

    @property
    def final_point(self) -> PhasePoint:
        return self.point(len(self.taus) - 1)

    def drift_log(self, name: str) -> np.ndarray:
        vals = self.monitor_values[name]
        return vals - vals[0]

    def max_abs_drift(self, name: str) -> float:
        return float(np.max(np.abs(self.drift_log(name))))

    def max_relative_drift(self, name: str) -> float:
        vals = self.monitor_values[name]
        ref = abs(vals[0])
        if ref < 1e-300:
            ref = max(float(np.max(np.abs(vals))), 1e-300)
        return self.max_abs_drift(name) / ref


def _pack(p: PhasePoint) -> np.ndarray:
    return np.concatenate([p.x, p.pi, p.t])


def _unpack(y: np.ndarray, d: int) -> PhasePoint:
    return PhasePoint(y[:d].copy(), y[d:2 * d].copy(), y[2 * d:].copy())


class _Flow:
    def __init__(self, spec: HamiltonianSpec):
        self.spec = spec
        self.d = spec.ctx.chart.dim
        self.evals = 0

    def __call__(self, y: np.ndarray) -> np.ndarray:
        self.evals += 1
        p = _unpack(y, self.d)
        xd, pd, td = equations_of_motion(self.spec, p)
        return np.concatenate([xd, pd, td])


# Dormand-Prince 5(4) tableau; the 5th-order solution is propagated.
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784,
                   11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])
_DP_ERR = _DP_B5 - _DP_B4


def _error_norm(err, y0, y1, rel_tol, abs_tol):
    scale = abs_tol + rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def integrate(spec: HamiltonianSpec, p0: PhasePoint, cfg: IntegratorConfig,
              span: float | tuple[float, float],
              monitors: Sequence[Observable] = ()) -> Trajectory:
    """Integrate the flow over the affine-parameter span, recording every
    accepted step and the value of each monitor observable there.

    Stops with status "domain-stop" (reported, not fatal) when the orbit
    approaches a chart exclusion zone within ``cfg.domain_margin`` or a step
    cannot stay inside the domain.  Raises MaxStepsExceeded / NonFiniteState.
    """
    ctx = spec.ctx
    chart = ctx.chart
    ctx.check_point(p0)
    chart.require_domain(p0.x)
    tau0, tau1 = (0.0, float(span)) if np.isscalar(span) else map(float, span)
    if not np.isfinite(tau1 - tau0) or tau1 <= tau0:
        raise ValueError("span must be a finite, increasing interval")

    flow = _Flow(spec)
    d = chart.dim

    taus = [tau0]
    states = [_pack(p0)]
    monvals = {obs.name: [obs.value(p0)] for obs in monitors}
    accepted = 0
    rejected = 0
    status = "completed"

    def in_domain(y) -> bool:
        x = y[:d]
        if not chart.in_domain(x):
            return False
        if cfg.domain_margin > 0.0 and chart.boundary_distance is not None:
            if chart.boundary_distance(x) < cfg.domain_margin:
                return False
        return True

    def record(tau, y):
        taus.append(tau)
        states.append(y.copy())
        p = _unpack(y, d)
        for obs in monitors:
            monvals[obs.name].append(obs.value(p))

    if cfg.method == "rk4-fixed":
        status = _run_rk4(flow, states, taus, record, in_domain, cfg,
                          tau0, tau1)
        accepted = len(taus) - 1
    else:
        status, accepted, rejected = _run_dp54(flow, states, taus, record,
                                               in_domain, cfg, tau0, tau1)

    return Trajectory(
        chart_dim=d,
        algebra_dim=ctx.algebra_dim,
        taus=np.asarray(taus),
        states=np.asarray(states),
        monitor_names=tuple(obs.name for obs in monitors),
        monitor_values={k: np.asarray(v) for k, v in monvals.items()},
        accepted=accepted,
        rejected=rejected,
        status=status,
    )


def _rk4_step(flow, y, h):
    k1 = flow(y)
    k2 = flow(y + 0.5 * h * k1)
    k3 = flow(y + 0.5 * h * k2)
    k4 = flow(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _run_rk4(flow, states, taus, record, in_domain, cfg, tau0, tau1):
    n_steps = max(1, int(math.ceil((tau1 - tau0) / cfg.step - 1e-12)))
    if n_steps > cfg.max_steps:
        raise MaxStepsExceeded(f"{n_steps} fixed steps exceed the budget")
    h = (tau1 - tau0) / n_steps
    tau = tau0
    y = states[0]
    for _ in range(n_steps):
        try:
            y_new = _rk4_step(flow, y, h)
        except OutOfDomain:
            return "domain-stop"
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState(f"non-finite state at tau = {tau + h}")
        if not in_domain(y_new):
            return "domain-stop"
        tau += h
        record(tau, y_new)
        y = y_new
    return "completed"


def _initial_step(flow, y0, f0, tau1, tau0, rel_tol, abs_tol):
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h0, (tau1 - tau0) / 10.0)


def _run_dp54(flow, states, taus, record, in_domain, cfg, tau0, tau1):
    y = states[0]
    tau = tau0
    accepted = 0
    rejected = 0
    try:
        k1 = flow(y)
    except OutOfDomain:
        return "domain-stop", 0, 0
    h = _initial_step(flow, y, k1, tau1, tau0, cfg.rel_tol, cfg.abs_tol)
    h_floor = max(1e-14 * (tau1 - tau0), 1e-300)
    steps = 0
    while tau < tau1:
        if steps >= cfg.max_steps:
            raise MaxStepsExceeded(f"no convergence within {cfg.max_steps} steps")
        steps += 1
        h = min(h, tau1 - tau)
        ks = [k1]
        failed = False
        try:
            for row in _DP_A[1:]:
                yi = y + h * sum(a * k for a, k in zip(row, ks))
                ks.append(flow(yi))
        except OutOfDomain:
            failed = True
        if not failed:
            ks = np.asarray(ks)
            y_new = y + h * np.tensordot(_DP_B5, ks, axes=1)
            err = h * np.tensordot(_DP_ERR, ks, axes=1)
            if not np.all(np.isfinite(y_new)):
                failed = True
        if failed:
            rejected += 1
            h *= 0.5
            if h < h_floor:
                return "domain-stop", accepted, rejected
            continue
        norm = _error_norm(err, y, y_new, cfg.rel_tol, cfg.abs_tol)
        if norm <= 1.0:
            if not in_domain(y_new):
                rejected += 1
                h *= 0.5
                if h < h_floor:
                    return "domain-stop", accepted, rejected
                k1 = flow(y)
                continue
            tau += h
            record(tau, y_new)
            y = y_new
            k1 = ks[6]          # FSAL
            accepted += 1
        else:
            rejected += 1
        factor = 0.9 * norm ** -0.2 if norm > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if h < h_floor:
            raise NonFiniteState("step size underflow")
    return "completed", accepted, rejected


# ---------------------------------------------------------------------------
# trajectory export

def trajectory_to_csv(traj: Trajectory, path, coordinate_names: Sequence[str]):
    d, k = traj.chart_dim, traj.algebra_dim
    header = (["tau"] + list(coordinate_names)
              + [f"pi_{n}" for n in coordinate_names]
              + [f"t_{a+1}" for a in range(k)]
              + [f"m_{name}" for name in traj.monitor_names])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, tau in enumerate(traj.taus):
            row = [repr(float(tau))]
            row += [repr(float(v)) for v in traj.states[i]]
            row += [repr(float(traj.monitor_values[name][i]))
                    for name in traj.monitor_names]
            writer.writerow(row)


def trajectory_summary(traj: Trajectory) -> dict:
    return {
        "status": traj.status,
        "accepted_steps": traj.accepted,
        "rejected_steps": traj.rejected,
        "final_tau": float(traj.taus[-1]),
        "samples": int(len(traj.taus)),
        "drift": {
            name: {
                "max_abs": traj.max_abs_drift(name),
                "max_relative": traj.max_relative_drift(name),
                "initial_value": float(traj.monitor_values[name][0]),
            }
            for name in traj.monitor_names
        },
    }


def trajectory_to_json(traj: Trajectory, path, metadata: dict | None = None):
    doc = {"metadata": metadata or {}, "summary": trajectory_summary(traj)}
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")

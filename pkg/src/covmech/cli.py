"""Command-line front end.

    covmech simulate      config.json [--output DIR] [--seed N]
    covmech verify        config.json [--output DIR] [--seed N] [--points N]
                                       [--negative-controls]
    covmech bracket-table config.json [--output DIR] [--seed N] [--points N]

One JSON document configures one run; every report embeds the resolved config
so a run can be reproduced from its own output.  Exit codes: 0 pass, 1 check
failure, 2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .catalog import BUILDERS, CatalogSystem, build_system
from .dynamics import (IntegratorConfig, Trajectory, integrate,
                       momentum_from_velocity, trajectory_summary,
                       trajectory_to_csv, trajectory_to_json)
from .errors import (ConfigError, CovmechError, MaxStepsExceeded,
                     NonFiniteState, UnknownObservable)
from .phase import PhasePoint
from .verify import bracket_table, sample_points, verify_report

_DEFAULTS = {
    "params": {},
    "initial": None,
    "integrator": {},
    "span": None,
    "monitors": None,
    "observables": None,
    "seed": 0,
    "points": 100,
    "output_basename": None,
}


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "system" not in raw:
        raise ConfigError("config is missing the 'system' field")
    cfg = dict(_DEFAULTS)
    cfg.update(raw)
    unknown = set(raw) - set(_DEFAULTS) - {"system"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if cfg["system"] not in BUILDERS:
        raise ConfigError(f"unknown system {cfg['system']!r}; "
                          f"available: {sorted(BUILDERS)}")
    return cfg


def _build(cfg: dict) -> CatalogSystem:
    try:
        return build_system(cfg["system"], cfg["params"])
    except (TypeError, ValueError, KeyError, CovmechError) as exc:
        raise ConfigError(f"in field 'params': {exc}") from exc


def _initial_point(system: CatalogSystem, cfg: dict) -> PhasePoint:
    init = cfg["initial"]
    if init is None:
        if system.default_initial is None:
            raise ConfigError("system has no default initial data; "
                              "provide the 'initial' field")
        return system.default_initial
    try:
        x = np.asarray(init["x"], dtype=float)
        if "pi" in init:
            pi = np.asarray(init["pi"], dtype=float)
        elif "v" in init:
            pi = momentum_from_velocity(system.hamiltonian, x,
                                        np.asarray(init["v"], dtype=float))
        else:
            raise ConfigError("field 'initial' needs 'pi' or 'v'")
        t = init.get("t", None)
        if t is None and system.initial_charges is not None:
            t = system.initial_charges
        point = PhasePoint.make(x, pi, t)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"in field 'initial': {exc}") from exc
    if not system.chart.in_domain(point.x):
        raise ConfigError("initial point lies outside the chart domain")
    system.ctx.check_point(point)
    return point


def _integrator_config(cfg: dict) -> IntegratorConfig:
    try:
        return IntegratorConfig(**cfg["integrator"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"in field 'integrator': {exc}") from exc


def _resolved(cfg: dict, system: CatalogSystem) -> dict:
    out = dict(cfg)
    out["params"] = system.params
    return out


def _monitor_list(system: CatalogSystem, cfg: dict) -> list:
    names = cfg["monitors"]
    if names is None:
        names = sorted(system.observables)
    try:
        return [system.observables[name] for name in names]
    except KeyError as exc:
        raise UnknownObservable(f"unknown monitor {exc.args[0]!r}") from exc


def cmd_simulate(cfg: dict, outdir: Path) -> int:
    system = _build(cfg)
    p0 = _initial_point(system, cfg)
    icfg = _integrator_config(cfg)
    span = cfg["span"] if cfg["span"] is not None else system.default_span
    monitors = _monitor_list(system, cfg)
    traj = integrate(system.hamiltonian, p0, icfg, span, monitors)
    base = cfg["output_basename"] or f"simulate_{system.name}"
    csv_path = outdir / f"{base}.csv"
    json_path = outdir / f"{base}.json"
    trajectory_to_csv(traj, csv_path, system.chart.coordinate_names)
    trajectory_to_json(traj, json_path,
                       metadata={"config": _resolved(cfg, system),
                                 "chart": list(system.chart.coordinate_names)})
    summary = trajectory_summary(traj)
    if traj.status == "domain-stop":
        print(f"warning: domain stop at tau = {summary['final_tau']:.6g}")
    for name, drift in summary["drift"].items():
        print(f"drift {name}: max_rel = {drift['max_relative']:.3e} "
              f"max_abs = {drift['max_abs']:.3e}")
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_verify(cfg: dict, outdir: Path,
               include_negative_controls: bool = False) -> int:
    system = _build(cfg)
    report = verify_report(system, seed=cfg["seed"], n_points=cfg["points"],
                           include_negative_controls=include_negative_controls)
    report["config"] = _resolved(cfg, system)
    base = cfg["output_basename"] or f"verify_{system.name}"
    path = outdir / f"{base}.json"
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    failed = []
    for check in report["checks"]:
        status = "PASS" if check["pass"] else "FAIL"
        print(f"{status} {check['check']} {check['observable']}")
        if not check["pass"]:
            failed.append(check)
    for control in report["negative_controls"]:
        status = "PASS" if control["pass"] else "FAIL"
        print(f"{status} negative-control {control['observable']} "
              f"(expected to fail its check)")
        if not control["pass"]:
            failed.append(control)
    print(f"wrote {path}")
    return 1 if failed else 0


def cmd_bracket_table(cfg: dict, outdir: Path) -> int:
    system = _build(cfg)
    names = cfg["observables"]
    if names is None:
        names = sorted(system.observables)
    if len(names) < 2:
        raise ConfigError("bracket-table needs at least two observables")
    rng = np.random.default_rng(cfg["seed"])
    points = sample_points(system, rng, cfg["points"])
    table = bracket_table(system, names, points)
    table["config"] = _resolved(cfg, system)
    base = cfg["output_basename"] or f"bracket_table_{system.name}"
    path = outdir / f"{base}.json"
    with open(path, "w") as fh:
        json.dump(table, fh, sort_keys=True, indent=2)
        fh.write("\n")
    for i, gi in enumerate(names):
        for j, gj in enumerate(names):
            if j <= i:
                continue
            flag = "commute" if table["commuting"][i][j] else "       "
            print(f"|{{{gi},{gj}}}| <= {table['max_abs'][i][j]:.3e}  {flag}")
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="covmech",
        description="covariant Hamiltonian mechanics: simulate trajectories, "
                    "verify constants of motion, tabulate brackets")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "verify", "bracket-table"):
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--output", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--points", type=int, default=None)
        if name == "verify":
            p.add_argument("--negative-controls", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.points is not None:
            cfg["points"] = args.points
        outdir = Path(args.output)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            return cmd_simulate(cfg, outdir)
        if args.command == "verify":
            return cmd_verify(cfg, outdir, args.negative_controls)
        return cmd_bracket_table(cfg, outdir)
    except (ConfigError, UnknownObservable) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonFiniteState, MaxStepsExceeded) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points.

Subcommands:

* ``list``         catalog of scenarios with the claim each demonstrates
* ``experiment``   run one named scenario end to end
* ``simulate``     one ad-hoc estimator run from a config file
* ``koopman``      build and dump operators/projectors from a config file

Exit codes: 0 success, 1 scenario assertion failed, 2 configuration error.
``--threads`` bounds scenario-level worker parallelism only; it never
affects numerical results, which are bit-reproducible for equal
(config, seed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .averaging import (
    birkhoff_average,
    coverage_detail,
    itea,
    occupancy_decay,
    visit_fraction,
)
from .config import (
    ConfigError,
    build_ensemble,
    build_map,
    build_partition,
    build_region,
    config_hash,
    load_config_file,
)
from .geometry import GeometryError, PhasePoint
from .maps import MapError, RationalApproximant
from .observables import ConstantObservable, FourierMode, IndicatorObservable
from .operators import (
    cesaro_projector,
    fourier_koopman_rotation,
    fourier_projector_rotation,
    save_operator,
    ulam_matrix,
)
from .results import ContinuityCurve, CurveRow, format_value
from .experiments import (
    SCENARIO_CLAIMS,
    SCENARIOS,
    Report,
    run_scenario,
)

_USAGE_ERROR = 2


def _shared_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker bound for independent sweep points "
                             "(never changes results)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="row output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergostab",
        description="perturbation stability experiments for measure-preserving maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="catalog the available scenarios")

    p_exp = sub.add_parser("experiment", help="run a named scenario")
    p_exp.add_argument("name", help="scenario name (see `ergostab list`)")
    _shared_options(p_exp)

    p_sim = sub.add_parser("simulate", help="one ad-hoc estimator run")
    _shared_options(p_sim)

    p_koop = sub.add_parser("koopman", help="build and dump operators")
    _shared_options(p_koop)

    return parser


def _load_overrides(path: str | None) -> dict:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    return load_config_file(path)


def _cmd_list() -> int:
    for name in SCENARIOS:
        print(f"{name}")
        print(f"    {SCENARIO_CLAIMS[name]}")
    return 0


def _cmd_experiment(args) -> int:
    if args.name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {args.name!r} "
                          f"(available: {', '.join(SCENARIOS)})")
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    overrides = _load_overrides(args.config)
    report = run_scenario(args.name, overrides, seed=args.seed)
    report.write_outputs(args.out, fmt=args.format)
    for v in report.verdicts:
        status = "PASS" if v.passed else "FAIL"
        print(f"[{status}] {v.name}: {v.detail}")
    print(f"report: {os.path.join(args.out, report.scenario + '.json')}")
    return 0 if report.passed else 1


def _build_observable(table: dict, topology) -> object:
    kind = table.get("kind", "indicator")
    if kind == "indicator":
        return IndicatorObservable(build_region(table["region"], topology))
    if kind == "fourier_mode":
        return FourierMode(int(table["m"]), int(table["n"]))
    if kind == "constant":
        return ConstantObservable(float(table.get("value", 1.0)))
    raise ConfigError(f"unknown observable kind {kind!r}")


def _cmd_simulate(args) -> int:
    if args.config is None:
        raise ConfigError("simulate needs --config")
    cfg = _load_overrides(args.config)
    if args.seed is not None:
        cfg["seed"] = int(args.seed)
    try:
        sim = cfg["simulate"]
        mapdef = build_map(cfg["map"])
    except KeyError as err:
        raise ConfigError(f"missing config table: {err}") from None
    topo = tuple(mapdef.topology)
    estimator = sim.get("estimator", "visit_fraction")
    seed = int(cfg.get("seed", 0))
    curve = ContinuityCurve("simulate", estimator)

    if estimator == "birkhoff":
        x0 = PhasePoint(tuple(float(c) for c in sim["x0"]), topo)
        psi = _build_observable(cfg.get("observable", {}), topo)
        val = birkhoff_average(mapdef, psi, x0, int(sim["horizon"]))
        curve.append(CurveRow(0, "x0", int(sim["horizon"]),
                              float(np.real(val)), abs(np.imag(val))))
        print(f"birkhoff average = {format_value(val)}")
    elif estimator in ("itea", "visit_fraction"):
        src = build_region(cfg["regions"]["source"], topo)
        spec = build_ensemble({**cfg["ensemble"], "seed": seed}, src)
        if estimator == "itea":
            psi = _build_observable(cfg.get("observable", {}), topo)
            res = itea(mapdef, spec, psi, int(sim["horizon"]))
        else:
            det = build_region(cfg["regions"]["detector"], topo)
            res = visit_fraction(mapdef, spec, det, int(sim["horizon"]))
        curve.append(CurveRow(0, estimator, res.horizon,
                              float(np.real(res.value)), res.stderr))
        print(f"{estimator} = {format_value(res.value)} +- {res.stderr:.3e} "
              f"(ensemble {res.ensemble})")
    elif estimator == "coverage":
        src = build_region(cfg["regions"]["source"], topo)
        spec = build_ensemble({**cfg["ensemble"], "seed": seed}, src)
        part = build_partition(cfg["partition"], topo)
        detail = coverage_detail(mapdef, spec, part, int(sim["horizon"]))
        curve.append(CurveRow(0, "coverage", int(sim["horizon"]), detail.fraction))
        print(f"coverage = {detail.fraction:.6f} "
              f"({detail.cells_visited}/{detail.cell_count} cells, "
              f"overflow visited: {detail.overflow_visited})")
    elif estimator == "occupancy_decay":
        src = build_region(cfg["regions"]["source"], topo)
        spec = build_ensemble({**cfg["ensemble"], "seed": seed}, src)
        trap = build_region(cfg["regions"]["trap"], topo)
        curve = occupancy_decay(mapdef, spec, trap, [int(h) for h in sim["horizons"]])
        curve.label = "simulate"
        for row in curve.rows:
            print(f"N={row.horizon}: occupancy = {row.value:.6f} +- {row.stderr:.3e}")
    else:
        raise ConfigError(f"unknown estimator {estimator!r}")

    report = Report(scenario="simulate", config=cfg, config_hash=config_hash(cfg),
                    seed=seed, curves=[curve])
    report.write_outputs(args.out, fmt=args.format)
    return 0


def _cmd_koopman(args) -> int:
    if args.config is None:
        raise ConfigError("koopman needs --config")
    cfg = _load_overrides(args.config)
    try:
        table = cfg["koopman"]
        map_table = cfg["map"]
    except KeyError as err:
        raise ConfigError(f"missing config table: {err}") from None
    basis = table.get("basis", "fourier")
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    os.makedirs(args.out, exist_ok=True)

    if basis == "fourier":
        if map_table.get("kind") != "torus_rotation":
            raise ConfigError("the fourier basis is exact for torus rotations only")
        cutoff = int(table["cutoff"])
        alpha: object = float(map_table["alpha"])
        if "alpha_rational" in map_table:
            num, den = (int(x) for x in map_table["alpha_rational"].split("/"))
            alpha = RationalApproximant(num, den, num / den)
        beta = float(map_table["beta"])
        u = fourier_koopman_rotation(alpha, beta, cutoff)
        proj = fourier_projector_rotation(alpha, beta, cutoff)
        unitarity = float(np.linalg.norm(np.abs(u.diag) - 1.0))
        print(f"fourier operator: {u.basis.size} modes, "
              f"unitarity defect = {unitarity:.3e}")
        print(f"analytic projector rank = {proj.rank_estimate}")
    elif basis == "ulam":
        mapdef = build_map(map_table)
        part = build_partition(table["partition"], tuple(mapdef.topology))
        u = ulam_matrix(mapdef, part, int(table["samples_per_cell"]), seed)
        rows = float(np.max(np.abs(u.matrix.sum(axis=1) - 1.0)))
        print(f"ulam operator: {u.basis.size} cells, row-sum defect = {rows:.3e}")
        proj = None
        if table.get("projector", True):
            proj = cesaro_projector(u, int(table.get("n_op", 2**21)),
                                    float(table.get("tol", 1e-4)))
            m = proj.matrix
            print(f"cesaro projector: N={proj.n_averaged}, "
                  f"residual={proj.residual:.3e}, converged={proj.converged}, "
                  f"||P^2-P||={np.linalg.norm(m @ m - m):.3e}, "
                  f"||PU-P||={np.linalg.norm(m @ u.matrix - m):.3e}")
    else:
        raise ConfigError(f"unknown basis {basis!r}")

    op_path = os.path.join(args.out, "operator.npz")
    save_operator(u, op_path)
    print(f"wrote {op_path}")
    if proj is not None:
        proj_path = os.path.join(args.out, "projector.npz")
        save_operator(proj, proj_path)
        print(f"wrote {proj_path}")
    if args.format == "csv":
        mat = u.matrix_full()
        csv_path = os.path.join(args.out, "operator.csv")
        with open(csv_path, "w", newline="") as fh:
            for row in np.atleast_2d(mat):
                fh.write(",".join(format_value(v) for v in row) + "\n")
        print(f"wrote {csv_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "koopman":
            return _cmd_koopman(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, GeometryError, MapError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return _USAGE_ERROR


def cli_main(argv) -> int:
    """Programmatic entry point mirroring the console script."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())

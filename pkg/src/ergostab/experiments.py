"""Named end-to-end scenarios with seeded, reproducible outputs.

Each runner takes a resolved config dict (see ``default_config``), computes
its curves, checks its scenario assertions against config-stored
tolerances, and returns a Report.  Reports write one CSV per curve with the
fixed column schema, a JSON mirror with metadata and timings, and a gnuplot
script referencing the CSVs relatively.  Identical (config, seed) reruns
produce byte-identical CSVs; the worker-count flag of the CLI never touches
the numerics.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .averaging import (
    coverage_detail,
    occupancy_decay_points,
    pairing_samples,
    uniform_start_points,
    visit_fraction,
)
from .config import (
    ConfigError,
    build_map,
    build_partition,
    build_region,
    config_hash,
    merge_config,
)
from .geometry import (
    CYLINDER_2D,
    PERIODIC,
    TORUS_2D,
    Box,
    Disk,
    EnsembleSpec,
    GridPartition,
    sample_array,
)
from .maps import (
    SkewProduct,
    StandardMapCylinder,
    StandardMapTorus,
    TorusRotation,
    convergents,
)
from .operators import default_probe, eta, fourier_projector_rotation
from .results import ContinuityCurve, CurveRow

GOLDEN = (math.sqrt(5) - 1) / 2
SQRT2M1 = math.sqrt(2) - 1


def subseed(seed: int, tag: str) -> int:
    """Stable 63-bit stream seed for one named use of the run seed."""
    digest = hashlib.sha256(f"{seed}:{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: str


@dataclass
class Report:
    """Everything one scenario run produced, ready to serialize."""

    scenario: str
    config: dict
    config_hash: str
    seed: int
    curves: list[ContinuityCurve] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "curves": [
                {
                    "label": c.label,
                    "value_kind": c.value_kind,
                    "rows": [
                        {
                            "epsilon_index": r.eps_index,
                            "epsilon_desc": r.eps_desc,
                            "horizon": r.horizon,
                            "value": r.value,
                            "stderr": r.stderr,
                            "verdict": r.verdict,
                        }
                        for r in c.rows
                    ],
                }
                for c in self.curves
            ],
            "verdicts": [
                {"name": v.name, "passed": v.passed, "detail": v.detail}
                for v in self.verdicts
            ],
            "timings": self.timings,
            "metadata": self.metadata,
        }

    def write_outputs(self, out_dir: str, fmt: str = "csv") -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        written = []
        if fmt == "csv":
            for curve in self.curves:
                path = os.path.join(out_dir, f"{self.scenario}__{curve.label}.csv")
                with open(path, "w", newline="") as fh:
                    fh.write(curve.to_csv(self.scenario))
                written.append(path)
            plot = os.path.join(out_dir, f"{self.scenario}.plot")
            with open(plot, "w", newline="") as fh:
                fh.write(self._plot_script())
            written.append(plot)
        path = os.path.join(out_dir, f"{self.scenario}.json")
        with open(path, "w", newline="") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
        return written

    def _plot_script(self) -> str:
        lines = [
            f"# gnuplot script for the {self.scenario} scenario",
            "set datafile separator ','",
            "set key autotitle columnhead",
            "set terminal pngcairo size 960,640",
        ]
        for curve in self.curves:
            csv = f"{self.scenario}__{curve.label}.csv"
            png = f"{self.scenario}__{curve.label}.png"
            xcol = "4" if curve.value_kind == "occupancy" else "2"
            xlabel = "horizon" if curve.value_kind == "occupancy" else "epsilon index"
            lines += [
                f"set output '{png}'",
                f"set xlabel '{xlabel}'",
                f"set ylabel '{curve.value_kind}'",
                ("set logscale x" if curve.value_kind == "occupancy" else "unset logscale"),
                f"plot '{csv}' using {xcol}:5:6 with yerrorlines title '{curve.label}'",
            ]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Default configurations


def default_config(scenario: str) -> dict:
    try:
        factory = _DEFAULTS[scenario]
    except KeyError:
        raise ConfigError(f"unknown scenario {scenario!r}") from None
    return factory()


def _rotation_approximants_defaults() -> dict:
    return {
        "spec_version": 1,
        "scenario": "rotation_approximants",
        "seed": 20260810,
        "map": {"kind": "torus_rotation", "alpha": GOLDEN, "beta": SQRT2M1},
        "schedule": {"max_denominator": 34},
        "regions": {
            "source": {"shape": "disk", "center": [0.5, 0.5], "diameter": 0.1},
            "detector": {"shape": "disk", "center": [0.15, 0.8], "diameter": 0.2},
        },
        "ensemble": {"count": 200, "sampler": "uniform"},
        "horizons": {"visit": 20000, "coverage": 4000},
        "basis": {"probe_cutoff": 8, "grid": [64, 64]},
        "eta": {"horizon": 100000, "count": 32},
        "tolerances": {
            "coverage_full": 0.99,
            "eta_last": 0.05,
            "eta_monotone_slack": 1e-12,
            "eta_traj_abs": 0.01,
            "se_factor": 3.0,
        },
    }


def _source_detector_defaults() -> dict:
    return {
        "spec_version": 1,
        "scenario": "source_detector",
        "seed": 20260811,
        "map": {"kind": "torus_rotation", "alpha": GOLDEN, "beta": SQRT2M1},
        "sweep": {"centers": [0.2, 0.5, 0.8], "source_diameter": 0.1,
                  "detector_side": 0.25},
        "control": {"alpha_num": 1, "alpha_den": 2},
        "ensemble": {"count": 48, "sampler": "uniform"},
        "horizons": {"visit": 50000},
        "tolerances": {"abs_floor": 0.005, "se_factor": 3.0,
                       "control_se_factor": 10.0},
    }


def _standard_map_defaults() -> dict:
    return {
        "spec_version": 1,
        "scenario": "standard_map_counterexample",
        "seed": 20260812,
        "map": {"kind": "standard_map_torus", "K": 0.0},
        "schedule": {"k_values": [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]},
        "regions": {
            "seed_region": {"shape": "box", "intervals": [[0.0, 0.05], [0.0, 0.05]]},
        },
        "ensemble": {"count": 100, "sampler": "uniform"},
        "horizons": {"coverage": 20000},
        "basis": {"grid": [64, 64]},
        # chaotic_above is oracle-validated: long-run coverage at K=2 saturates
        # near 0.81 because the main stability island (~19% of the torus,
        # stable for K < 4) is unreachable from the chaotic sea
        "tolerances": {
            "confined_k": 0.5,
            "confined_below": 0.5,
            "chaotic_k": 2.0,
            "chaotic_above": 0.75,
            "steep_jump": 0.2,
            "integrable_above": 0.12,
        },
    }


def _dissipative_defaults() -> dict:
    return {
        "spec_version": 1,
        "scenario": "dissipative_transition",
        "seed": 20260813,
        "map": {"kind": "standard_map_cylinder", "K": 4.0},
        "schedule": {"k_values": [4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5,
                                  8.0, 8.5, 9.0, 9.5, 10.0]},
        "regions": {
            "source": {"shape": "box", "topology": ["real", "periodic"],
                       "intervals": [[-0.5, 0.5], [0.0, 1.0]]},
            "trap": {"shape": "box", "topology": ["real", "periodic"],
                     "intervals": [[-math.pi, math.pi], [0.0, 1.0]]},
        },
        "ensemble": {"count": 64, "sampler": "uniform"},
        "horizons": {"sweep": [1000, 10000, 100000],
                     "decay": [1000, 10000, 100000, 1000000],
                     "decay_k": 8.0},
        "tolerances": {"max_adjacent_jump": 0.1},
    }


def _skew_defaults() -> dict:
    cfg = _dissipative_defaults()
    cfg["scenario"] = "skew_quasiperiodic"
    cfg["seed"] = 20260814
    cfg["drive"] = {"frequencies": [GOLDEN, SQRT2M1], "amplitudes": [0.3, 0.2]}
    cfg["measure_check"] = {"points": 200000, "cells": [8, 8, 4, 4]}
    return cfg


_DEFAULTS = {
    "rotation_approximants": _rotation_approximants_defaults,
    "source_detector": _source_detector_defaults,
    "standard_map_counterexample": _standard_map_defaults,
    "dissipative_transition": _dissipative_defaults,
    "skew_quasiperiodic": _skew_defaults,
}

SCENARIO_CLAIMS = {
    "rotation_approximants": (
        "visit statistics and coverage along rational approximants of an "
        "ergodic rotation: the projected-pairing continuity functional "
        "decays along the convergents and coverage saturates once the "
        "denominator exceeds the inverse source diameter"
    ),
    "source_detector": (
        "for an ergodic base map the mean visit-time fraction is close to "
        "the detector measure for every source/detector placement; a "
        "rational-frequency control shows the violation for non-ergodic maps"
    ),
    "standard_map_counterexample": (
        "phase-space coverage of the standard map changes steeply across a "
        "narrow window of the kick strength (invariant-circle breakup), in "
        "contrast with the smooth rotation curves"
    ),
    "dissipative_transition": (
        "trap occupancy of the cylinder map decays with the horizon and its "
        "large-horizon summary varies smoothly with the kick strength - no "
        "threshold in the transition from bounded to unbounded motion"
    ),
    "skew_quasiperiodic": (
        "the same smooth transition persists under a quasiperiodic drive "
        "with incommensurate frequencies, treated as an autonomous "
        "skew-product map with an invariant product measure"
    ),
}


# ---------------------------------------------------------------------------
# Scenario implementations


def _mean_se(vals: np.ndarray) -> tuple[float, float]:
    if vals.shape[0] < 2:
        return float(np.mean(vals.real)), 0.0
    if np.iscomplexobj(vals):
        var = vals.real.var(ddof=1) + vals.imag.var(ddof=1)
        return float(np.mean(vals).real), math.sqrt(var / vals.shape[0])
    return float(np.mean(vals)), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def run_rotation_approximants(cfg: dict) -> Report:
    report = _new_report(cfg)
    seed = cfg["seed"]
    tol = cfg["tolerances"]
    base = build_map(cfg["map"])
    if not isinstance(base, TorusRotation):
        raise ConfigError("rotation_approximants needs a torus_rotation map")
    approx = convergents(base.alpha, int(cfg["schedule"]["max_denominator"]))
    if not approx:
        raise ConfigError("no convergents below the configured denominator bound")
    source = build_region(cfg["regions"]["source"])
    detector = build_region(cfg["regions"]["detector"])
    delta = cfg["regions"]["source"]["diameter"]
    count = int(cfg["ensemble"]["count"])
    sampler = cfg["ensemble"].get("sampler", "uniform")
    grid = build_partition({"cells": cfg["basis"]["grid"]})
    cutoff = int(cfg["basis"]["probe_cutoff"])
    probe = default_probe(cutoff)
    p_base = fourier_projector_rotation(base.alpha, base.beta, cutoff)

    eta_oracle = ContinuityCurve("eta_oracle", "eta")
    eta_traj = ContinuityCurve("eta_trajectory", "eta")
    visits = ContinuityCurve("visit_fraction", "visit_fraction")
    cover = ContinuityCurve("coverage", "coverage")

    t0 = time.perf_counter()
    oracle_vals = []
    for i, r in enumerate(approx, start=1):
        p_eps = fourier_projector_rotation(r, base.beta, cutoff)
        val = eta(probe, probe, p_eps, p_base)
        oracle_vals.append(val)
        eta_oracle.append(CurveRow(i, f"D={r.denominator}", 0, val))
    report.timings["eta_oracle"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    n_eta = int(cfg["eta"]["horizon"])
    x0 = uniform_start_points(base, int(cfg["eta"]["count"]), subseed(seed, "eta-x0"))
    base_pairs = pairing_samples(base, probe, probe, n_eta, x0)
    traj_vals = []
    for i, r in enumerate(approx, start=1):
        pert = TorusRotation(r.value, base.beta)
        diff = pairing_samples(pert, probe, probe, n_eta, x0) - base_pairs
        _, se = _mean_se(diff)
        val = abs(np.mean(diff))
        traj_vals.append((val, se))
        eta_traj.append(CurveRow(i, f"D={r.denominator}", n_eta, val, se))
    report.timings["eta_trajectory"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    n_visit = int(cfg["horizons"]["visit"])
    n_cover = int(cfg["horizons"]["coverage"])
    members = [(0, "base", base)] + [
        (i, f"D={r.denominator}", TorusRotation(r.value, base.beta))
        for i, r in enumerate(approx, start=1)
    ]
    coverage_vals = {}
    for i, desc, mapdef in members:
        spec = EnsembleSpec(source, count, sampler, subseed(seed, "visit"))
        res = visit_fraction(mapdef, spec, detector, n_visit)
        visits.append(CurveRow(i, desc, n_visit, float(res.value), res.stderr))
        spec = EnsembleSpec(source, count, sampler, subseed(seed, "coverage"))
        detail = coverage_detail(mapdef, spec, grid, n_cover)
        coverage_vals[desc] = detail.fraction
        cover.append(CurveRow(i, desc, n_cover, detail.fraction))
    report.timings["visit_coverage"] = time.perf_counter() - t0

    report.curves += [eta_oracle, eta_traj, visits, cover]
    slack = tol["eta_monotone_slack"]
    mono = all(b <= a + slack for a, b in zip(oracle_vals, oracle_vals[1:]))
    report.verdicts.append(Verdict(
        "eta_oracle_nonincreasing", mono,
        f"oracle eta along D={[r.denominator for r in approx]}: {oracle_vals}"))
    report.verdicts.append(Verdict(
        "eta_oracle_last_small", oracle_vals[-1] < tol["eta_last"],
        f"eta(D={approx[-1].denominator}) = {oracle_vals[-1]:.3e} < {tol['eta_last']}"))
    bad = [
        (r.denominator, tv, ov)
        for r, (tv, se), ov in zip(approx, traj_vals, oracle_vals)
        if abs(tv - ov) > max(tol["se_factor"] * se, tol["eta_traj_abs"])
    ]
    report.verdicts.append(Verdict(
        "eta_trajectory_matches_oracle", not bad,
        "all trajectory estimates within tolerance" if not bad else f"mismatches: {bad}"))
    full = [f"D={r.denominator}" for r in approx if r.denominator > 1.0 / delta]
    cov_ok = all(coverage_vals[d] >= tol["coverage_full"] for d in full)
    report.verdicts.append(Verdict(
        "coverage_full_above_inverse_diameter", cov_ok,
        f"coverage for D > {1.0 / delta:g}: "
        + ", ".join(f"{d}: {coverage_vals[d]:.4f}" for d in full)))
    report.verdicts.append(Verdict(
        "coverage_ergodic_base", coverage_vals["base"] >= tol["coverage_full"],
        f"base coverage = {coverage_vals['base']:.4f}"))
    report.metadata["denominators"] = [r.denominator for r in approx]
    report.metadata["source_diameter"] = delta
    return report


def run_source_detector(cfg: dict) -> Report:
    report = _new_report(cfg)
    seed = cfg["seed"]
    tol = cfg["tolerances"]
    base = build_map(cfg["map"])
    sweep = cfg["sweep"]
    centers = list(sweep["centers"])
    src_d = float(sweep["source_diameter"])
    det_side = float(sweep["detector_side"])
    count = int(cfg["ensemble"]["count"])
    n = int(cfg["horizons"]["visit"])
    mu_d = det_side * det_side

    def detector_at(cx, cy):
        lo_p = (cx - det_side / 2) % 1.0
        lo_q = (cy - det_side / 2) % 1.0
        return Box((
            (lo_p, (lo_p + det_side) % 1.0),
            (lo_q, (lo_q + det_side) % 1.0),
        ), TORUS_2D)

    placements = [
        (si, di, Disk((sx, sy), src_d), detector_at(dx, dy))
        for si, (sx, sy) in enumerate((a, b) for a in centers for b in centers)
        for di, (dx, dy) in enumerate((a, b) for a in centers for b in centers)
    ]

    fractions = ContinuityCurve("visit_fractions", "visit_fraction")
    t0 = time.perf_counter()
    worst = (0.0, "")
    ok = True
    for si, di, src, det in placements:
        spec = EnsembleSpec(src, count, "uniform", subseed(seed, f"sd-{si}-{di}"))
        res = visit_fraction(base, spec, det, n)
        dev = abs(res.value - mu_d)
        if dev > max(tol["se_factor"] * res.stderr, tol["abs_floor"]):
            ok = False
        if dev > worst[0]:
            worst = (dev, f"s{si}-d{di}")
        fractions.append(CurveRow(si * len(centers) ** 2 + di, f"s{si}-d{di}", n,
                                  float(res.value), res.stderr))
    report.timings["sweep"] = time.perf_counter() - t0
    report.verdicts.append(Verdict(
        "ergodic_fractions_near_detector_measure", ok,
        f"worst |fraction - mu(D)| = {worst[0]:.2e} at {worst[1]} "
        f"(mu(D) = {mu_d:g})"))

    # rational-frequency control: the same sweep must show a strong violation
    ctrl_cfg = cfg["control"]
    ctrl = TorusRotation(ctrl_cfg["alpha_num"] / ctrl_cfg["alpha_den"], base.beta)
    control = ContinuityCurve("control_fractions", "visit_fraction")
    t0 = time.perf_counter()
    violation = 0.0
    for si, di, src, det in placements[:: len(centers) ** 2]:
        spec = EnsembleSpec(src, count, "uniform", subseed(seed, f"ctrl-{si}-{di}"))
        res = visit_fraction(ctrl, spec, det, n)
        dev = abs(res.value - mu_d)
        se = max(res.stderr, 1e-12)
        violation = max(violation, dev / se)
        control.append(CurveRow(si, f"ctrl-s{si}-d{di}", n, float(res.value), res.stderr))
    report.timings["control"] = time.perf_counter() - t0
    report.verdicts.append(Verdict(
        "control_violates_detector_measure",
        violation > tol["control_se_factor"],
        f"max deviation = {violation:.1f} standard errors "
        f"(needs > {tol['control_se_factor']:g})"))

    full = visit_fraction(
        base,
        EnsembleSpec(Disk((centers[0], centers[0]), src_d), count, "uniform",
                     subseed(seed, "full")),
        Box(((0.0, 1.0), (0.0, 1.0)), TORUS_2D),
        200,
    )
    report.verdicts.append(Verdict(
        "full_torus_detector_is_one", full.value == 1.0,
        f"fraction = {full.value}"))
    report.curves += [fractions, control]
    report.metadata["detector_measure"] = mu_d
    return report


def run_standard_map_counterexample(cfg: dict) -> Report:
    report = _new_report(cfg)
    seed = cfg["seed"]
    tol = cfg["tolerances"]
    k_values = [float(k) for k in cfg["schedule"]["k_values"]]
    region = build_region(cfg["regions"]["seed_region"])
    count = int(cfg["ensemble"]["count"])
    n = int(cfg["horizons"]["coverage"])
    grid = build_partition({"cells": cfg["basis"]["grid"]})

    curve = ContinuityCurve("coverage_vs_k", "coverage")
    t0 = time.perf_counter()
    values = {}
    for i, k in enumerate(k_values):
        spec = EnsembleSpec(region, count, "uniform", subseed(seed, "seed-region"))
        detail = coverage_detail(StandardMapTorus(k), spec, grid, n)
        values[k] = detail.fraction
        curve.append(CurveRow(i, f"K={k:g}", n, detail.fraction))
    report.timings["sweep"] = time.perf_counter() - t0
    report.curves.append(curve)

    vals = [values[k] for k in k_values]
    jumps = [abs(b - a) for a, b in zip(vals, vals[1:])]
    report.verdicts.append(Verdict(
        "confined_below_breakup",
        values.get(tol["confined_k"], 1.0) < tol["confined_below"],
        f"coverage(K={tol['confined_k']:g}) = {values.get(tol['confined_k']):.4f}"))
    report.verdicts.append(Verdict(
        "chaotic_above_breakup",
        values.get(tol["chaotic_k"], 0.0) > tol["chaotic_above"],
        f"coverage(K={tol['chaotic_k']:g}) = {values.get(tol['chaotic_k']):.4f}"))
    report.verdicts.append(Verdict(
        "steep_change_exists", max(jumps) >= tol["steep_jump"],
        f"max adjacent coverage jump = {max(jumps):.3f}"))
    if 0.0 in values:
        report.verdicts.append(Verdict(
            "integrable_strips_only", values[0.0] <= tol["integrable_above"],
            f"coverage(K=0) = {values[0.0]:.4f} (seed-region momentum strips)"))
    report.metadata["k_values"] = k_values
    return report


def _dissipative_curves(cfg: dict, drive: dict | None) -> tuple[Report, np.ndarray]:
    report = _new_report(cfg)
    seed = cfg["seed"]
    tol = cfg["tolerances"]
    k_values = [float(k) for k in cfg["schedule"]["k_values"]]
    source = build_region(cfg["regions"]["source"], CYLINDER_2D)
    trap2 = build_region(cfg["regions"]["trap"], CYLINDER_2D)
    count = int(cfg["ensemble"]["count"])
    sweep_h = [int(h) for h in cfg["horizons"]["sweep"]]
    decay_h = [int(h) for h in cfg["horizons"]["decay"]]
    decay_k = float(cfg["horizons"]["decay_k"])

    if drive is None:
        def make_map(k):
            return StandardMapCylinder(k)
        trap = trap2
        def starts(tag):
            return sample_array(EnsembleSpec(source, count, "uniform", subseed(seed, tag)))
    else:
        freqs = tuple(float(w) for w in drive["frequencies"])
        amps = tuple(float(a) for a in drive["amplitudes"])
        def make_map(k):
            return SkewProduct(StandardMapCylinder(k), freqs, amps)
        # drive angles start at phase zero; the (p, q) draws are identical
        # to the undriven scenario under the same seed
        trap = Box(tuple(trap2.intervals) + ((0.0, 1.0),) * len(freqs),
                   CYLINDER_2D + (PERIODIC,) * len(freqs))
        def starts(tag):
            pq = sample_array(EnsembleSpec(source, count, "uniform", subseed(seed, tag)))
            return np.column_stack([pq, np.zeros((count, len(freqs)))])

    sweep = ContinuityCurve("occupancy_vs_k", "sweep_occupancy")
    t0 = time.perf_counter()
    summary = []
    for i, k in enumerate(k_values):
        curve = occupancy_decay_points(make_map(k), starts("sweep-src"), trap, sweep_h)
        last = curve.rows[-1]
        summary.append(last.value)
        sweep.append(CurveRow(i, f"K={k:g}", last.horizon, last.value, last.stderr))
    report.timings["sweep"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    decay = occupancy_decay_points(make_map(decay_k), starts("decay-src"), trap, decay_h)
    decay.label = "occupancy_decay"
    report.timings["decay"] = time.perf_counter() - t0

    control = occupancy_decay_points(make_map(0.0), starts("control-src"), trap,
                                     [100, 1000, 10000])
    control.label = "occupancy_control_k0"

    report.curves += [sweep, decay, control]
    jumps = [abs(b - a) for a, b in zip(summary, summary[1:])]
    report.verdicts.append(Verdict(
        "occupancy_summary_smooth_in_k",
        max(jumps) <= tol["max_adjacent_jump"],
        f"max adjacent jump = {max(jumps):.4f} <= {tol['max_adjacent_jump']:g} "
        f"over K = {k_values[0]:g}..{k_values[-1]:g}"))
    dec_vals = decay.values()
    report.verdicts.append(Verdict(
        "occupancy_decays_with_horizon",
        all(b < a for a, b in zip(dec_vals, dec_vals[1:])),
        f"occupancy at K={decay_k:g} over N={decay_h}: {dec_vals}"))
    ctrl_vals = control.values()
    report.verdicts.append(Verdict(
        "integrable_control_constant",
        max(ctrl_vals) - min(ctrl_vals) == 0.0,
        f"K=0 occupancy constant at {ctrl_vals[0]:.4f}"))
    report.metadata["surrogate"] = True
    report.metadata["surrogate_note"] = (
        "cylinder standard map stands in for the guiding-center transport "
        "model; unbounded-momentum escape is the dissipative mechanism"
    )
    return report, np.array(summary)


def run_dissipative_transition(cfg: dict) -> Report:
    report, _ = _dissipative_curves(cfg, drive=None)
    return report


def run_skew_quasiperiodic(cfg: dict) -> Report:
    report, _ = _dissipative_curves(cfg, drive=cfg["drive"])
    seed = cfg["seed"]
    count = int(cfg["ensemble"]["count"])
    source = build_region(cfg["regions"]["source"], CYLINDER_2D)
    trap2 = build_region(cfg["regions"]["trap"], CYLINDER_2D)
    freqs = tuple(float(w) for w in cfg["drive"]["frequencies"])
    k0 = float(cfg["schedule"]["k_values"][0])

    # reduction case: zero modulation amplitudes reproduce the undriven
    # cylinder run bit for bit under the same seed
    pq = sample_array(EnsembleSpec(source, count, "uniform", subseed(seed, "reduction")))
    flat = occupancy_decay_points(StandardMapCylinder(k0), pq, trap2, [500, 5000])
    full = np.column_stack([pq, np.zeros((count, len(freqs)))])
    trap_full = Box(tuple(trap2.intervals) + ((0.0, 1.0),) * len(freqs),
                    CYLINDER_2D + (PERIODIC,) * len(freqs))
    driven = occupancy_decay_points(
        SkewProduct(StandardMapCylinder(k0), freqs, (0.0,) * len(freqs)),
        full, trap_full, [500, 5000])
    report.verdicts.append(Verdict(
        "zero_amplitude_reduces_to_undriven",
        flat.values() == driven.values(),
        f"undriven {flat.values()} vs zero-amplitude driven {driven.values()}"))

    # invariant product measure: one-step pushforward keeps coarse cell
    # occupancy on the enlarged space within Monte Carlo counting error
    mc = cfg["measure_check"]
    n_pts = int(mc["points"])
    cells = tuple(int(c) for c in mc["cells"])
    topo = CYLINDER_2D + (PERIODIC,) * len(freqs)
    lo, hi = -8.0 * math.pi, 8.0 * math.pi
    part = GridPartition(cells, topo, ((lo, hi),) + (None,) * (len(topo) - 1))
    rng = np.random.default_rng(subseed(seed, "measure-check"))
    pts = rng.random((n_pts, len(topo)))
    pts[:, 0] = lo - 2.0 + pts[:, 0] * (hi - lo + 4.0)  # pad so window flux balances
    amps = tuple(float(a) for a in cfg["drive"]["amplitudes"])
    skew = SkewProduct(StandardMapCylinder(k0), freqs, amps)
    before = np.bincount(part.cell_index_array(pts), minlength=part.cell_count + 1)
    after = np.bincount(part.cell_index_array(skew.step_array(pts)),
                        minlength=part.cell_count + 1)
    per_cell = n_pts / part.cell_count * ((hi - lo) / (hi - lo + 4.0))
    noise = math.sqrt(2.0 * per_cell)
    worst = int(np.max(np.abs(after[:-1] - before[:-1])))
    report.verdicts.append(Verdict(
        "pushforward_preserves_cell_occupancy",
        worst <= 5.0 * noise,
        f"max cell count change = {worst} (5 sigma = {5 * noise:.1f})"))
    return report


_RUNNERS = {
    "rotation_approximants": run_rotation_approximants,
    "source_detector": run_source_detector,
    "standard_map_counterexample": run_standard_map_counterexample,
    "dissipative_transition": run_dissipative_transition,
    "skew_quasiperiodic": run_skew_quasiperiodic,
}

SCENARIOS = tuple(_RUNNERS)


def _new_report(cfg: dict) -> Report:
    return Report(
        scenario=cfg["scenario"],
        config=cfg,
        config_hash=config_hash(cfg),
        seed=int(cfg["seed"]),
    )


def resolve_config(scenario: str, overrides: dict | None = None,
                   seed: int | None = None) -> dict:
    cfg = default_config(scenario)
    if overrides:
        cfg = merge_config(cfg, overrides)
    if cfg.get("scenario") != scenario:
        raise ConfigError(
            f"config is for scenario {cfg.get('scenario')!r}, not {scenario!r}")
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


def run_scenario(scenario: str, overrides: dict | None = None,
                 seed: int | None = None) -> Report:
    """Resolve the config and execute one named scenario."""
    if scenario not in _RUNNERS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    cfg = resolve_config(scenario, overrides, seed)
    t0 = time.perf_counter()
    report = _RUNNERS[scenario](cfg)
    report.timings["total"] = time.perf_counter() - t0
    return report

"""Trajectory estimators: Birkhoff means, double averages, coverage, decay.

All estimators share one block engine: the ensemble state advances through
the map's canonical vectorized step, states are buffered in fixed-size
blocks (time-major), and each consumer reduces a block with
``np.add.reduce`` (a fixed-shape pairwise tree) before the block sums are
combined across blocks with Kahan compensation per trajectory.  The
reduction shape is fixed by ``BLOCK_STEPS``, so results are bit-identical
for equal inputs regardless of how calling code schedules the work.

A horizon-N estimate always averages the states at times 0..N-1 (the
initial condition is included).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Box,
    EnsembleSpec,
    GeometryError,
    GridPartition,
    PERIODIC,
    PhasePoint,
    Region,
    sample_array,
)
from .maps import MapDef, MapError
from .observables import IndicatorObservable, Observable
from .results import AverageResult, ContinuityCurve, CurveRow

#: Fixed block length of the deterministic reduction tree.  Changing it
#: changes floating-point rounding; it is a constant, not a tuning knob.
BLOCK_STEPS = 1024


class TrajectoryNumericsError(ArithmeticError):
    """An observable produced a non-finite value along a trajectory."""

    def __init__(self, step: int):
        super().__init__(f"non-finite observable value near step {step}")
        self.step = step


def _check_phase_space(mapdef: MapDef, topology) -> None:
    if tuple(topology) != tuple(mapdef.topology):
        raise MapError("initial conditions and map live on different phase spaces")


class _BirkhoffAccumulator:
    """Per-trajectory compensated Cesaro sums of one observable."""

    def __init__(self, obs: Observable, npts: int):
        self.obs = obs
        dtype = complex if obs.is_complex else float
        self.total = np.zeros(npts, dtype=dtype)
        self._comp = np.zeros(npts, dtype=dtype)
        self.count = 0

    def consume(self, t0: int, block: np.ndarray) -> None:
        b, npts, d = block.shape
        vals = self.obs.evaluate(block.reshape(b * npts, d)).reshape(b, npts)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals).all(axis=1)))
            raise TrajectoryNumericsError(t0 + bad)
        term = np.add.reduce(vals, axis=0)
        y = term - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t
        self.count += b

    def averages(self) -> np.ndarray:
        return self.total / self.count


class _CoverageAccumulator:
    """Union of grid cells visited by any trajectory (overflow kept apart)."""

    def __init__(self, partition: GridPartition):
        self.partition = partition
        self.visited = np.zeros(partition.cell_count + 1, dtype=bool)

    def consume(self, t0: int, block: np.ndarray) -> None:
        b, npts, d = block.shape
        idx = self.partition.cell_index_array(block.reshape(b * npts, d))
        self.visited[idx] = True

    @property
    def cells_visited(self) -> int:
        return int(np.count_nonzero(self.visited[: self.partition.cell_count]))

    @property
    def overflow_visited(self) -> bool:
        return bool(self.visited[self.partition.cell_count])


class _OccupancyAccumulator:
    """Running Cesaro means of a region indicator, snapshotted at horizons."""

    def __init__(self, region: Region, npts: int, horizons):
        self.obs = IndicatorObservable(region)
        self.total = np.zeros(npts)
        self._comp = np.zeros(npts)
        self.count = 0
        self.horizons = sorted(set(int(h) for h in horizons))
        self.snapshots: dict[int, np.ndarray] = {}

    def consume(self, t0: int, block: np.ndarray) -> None:
        b, npts, d = block.shape
        vals = self.obs.evaluate(block.reshape(b * npts, d)).reshape(b, npts)
        term = np.add.reduce(vals, axis=0)
        y = term - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t
        self.count += b
        if self.count in self.horizons:
            self.snapshots[self.count] = self.total / self.count


def _run_blocks(mapdef: MapDef, x0: np.ndarray, n_steps: int, consumers, cuts=()):
    """Advance the ensemble n_steps times, feeding state blocks to consumers.

    Block boundaries are forced at the sorted cut times so running means
    can be snapshotted exactly there.
    """
    if n_steps < 1:
        raise ValueError("need at least one step")
    state = np.array(x0, dtype=float)
    npts, d = state.shape
    buf = np.empty((min(BLOCK_STEPS, n_steps), npts, d))
    stops = sorted(c for c in set(cuts) if 0 < c < n_steps)
    t = 0
    while t < n_steps:
        end = t + min(BLOCK_STEPS, n_steps - t)
        while stops and stops[0] <= t:
            stops.pop(0)
        if stops and stops[0] < end:
            end = stops.pop(0)
        b = end - t
        for i in range(b):
            buf[i] = state
            state = mapdef.step_array(state)
        for c in consumers:
            c.consume(t, buf[:b])
        t = end
    return state


def _mean_and_stderr(vals: np.ndarray) -> tuple[complex | float, float]:
    n = vals.shape[0]
    mean = vals.mean()
    if n < 2:
        return (complex(mean) if np.iscomplexobj(vals) else float(mean)), 0.0
    if np.iscomplexobj(vals):
        var = vals.real.var(ddof=1) + vals.imag.var(ddof=1)
        return complex(mean), math.sqrt(var / n)
    return float(mean), float(vals.std(ddof=1) / math.sqrt(n))


# ---------------------------------------------------------------------------
# Public estimators


def birkhoff_average(mapdef: MapDef, psi: Observable, x0: PhasePoint, n_steps: int):
    """(1/N) sum_{n=0}^{N-1} psi(T^n x0), compensated summation throughout."""
    _check_phase_space(mapdef, x0.topology)
    acc = _BirkhoffAccumulator(psi, 1)
    _run_blocks(mapdef, x0.as_array()[None, :], n_steps, [acc])
    v = acc.averages()[0]
    return complex(v) if psi.is_complex else float(v)


def birkhoff_averages_array(mapdef: MapDef, psi: Observable, x0: np.ndarray, n_steps: int):
    """Per-trajectory Birkhoff means for an (n, d) block of start points."""
    acc = _BirkhoffAccumulator(psi, x0.shape[0])
    _run_blocks(mapdef, x0, n_steps, [acc])
    return acc.averages()


def itea(mapdef: MapDef, source: EnsembleSpec, psi: Observable, n_steps: int) -> AverageResult:
    """Infinite-time double average estimate: ensemble mean of Birkhoff means.

    Start points are drawn uniformly from the source region, realizing the
    normalized density 1_S / mu(S); the standard error reflects
    trajectory-to-trajectory dispersion only (a diagnostic, not a strict
    confidence interval).
    """
    _check_phase_space(mapdef, source.region.topology)
    x0 = sample_array(source)
    vals = birkhoff_averages_array(mapdef, psi, x0, n_steps)
    value, stderr = _mean_and_stderr(vals)
    return AverageResult(
        value=value,
        horizon=n_steps,
        ensemble=source.count,
        stderr=stderr,
        metadata={"map": repr(mapdef), "observable": type(psi).__name__,
                  "seed": source.seed, "sampler": source.sampler},
    )


def visit_fraction(mapdef: MapDef, source: EnsembleSpec, detector: Region,
                   n_steps: int) -> AverageResult:
    """Mean fraction of time spent in the detector region."""
    return itea(mapdef, source, IndicatorObservable(detector), n_steps)


@dataclass
class CoverageResult:
    fraction: float
    cells_visited: int
    cell_count: int
    overflow_visited: bool


def coverage_detail(mapdef: MapDef, source: EnsembleSpec, partition: GridPartition,
                    n_steps: int) -> CoverageResult:
    """Visited-cell fraction of the window, overflow visits reported apart."""
    _check_phase_space(mapdef, source.region.topology)
    if tuple(partition.topology) != tuple(mapdef.topology):
        raise GeometryError("partition and map live on different phase spaces")
    x0 = sample_array(source)
    acc = _CoverageAccumulator(partition)
    _run_blocks(mapdef, x0, n_steps, [acc])
    return CoverageResult(
        fraction=acc.cells_visited / partition.cell_count,
        cells_visited=acc.cells_visited,
        cell_count=partition.cell_count,
        overflow_visited=acc.overflow_visited,
    )


def coverage(mapdef: MapDef, source: EnsembleSpec, partition: GridPartition,
             n_steps: int) -> float:
    """Estimated measure of the set visited from the source region."""
    return coverage_detail(mapdef, source, partition, n_steps).fraction


def occupancy_decay_points(mapdef: MapDef, x0: np.ndarray, trap: Region,
                           horizons) -> ContinuityCurve:
    """occupancy_decay for an explicit (n, d) block of start points."""
    if all(t == PERIODIC for t in mapdef.topology):
        raise MapError("occupancy decay needs a map with an unbounded axis")
    horizons = sorted(set(int(h) for h in horizons))
    if horizons[0] < 1:
        raise ValueError("horizons must be >= 1")
    acc = _OccupancyAccumulator(trap, x0.shape[0], horizons)
    _run_blocks(mapdef, x0, horizons[-1], [acc], cuts=horizons)
    curve = ContinuityCurve("occupancy_decay", "occupancy")
    for i, h in enumerate(horizons):
        vals = acc.snapshots[h]
        value, stderr = _mean_and_stderr(vals)
        curve.append(CurveRow(i, f"N={h}", h, float(value), stderr))
    return curve


def occupancy_decay(mapdef: MapDef, source: EnsembleSpec, trap: Region,
                    horizons) -> ContinuityCurve:
    """Running Cesaro occupancy of a trap region at a schedule of horizons.

    For maps with an unbounded momentum axis, escape to infinity shows up
    as the occupancy decaying toward zero with the horizon.
    """
    _check_phase_space(mapdef, source.region.topology)
    return occupancy_decay_points(mapdef, sample_array(source), trap, horizons)


def pairing_samples(mapdef: MapDef, phi: Observable, psi: Observable,
                    n_steps: int, x0: np.ndarray) -> np.ndarray:
    """Per-start-point samples conj(phi(x0)) * birkhoff(psi) for a fixed x0 set.

    Averaging these samples over x0 drawn uniformly on a probability phase
    space estimates the projected pairing <phi | P psi>.
    """
    w = np.conj(phi.evaluate(x0))
    b = birkhoff_averages_array(mapdef, psi, x0, n_steps)
    return w * b


def uniform_start_points(mapdef: MapDef, count: int, seed: int,
                         sampler: str = "uniform") -> np.ndarray:
    """count points uniform on the full torus of a finite-measure map."""
    topo = tuple(mapdef.topology)
    if any(t != PERIODIC for t in topo):
        raise MapError("uniform sampling needs a finite (all-periodic) phase space")
    box = Box(tuple((0.0, 1.0) for _ in topo), topo)
    return sample_array(EnsembleSpec(box, count, sampler, seed))


def pairing_estimate(mapdef: MapDef, phi: Observable, psi: Observable,
                     n_steps: int, count: int, seed: int,
                     sampler: str = "uniform") -> AverageResult:
    """Monte Carlo estimate of <phi | P psi> on a probability phase space."""
    x0 = uniform_start_points(mapdef, count, seed, sampler)
    vals = pairing_samples(mapdef, phi, psi, n_steps, x0)
    value, stderr = _mean_and_stderr(vals)
    return AverageResult(value=value, horizon=n_steps, ensemble=count, stderr=stderr,
                         metadata={"map": repr(mapdef), "seed": seed})


def eta_trajectory(base: MapDef, pert: MapDef, phi: Observable, psi: Observable,
                   n_steps: int, count: int, seed: int) -> AverageResult:
    """Trajectory estimate of |<phi | (P_pert - P_base) psi>|.

    The same start points feed both maps, so the ensemble dispersion of the
    per-point differences gives the quoted standard error.
    """
    x0 = uniform_start_points(base, count, seed)
    diff = (pairing_samples(pert, phi, psi, n_steps, x0)
            - pairing_samples(base, phi, psi, n_steps, x0))
    mean, stderr = _mean_and_stderr(diff)
    return AverageResult(value=abs(mean), horizon=n_steps, ensemble=count,
                         stderr=stderr, metadata={"base": repr(base), "pert": repr(pert)})


def fit_power_law(horizons, values) -> float:
    """Least-squares slope of log(value) against log(horizon)."""
    h = np.log(np.asarray(horizons, dtype=float))
    v = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(h, v, 1)[0])

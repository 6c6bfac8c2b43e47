"""Phase-space geometry for measure-preserving map experiments.

Points live on products of unit circles (periodic axes, coordinates in
[0, 1)) and unbounded real lines (cylinder momenta).  Regions are the
measurable sets used as sources, detectors and traps; grid partitions
carry the Lebesgue reference measure and back the Ulam discretization.

Conventions, fixed once so that every CSV produced downstream is portable:

* all intervals are half-open [lo, hi);
* periodic wrapping is ``c - floor(c)`` (never fmod), so negative inputs
  land in [0, 1);
* grid cells are indexed row-major with axis 0 fastest, i.e.
  ``id = i0 + n0*i1 + n0*n1*i2 + ...``;
* every unbounded axis gets a finite window; points outside any window
  share the single overflow cell with index ``C`` (the regular cell count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PERIODIC = "periodic"
REAL = "real"

TORUS_2D = (PERIODIC, PERIODIC)
#: (p, q) with unbounded momentum p on axis 0 and periodic angle q on axis 1.
CYLINDER_2D = (REAL, PERIODIC)

#: Default momentum window for cylinder-map grids.
DEFAULT_CYLINDER_WINDOW = (-8.0 * math.pi, 8.0 * math.pi)


class GeometryError(ValueError):
    """Invalid point/region/partition construction or mismatched spaces."""


def _check_topology(topology: Sequence[str]) -> tuple[str, ...]:
    topo = tuple(topology)
    if not topo:
        raise GeometryError("phase space needs at least one axis")
    for t in topo:
        if t not in (PERIODIC, REAL):
            raise GeometryError(f"unknown axis topology {t!r}")
    return topo


def wrap_array(x: np.ndarray, topology: Sequence[str]) -> np.ndarray:
    """Wrap periodic coordinates of an (n, d) coordinate block into [0, 1).

    Uses ``c - floor(c)``; a value like frac(-1e-18) rounds up to 1.0 in
    float arithmetic, which is snapped to 0.0 (the same torus point, one
    ulp away).
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise GeometryError("non-finite coordinate")
    out = x.copy()
    for j, t in enumerate(topology):
        if t == PERIODIC:
            c = out[..., j]
            c -= np.floor(c)
            c[c >= 1.0] = 0.0
    return out


@dataclass(frozen=True)
class PhasePoint:
    """A single phase-space point: coordinates plus per-axis topology.

    Construction keeps coordinates as given (so unwrapped inputs can be
    normalized explicitly); the factory methods and every map step return
    wrapped points.
    """

    coords: tuple[float, ...]
    topology: tuple[str, ...]

    def __post_init__(self):
        topo = _check_topology(self.topology)
        coords = tuple(float(c) for c in self.coords)
        if len(coords) != len(topo):
            raise GeometryError(
                f"dimension mismatch: {len(coords)} coords, {len(topo)} axes"
            )
        if not all(math.isfinite(c) for c in coords):
            raise GeometryError("non-finite coordinate")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "topology", topo)

    @classmethod
    def on_torus(cls, p: float, q: float) -> "PhasePoint":
        return wrap(cls((p, q), TORUS_2D))

    @classmethod
    def on_cylinder(cls, p: float, q: float) -> "PhasePoint":
        return wrap(cls((p, q), CYLINDER_2D))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def wrap(point: PhasePoint) -> PhasePoint:
    """Normalize every periodic coordinate into [0, 1); real axes untouched."""
    row = wrap_array(point.as_array()[None, :], point.topology)[0]
    return PhasePoint(tuple(row), point.topology)


# ---------------------------------------------------------------------------
# Regions


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with half-open intervals, wrap-aware on periodic axes.

    On a periodic axis an interval with lo > hi wraps through 0/1, e.g.
    (0.9, 0.1) covers [0.9, 1) and [0, 0.1).  lo == hi is the empty
    interval; use (0.0, 1.0) for a full circle.
    """

    intervals: tuple[tuple[float, float], ...]
    topology: tuple[str, ...]
    label: str = ""

    def __post_init__(self):
        topo = _check_topology(self.topology)
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if len(ivs) != len(topo):
            raise GeometryError("box dimension != topology dimension")
        for (lo, hi), t in zip(ivs, topo):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise GeometryError("non-finite box bound")
            if t == REAL and lo >= hi:
                raise GeometryError("real-axis interval needs lo < hi")
            if t == PERIODIC and not (0.0 <= lo < 1.0 and 0.0 <= hi <= 1.0):
                raise GeometryError("periodic interval bounds must lie in [0, 1]")
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "topology", topo)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def contains_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.ones(x.shape[0], dtype=bool)
        for j, ((lo, hi), t) in enumerate(zip(self.intervals, self.topology)):
            c = x[:, j]
            if t == PERIODIC and lo > hi:  # wrapped through 0/1
                inside &= (c >= lo) | (c < hi)
            else:
                inside &= (c >= lo) & (c < hi)
        return inside

    def volume(self) -> float:
        v = 1.0
        for (lo, hi), t in zip(self.intervals, self.topology):
            w = (hi - lo) if hi >= lo else (1.0 - lo + hi)
            if t == PERIODIC:
                w = min(w, 1.0)
            v *= w
        return v


@dataclass(frozen=True)
class Disk:
    """Open disk of given diameter on the 2-torus (geodesic metric)."""

    center: tuple[float, float]
    diameter: float
    label: str = ""

    def __post_init__(self):
        c = (float(self.center[0]), float(self.center[1]))
        if not all(math.isfinite(v) for v in c):
            raise GeometryError("non-finite disk center")
        if not (0.0 < self.diameter <= 1.0):
            raise GeometryError("disk diameter must lie in (0, 1]")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "diameter", float(self.diameter))

    topology = TORUS_2D

    @property
    def dim(self) -> int:
        return 2

    def contains_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = 0.5 * self.diameter
        d2 = np.zeros(x.shape[0])
        for j in range(2):
            diff = np.abs(x[:, j] - self.center[j])
            diff = np.minimum(diff, 1.0 - diff)
            d2 += diff * diff
        return d2 < r * r

    def volume(self) -> float:
        return math.pi * (0.5 * self.diameter) ** 2


@dataclass(frozen=True)
class CellSet:
    """Union of grid cells of a partition, identified by cell ids."""

    partition: "GridPartition"
    ids: frozenset[int]
    label: str = ""

    def __post_init__(self):
        ids = frozenset(int(i) for i in self.ids)
        for i in ids:
            if not 0 <= i < self.partition.cell_count:
                raise GeometryError(f"cell id {i} outside partition (overflow excluded)")
        object.__setattr__(self, "ids", ids)

    @property
    def topology(self) -> tuple[str, ...]:
        return self.partition.topology

    @property
    def dim(self) -> int:
        return self.partition.dim

    def contains_array(self, x: np.ndarray) -> np.ndarray:
        idx = self.partition.cell_index_array(x)
        return np.isin(idx, np.fromiter(self.ids, dtype=np.int64))

    def volume(self) -> float:
        return len(self.ids) * self.partition.cell_volume


Region = Box | Disk | CellSet


def indicator(region, point: PhasePoint) -> int:
    """Characteristic function of a region: 1 iff the point lies inside."""
    if region.dim != point.dim or tuple(region.topology) != point.topology:
        raise GeometryError("region and point live on different phase spaces")
    return int(region.contains_array(point.as_array()[None, :])[0])


# ---------------------------------------------------------------------------
# Grid partitions


@dataclass(frozen=True)
class GridPartition:
    """Regular grid over the phase space, one finite window per real axis.

    Periodic axes always span [0, 1).  The windows tuple has one entry per
    axis: None on periodic axes, (lo, hi) on real axes.  All points falling
    outside any window share the single overflow cell, whose index equals
    ``cell_count``.
    """

    cells_per_axis: tuple[int, ...]
    topology: tuple[str, ...]
    windows: tuple[tuple[float, float] | None, ...] = ()

    def __post_init__(self):
        topo = _check_topology(self.topology)
        cells = tuple(int(n) for n in self.cells_per_axis)
        if len(cells) != len(topo):
            raise GeometryError("cells_per_axis dimension != topology dimension")
        if any(n < 1 for n in cells):
            raise GeometryError("cells per axis must be positive")
        wins = self.windows if self.windows else (None,) * len(topo)
        wins = tuple(None if w is None else (float(w[0]), float(w[1])) for w in wins)
        if len(wins) != len(topo):
            raise GeometryError("windows dimension != topology dimension")
        fixed = []
        for w, t in zip(wins, topo):
            if t == PERIODIC:
                if w is not None and w != (0.0, 1.0):
                    raise GeometryError("periodic axes always span [0, 1)")
                fixed.append(None)
            else:
                if w is None:
                    w = DEFAULT_CYLINDER_WINDOW
                if not (math.isfinite(w[0]) and math.isfinite(w[1]) and w[0] < w[1]):
                    raise GeometryError("real-axis window needs finite lo < hi")
                fixed.append(w)
        object.__setattr__(self, "cells_per_axis", cells)
        object.__setattr__(self, "topology", topo)
        object.__setattr__(self, "windows", tuple(fixed))

    @property
    def dim(self) -> int:
        return len(self.cells_per_axis)

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.cells_per_axis))

    @property
    def has_overflow(self) -> bool:
        return any(t == REAL for t in self.topology)

    @property
    def overflow_index(self) -> int:
        return self.cell_count

    def axis_bounds(self, j: int) -> tuple[float, float]:
        w = self.windows[j]
        return (0.0, 1.0) if w is None else w

    @property
    def cell_volume(self) -> float:
        v = 1.0
        for j, n in enumerate(self.cells_per_axis):
            lo, hi = self.axis_bounds(j)
            v *= (hi - lo) / n
        return v

    def window_volume(self) -> float:
        return self.cell_volume * self.cell_count

    @property
    def strides(self) -> tuple[int, ...]:
        s, out = 1, []
        for n in self.cells_per_axis:
            out.append(s)
            s *= n
        return tuple(out)

    def cell_index_array(self, x: np.ndarray) -> np.ndarray:
        """Cell id per row of x; overflow id for rows outside any window."""
        x = np.asarray(x, dtype=float)
        if x.shape[1] != self.dim:
            raise GeometryError("point dimension != partition dimension")
        idx = np.zeros(x.shape[0], dtype=np.int64)
        overflow = np.zeros(x.shape[0], dtype=bool)
        for j, (n, stride) in enumerate(zip(self.cells_per_axis, self.strides)):
            lo, hi = self.axis_bounds(j)
            c = x[:, j]
            if self.topology[j] == REAL:
                overflow |= (c < lo) | (c >= hi)
            i = np.floor((c - lo) * (n / (hi - lo))).astype(np.int64)
            np.clip(i, 0, n - 1, out=i)
            idx += stride * i
        idx[overflow] = self.overflow_index
        return idx

    def cell_index(self, point: PhasePoint) -> int:
        if tuple(point.topology) != self.topology:
            raise GeometryError("point and partition live on different phase spaces")
        return int(self.cell_index_array(point.as_array()[None, :])[0])

    def cell_lows(self) -> np.ndarray:
        """(cell_count, dim) array of lower corners, in cell-id order."""
        axes = []
        for j, n in enumerate(self.cells_per_axis):
            lo, hi = self.axis_bounds(j)
            axes.append(lo + (hi - lo) * np.arange(n) / n)
        grids = np.meshgrid(*axes, indexing="ij")
        # meshgrid 'ij' varies axis 0 slowest; transpose to axis-0-fastest order
        cols = [g.transpose().reshape(-1) for g in grids]
        return np.column_stack(cols)

    def cell_widths(self) -> np.ndarray:
        return np.array(
            [(self.axis_bounds(j)[1] - self.axis_bounds(j)[0]) / n
             for j, n in enumerate(self.cells_per_axis)]
        )


def cell_index(partition: GridPartition, point: PhasePoint) -> int:
    return partition.cell_index(point)


# ---------------------------------------------------------------------------
# Ensemble sampling

#: Draw size used by rejection sampling.  Fixed so that the accepted points
#: for (region, seed) form a prefix-stable stream: asking for more points
#: never changes the ones already produced.
_REJECTION_BATCH = 4096

#: Retry budget: rejection sampling aborts after this many candidate draws
#: per requested point.
MAX_REJECTION_FACTOR = 1000


@dataclass(frozen=True)
class EnsembleSpec:
    """How to draw initial conditions: region, count, sampler kind, seed.

    sampler is "uniform" (pseudo-random, PCG64) or "lattice" (rank-1
    Kronecker lattice with the plastic-constant generating vector
    g_j = frac(phi_d**-(j+1)), phi_d the root of x**(d+1) = x + 1, plus a
    seeded random shift).  Equal (spec, seed) always yields the identical
    point array.
    """

    region: Region
    count: int
    sampler: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise GeometryError("ensemble count must be positive")
        if self.sampler not in ("uniform", "lattice"):
            raise GeometryError(f"unknown sampler {self.sampler!r}")


def _lattice_vector(dim: int) -> np.ndarray:
    phi = 2.0
    for _ in range(64):
        phi = (1.0 + phi) ** (1.0 / (dim + 1))
    return np.array([(1.0 / phi) ** (j + 1) % 1.0 for j in range(dim)])


class _UnitStream:
    """Stream of points in [0,1)^d: seeded PCG64 or shifted Kronecker lattice."""

    def __init__(self, dim: int, sampler: str, seed: int):
        self.dim = dim
        self.sampler = sampler
        if sampler == "lattice":
            shift_rng = np.random.default_rng(seed)
            self.shift = shift_rng.random(dim)
            self.g = _lattice_vector(dim)
            self.i = 0
        else:
            self.rng = np.random.default_rng(seed)

    def take(self, n: int) -> np.ndarray:
        if self.sampler == "lattice":
            k = np.arange(self.i + 1, self.i + n + 1)[:, None]
            self.i += n
            return (self.shift + k * self.g) % 1.0
        return self.rng.random((n, self.dim))


def _box_transform(box: Box, u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    for j, ((lo, hi), t) in enumerate(zip(box.intervals, box.topology)):
        w = (hi - lo) if hi >= lo else (1.0 - lo + hi)
        c = lo + u[:, j] * w
        if t == PERIODIC:
            c -= np.floor(c)
            c[c >= 1.0] = 0.0
        out[:, j] = c
    return out


def _bounding_box(region: Region) -> Box:
    if isinstance(region, Disk):
        r = 0.5 * region.diameter
        if 2.0 * r >= 1.0:
            return Box(((0.0, 1.0), (0.0, 1.0)), TORUS_2D)
        iv = tuple(((c - r) % 1.0, (c + r) % 1.0) for c in region.center)
        return Box(iv, TORUS_2D)
    if isinstance(region, CellSet):
        part = region.partition
        iv = tuple((part.axis_bounds(j)) if part.topology[j] == REAL else (0.0, 1.0)
                   for j in range(part.dim))
        return Box(iv, part.topology)
    raise GeometryError(f"no bounding box for {type(region).__name__}")


def sample_array(spec: EnsembleSpec) -> np.ndarray:
    """Draw spec.count points inside spec.region as an (n, d) float array.

    Boxes are sampled directly; disks and cell sets by rejection from their
    bounding box in fixed-size batches (prefix-stable in count).  Raises
    after MAX_REJECTION_FACTOR candidate draws per accepted point.
    """
    region = spec.region
    if region.volume() <= 0.0:
        raise GeometryError("cannot sample a zero-volume region")
    stream = _UnitStream(region.dim, spec.sampler, spec.seed)
    if isinstance(region, Box):
        return _box_transform(region, stream.take(spec.count))
    bbox = _bounding_box(region)
    out = np.empty((spec.count, region.dim))
    got, drawn = 0, 0
    budget = MAX_REJECTION_FACTOR * spec.count
    while got < spec.count:
        if drawn >= budget:
            raise GeometryError("rejection sampling retry budget exceeded")
        cand = _box_transform(bbox, stream.take(_REJECTION_BATCH))
        drawn += _REJECTION_BATCH
        acc = cand[region.contains_array(cand)]
        k = min(len(acc), spec.count - got)
        out[got:got + k] = acc[:k]
        got += k
    return out


def sample_ensemble(spec: EnsembleSpec) -> list[PhasePoint]:
    """sample_array wrapped into PhasePoint objects (row order preserved)."""
    topo = tuple(spec.region.topology)
    return [PhasePoint(tuple(row), topo) for row in sample_array(spec)]

"""Measure-preserving map families on the torus and the cylinder.

Every map exposes a single canonical vectorized update ``step_array`` on
(n, d) coordinate blocks; the scalar ``step``/``iterate`` and all
trajectory estimators go through it, so composing iterates is exactly
reproducible in floating point.

Kinds:

* ``TorusRotation(alpha, beta)``    (p, q) -> (p+alpha, q+beta) mod 1
* ``StandardMapTorus(K)``           p' = p + (K/2pi) sin(2pi q) mod 1,
                                    q' = q + p' mod 1  (Chirikov K)
* ``StandardMapCylinder(K)``        same kick, momentum p unwrapped
* ``SinusoidalKick(amplitude)``     p' = p + (A/2pi) sin(2pi q), q' = q
* ``SkewProduct(base, freqs, amps)`` quasiperiodically driven base: the
  kick amplitude is scaled by 1 + sum_i a_i cos(2pi phi_i) and the drive
  angles advance rigidly, phi_i' = phi_i + omega_i mod 1.  Lebesgue
  measure dp dq dphi is invariant.
* ``Composite(maps)``               sequential application.

All kinds preserve Lebesgue measure on their phase space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    CYLINDER_2D,
    PERIODIC,
    TORUS_2D,
    GeometryError,
    PhasePoint,
    wrap_array,
)

_TWO_PI = 2.0 * math.pi


class MapError(ValueError):
    """Invalid map construction or phase-space mismatch."""


def _wrap_inplace(c: np.ndarray) -> np.ndarray:
    c -= np.floor(c)
    c[c >= 1.0] = 0.0
    return c


@dataclass(frozen=True)
class TorusRotation:
    """Rigid translation of the 2-torus."""

    alpha: float
    beta: float

    topology = TORUS_2D

    def step_array(self, s: np.ndarray, kick_scale=None) -> np.ndarray:
        out = np.empty_like(s)
        out[:, 0] = _wrap_inplace(s[:, 0] + self.alpha)
        out[:, 1] = _wrap_inplace(s[:, 1] + self.beta)
        return out

    def back_step_array(self, s: np.ndarray) -> np.ndarray:
        out = np.empty_like(s)
        out[:, 0] = _wrap_inplace(s[:, 0] - self.alpha)
        out[:, 1] = _wrap_inplace(s[:, 1] - self.beta)
        return out


@dataclass(frozen=True)
class StandardMapTorus:
    """Chirikov standard map on the unit 2-torus."""

    K: float

    topology = TORUS_2D

    def step_array(self, s: np.ndarray, kick_scale=None) -> np.ndarray:
        amp = self.K / _TWO_PI if kick_scale is None else (self.K / _TWO_PI) * kick_scale
        out = np.empty_like(s)
        p1 = s[:, 0] + amp * np.sin(_TWO_PI * s[:, 1])
        out[:, 0] = _wrap_inplace(p1)
        out[:, 1] = _wrap_inplace(s[:, 1] + out[:, 0])
        return out

    def back_step_array(self, s: np.ndarray) -> np.ndarray:
        out = np.empty_like(s)
        out[:, 1] = _wrap_inplace(s[:, 1] - s[:, 0])
        out[:, 0] = _wrap_inplace(s[:, 0] - (self.K / _TWO_PI) * np.sin(_TWO_PI * out[:, 1]))
        return out


@dataclass(frozen=True)
class StandardMapCylinder:
    """Standard map lifted to the cylinder: unbounded momentum on axis 0."""

    K: float

    topology = CYLINDER_2D

    def step_array(self, s: np.ndarray, kick_scale=None) -> np.ndarray:
        amp = self.K / _TWO_PI if kick_scale is None else (self.K / _TWO_PI) * kick_scale
        out = np.empty_like(s)
        out[:, 0] = s[:, 0] + amp * np.sin(_TWO_PI * s[:, 1])
        out[:, 1] = _wrap_inplace(s[:, 1] + out[:, 0])
        return out

    def back_step_array(self, s: np.ndarray) -> np.ndarray:
        out = np.empty_like(s)
        out[:, 1] = _wrap_inplace(s[:, 1] - s[:, 0])
        out[:, 0] = s[:, 0] - (self.K / _TWO_PI) * np.sin(_TWO_PI * out[:, 1])
        return out


@dataclass(frozen=True)
class SinusoidalKick:
    """Pure momentum kick, identity at amplitude 0 (a shear in p)."""

    amplitude: float
    on_cylinder: bool = False

    @property
    def topology(self):
        return CYLINDER_2D if self.on_cylinder else TORUS_2D

    def step_array(self, s: np.ndarray, kick_scale=None) -> np.ndarray:
        amp = self.amplitude / _TWO_PI
        if kick_scale is not None:
            amp = amp * kick_scale
        out = np.empty_like(s)
        p1 = s[:, 0] + amp * np.sin(_TWO_PI * s[:, 1])
        out[:, 0] = p1 if self.on_cylinder else _wrap_inplace(p1)
        out[:, 1] = s[:, 1]
        return out


@dataclass(frozen=True)
class SkewProduct:
    """Autonomous extension of a quasiperiodically driven base map.

    State is (base coords..., phi_1..phi_N).  Initial drive phases are part
    of the state; the reduction amplitudes == 0 recovers the base dynamics
    on the first two coordinates exactly.
    """

    base: "MapDef"
    frequencies: tuple[float, ...]
    amplitudes: tuple[float, ...] = ()

    def __post_init__(self):
        freqs = tuple(float(w) for w in self.frequencies)
        amps = tuple(float(a) for a in self.amplitudes)
        if not freqs:
            raise MapError("skew product needs at least one drive frequency")
        if not amps:
            amps = (0.0,) * len(freqs)
        if len(amps) != len(freqs):
            raise MapError("one modulation amplitude per frequency")
        if len(self.base.topology) != 2:
            raise MapError("skew product drives a two-dimensional base map")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def topology(self):
        return tuple(self.base.topology) + (PERIODIC,) * len(self.frequencies)

    def step_array(self, s: np.ndarray, kick_scale=None) -> np.ndarray:
        phi = s[:, 2:]
        scale = 1.0 + (np.cos(_TWO_PI * phi) @ np.asarray(self.amplitudes))
        if kick_scale is not None:
            scale = scale * kick_scale
        out = np.empty_like(s)
        out[:, :2] = self.base.step_array(s[:, :2], kick_scale=scale)
        out[:, 2:] = _wrap_inplace(phi + np.asarray(self.frequencies))
        return out


@dataclass(frozen=True)
class Composite:
    """Sequential application of maps sharing one phase space."""

    maps: tuple["MapDef", ...]

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise MapError("empty composite")
        topo = tuple(maps[0].topology)
        for m in maps[1:]:
            if tuple(m.topology) != topo:
                raise MapError("composite members must share a phase space")
        object.__setattr__(self, "maps", maps)

    @property
    def topology(self):
        return tuple(self.maps[0].topology)

    def step_array(self, s: np.ndarray, kick_scale=None) -> np.ndarray:
        for m in self.maps:
            s = m.step_array(s, kick_scale=kick_scale)
        return s


MapDef = (
    TorusRotation
    | StandardMapTorus
    | StandardMapCylinder
    | SinusoidalKick
    | SkewProduct
    | Composite
)


def step(mapdef: MapDef, x: PhasePoint) -> PhasePoint:
    """One application of the map to a single point."""
    if tuple(x.topology) != tuple(mapdef.topology):
        raise MapError("point and map live on different phase spaces")
    row = wrap_array(x.as_array()[None, :], x.topology)
    row = mapdef.step_array(row)
    return PhasePoint(tuple(row[0]), x.topology)


def iterate(mapdef: MapDef, x: PhasePoint, k: int) -> PhasePoint:
    """k-fold composition through the canonical step routine; k=0 is x."""
    if k < 0:
        raise MapError("iterate needs k >= 0")
    if k == 0:
        return x
    if tuple(x.topology) != tuple(mapdef.topology):
        raise MapError("point and map live on different phase spaces")
    row = wrap_array(x.as_array()[None, :], x.topology)
    for _ in range(k):
        row = mapdef.step_array(row)
    return PhasePoint(tuple(row[0]), x.topology)


# ---------------------------------------------------------------------------
# Rational approximants of rotation numbers


@dataclass(frozen=True)
class RationalApproximant:
    """Irreducible fraction N/D approximating a rotation number."""

    numerator: int
    denominator: int
    target: float

    def __post_init__(self):
        n, d = int(self.numerator), int(self.denominator)
        if d < 1:
            raise MapError("denominator must be positive")
        if math.gcd(n, d) != 1:
            raise MapError(f"{n}/{d} is not in lowest terms")
        object.__setattr__(self, "numerator", n)
        object.__setattr__(self, "denominator", d)

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def convergents(target: float, max_denominator: int) -> list[RationalApproximant]:
    """Continued-fraction convergents of target with denominator <= bound.

    Emitted in increasing denominator order, each in lowest terms and
    satisfying |target - N/D| < 1/D**2.  The degenerate integer
    approximants 0/1 and 1/1 are omitted (target lies strictly inside
    (0, 1)); for an exactly-representable rational the sequence terminates
    at the target itself.
    """
    if not math.isfinite(target):
        raise MapError("target must be finite")
    if not 0.0 < target < 1.0:
        raise MapError("target must lie in (0, 1)")
    if max_denominator < 1:
        raise MapError("max_denominator must be >= 1")
    frac = Fraction(target)  # exact binary value of the float
    num, den = frac.numerator, frac.denominator
    h_prev, h = 1, 0  # h_{-1}, h_0 with a_0 = 0
    k_prev, k = 0, 1
    out: list[RationalApproximant] = []
    a0 = num // den
    num -= a0 * den
    while num:
        a, rem = divmod(den, num)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        den, num = num, rem
        if k > max_denominator:
            break
        if k >= 2:
            out.append(RationalApproximant(h, k, target))
    return out


# ---------------------------------------------------------------------------
# Perturbation families


@dataclass(frozen=True)
class FamilyMember:
    index: int
    description: str
    epsilon: float
    mapdef: MapDef


class MapFamily:
    """Indexed family of weak perturbations of a base map.

    Index 0 is always the unperturbed base; indices 1..n follow the
    schedule.  Iteration yields FamilyMember records.
    """

    def __init__(self, base: MapDef, members: Sequence[FamilyMember]):
        self.base = base
        self.members = list(members)

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> FamilyMember:
        return self.members[i]

    def __iter__(self):
        return iter(self.members)


def rotation_convergent_family(base: TorusRotation, max_denominator: int) -> MapFamily:
    """Replace alpha by its convergents, indexed by convergent order."""
    members = [FamilyMember(0, "base", 0.0, base)]
    for i, r in enumerate(convergents(base.alpha, max_denominator), start=1):
        pert = TorusRotation(r.value, base.beta)
        members.append(FamilyMember(i, f"D={r.denominator}", abs(base.alpha - r.value), pert))
    fam = MapFamily(base, members)
    fam.approximants = convergents(base.alpha, max_denominator)
    return fam


def k_sweep_family(base, k_values: Sequence[float]) -> MapFamily:
    """Absolute-K sweep for the standard-map kinds (torus, cylinder, skew)."""
    def with_k(m, k):
        if isinstance(m, (StandardMapTorus, StandardMapCylinder)):
            return type(m)(K=float(k))
        if isinstance(m, SkewProduct):
            return SkewProduct(with_k(m.base, k), m.frequencies, m.amplitudes)
        raise MapError(f"{type(m).__name__} has no kick parameter K")
    members = [FamilyMember(0, "base", 0.0, base)]
    for i, k in enumerate(k_values, start=1):
        members.append(FamilyMember(i, f"K={k:g}", float(k), with_k(base, k)))
    return MapFamily(base, members)


def amplitude_sweep_family(base: MapDef, amplitudes: Sequence[float]) -> MapFamily:
    """Composite of the base with an extra sinusoidal kick of size epsilon."""
    on_cyl = tuple(base.topology) == CYLINDER_2D
    members = [FamilyMember(0, "base", 0.0, base)]
    for i, eps in enumerate(amplitudes, start=1):
        pert = Composite((base, SinusoidalKick(float(eps), on_cylinder=on_cyl)))
        members.append(FamilyMember(i, f"eps={eps:g}", float(eps), pert))
    return MapFamily(base, members)


_BUILTIN_SCHEDULES = {
    "rotation_convergents": lambda base, arg: rotation_convergent_family(base, int(arg)),
    "k_sweep": lambda base, arg: k_sweep_family(base, arg),
    "amplitude_sweep": lambda base, arg: amplitude_sweep_family(base, arg),
}


def perturbed_family(
    base: MapDef,
    schedule: str | Callable[[float], MapDef],
    epsilons: Sequence[float] | int | None = None,
) -> MapFamily:
    """Build an indexed perturbation family of a base map.

    schedule is a built-in name ("rotation_convergents" with
    epsilons=max_denominator, "k_sweep" / "amplitude_sweep" with an epsilon
    list) or a callable eps -> MapDef.  A callable must reproduce the base
    at eps=0 (checked on probe points) and must not change the phase-space
    dimension.
    """
    if isinstance(schedule, str):
        try:
            builder = _BUILTIN_SCHEDULES[schedule]
        except KeyError:
            raise MapError(f"unknown schedule {schedule!r}") from None
        return builder(base, epsilons)
    if epsilons is None:
        raise MapError("a callable schedule needs an explicit epsilon list")
    zero = schedule(0.0)
    if tuple(zero.topology) != tuple(base.topology):
        raise MapError("schedule changes the phase-space dimension")
    if zero != base:
        probes = np.linspace(0.05, 0.95, 7)[:, None] * np.ones(len(base.topology))
        if not np.allclose(zero.step_array(probes), base.step_array(probes), atol=1e-12):
            raise MapError("schedule(0) does not reproduce the base map")
    members = [FamilyMember(0, "base", 0.0, base)]
    for i, eps in enumerate(epsilons, start=1):
        m = schedule(float(eps))
        if tuple(m.topology) != tuple(base.topology):
            raise MapError("schedule changes the phase-space dimension")
        members.append(FamilyMember(i, f"eps={eps:g}", float(eps), m))
    return MapFamily(base, members)

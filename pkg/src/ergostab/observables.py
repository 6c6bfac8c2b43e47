"""Square-integrable observables evaluated along trajectories.

An observable maps an (n, d) coordinate block to an (n,) value array,
purely and deterministically.  Kinds:

* ``IndicatorObservable``    characteristic function of a region
* ``FourierMode(m, n)``      exp(2pi i (m p + n q)) on the 2-torus
* ``FourierPolynomial``      truncated double Fourier series (dense
                             coefficient grid over |m|, |n| <= cutoff)
* ``GridFunction``           values tabulated per cell of a partition
* ``HamiltonianObservable``  f(H(x)) for a small expression set
* ``ConstantObservable``     a constant (valid on any phase space)
* ``LinearCombination``      a1*psi1 + a2*psi2 + ...

Scalar multiplication and addition build LinearCombination, so linearity
tests can reuse one trajectory for combined and separate averages.
Norms are L2 norms with respect to the invariant (Lebesgue) measure; for
grid functions this is the discrete inner product
sum_c conj(phi_c) psi_c vol_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import GridPartition, Region

_TWO_PI = 2.0 * math.pi


class ObservableError(ValueError):
    pass


class _Base:
    is_complex = False

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(np.asarray(x, dtype=float))

    def norm(self) -> float:
        raise ObservableError(f"{type(self).__name__} has no closed-form norm")

    def normalized(self) -> "Observable":
        n = self.norm()
        if n <= 0.0:
            raise ObservableError("cannot normalize a null observable")
        return LinearCombination(((1.0 / n, self),))

    def __mul__(self, a):
        return LinearCombination(((complex(a) if isinstance(a, complex) else float(a), self),))

    __rmul__ = __mul__

    def __add__(self, other):
        return LinearCombination(((1.0, self), (1.0, other)))

    def __sub__(self, other):
        return LinearCombination(((1.0, self), (-1.0, other)))


@dataclass(frozen=True)
class ConstantObservable(_Base):
    value: float = 1.0

    def evaluate(self, x):
        return np.full(x.shape[0], self.value)


@dataclass(frozen=True)
class IndicatorObservable(_Base):
    """1 inside the region, 0 outside; optionally L2-normalized."""

    region: Region
    normalize: bool = False

    def evaluate(self, x):
        vals = self.region.contains_array(x).astype(float)
        if self.normalize:
            vals /= math.sqrt(self.region.volume())
        return vals

    def norm(self) -> float:
        v = math.sqrt(self.region.volume())
        return 1.0 if self.normalize else v


@dataclass(frozen=True)
class FourierMode(_Base):
    """Single character exp(2pi i (m p + n q)); unit L2 norm."""

    m: int
    n: int

    is_complex = True

    def evaluate(self, x):
        return np.exp(2j * math.pi * (self.m * x[:, 0] + self.n * x[:, 1]))

    def norm(self) -> float:
        return 1.0


def _mode_powers(z: np.ndarray, cutoff: int) -> np.ndarray:
    """(n, 2*cutoff+1) table of z**k for k = -cutoff..cutoff (unit-modulus z)."""
    n = z.shape[0]
    e = np.empty((n, 2 * cutoff + 1), dtype=complex)
    e[:, cutoff] = 1.0
    for k in range(1, cutoff + 1):
        e[:, cutoff + k] = e[:, cutoff + k - 1] * z
    e[:, :cutoff] = np.conj(e[:, cutoff + 1:][:, ::-1])
    return e


class FourierPolynomial(_Base):
    """Truncated double Fourier series with a dense coefficient grid.

    coeffs[m + cutoff, n + cutoff] multiplies exp(2pi i (m p + n q)).
    Evaluation builds the mode powers by repeated multiplication, so a
    block of points costs O(n * cutoff^2) with small constants.
    """

    is_complex = True

    def __init__(self, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1] or coeffs.shape[0] % 2 != 1:
            raise ObservableError("coefficient grid must be square with odd side")
        self.coeffs = coeffs
        self.cutoff = coeffs.shape[0] // 2

    def evaluate(self, x):
        zp = np.exp(2j * math.pi * x[:, 0])
        zq = np.exp(2j * math.pi * x[:, 1])
        ep = _mode_powers(zp, self.cutoff)
        eq = _mode_powers(zq, self.cutoff)
        return ((ep @ self.coeffs) * eq).sum(axis=1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def coefficient(self, m: int, n: int) -> complex:
        return complex(self.coeffs[m + self.cutoff, n + self.cutoff])


@dataclass(frozen=True)
class GridFunction(_Base):
    """Observable tabulated on the cells of a grid partition.

    values has length cell_count, or cell_count+1 to assign a value to the
    overflow cell; a missing overflow entry evaluates to 0 there.
    """

    partition: GridPartition
    values: tuple[float, ...]

    def __post_init__(self):
        c = self.partition.cell_count
        vals = np.asarray(self.values, dtype=float)
        if vals.shape not in ((c,), (c + 1,)):
            raise ObservableError(f"need {c} or {c + 1} cell values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ObservableError("non-finite cell value")
        object.__setattr__(self, "values", tuple(float(v) for v in vals))

    def evaluate(self, x):
        table = np.asarray(self.values)
        if table.shape[0] == self.partition.cell_count:
            table = np.append(table, 0.0)
        return table[self.partition.cell_index_array(x)]

    def norm(self) -> float:
        vals = np.asarray(self.values)[: self.partition.cell_count]
        return math.sqrt(float(np.sum(vals * vals)) * self.partition.cell_volume)


# --- Hamiltonian functionals -----------------------------------------------


@dataclass(frozen=True)
class KineticEnergy:
    """H(p, q) = p**2 / 2."""

    def evaluate(self, x):
        return 0.5 * x[:, 0] ** 2


@dataclass(frozen=True)
class PendulumEnergy:
    """H(p, q) = p**2/2 + (K/4pi^2) cos(2pi q), the kicked-rotor resonance well."""

    K: float

    def evaluate(self, x):
        return 0.5 * x[:, 0] ** 2 + (self.K / (4.0 * math.pi**2)) * np.cos(_TWO_PI * x[:, 1])


@dataclass(frozen=True)
class ShiftedEnergy:
    """H_eps = H + delta."""

    base: "HamiltonianExpr"
    delta: float

    def evaluate(self, x):
        return self.base.evaluate(x) + self.delta


@dataclass(frozen=True)
class ScaledEnergy:
    """H_eps = factor * H."""

    base: "HamiltonianExpr"
    factor: float

    def evaluate(self, x):
        return self.factor * self.base.evaluate(x)


HamiltonianExpr = KineticEnergy | PendulumEnergy | ShiftedEnergy | ScaledEnergy


@dataclass(frozen=True)
class ExpNeg:
    """f(h) = exp(-beta h); strictly positive."""

    beta: float

    positive = True

    def evaluate(self, h):
        return np.exp(-self.beta * h)


@dataclass(frozen=True)
class Polynomial:
    """f(h) = sum_k c_k h^k, highest degree first (numpy polyval order)."""

    coeffs: tuple[float, ...]

    positive = False

    def __post_init__(self):
        if len(self.coeffs) > 5:
            raise ObservableError("polynomial degree capped at 4")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def evaluate(self, h):
        return np.polyval(self.coeffs, h)


ScalarFn = ExpNeg | Polynomial


@dataclass(frozen=True)
class HamiltonianObservable(_Base):
    """f(H(x)) for f in the scalar set and H in the energy expression set."""

    f: ScalarFn
    H: HamiltonianExpr

    def evaluate(self, x):
        return self.f.evaluate(self.H.evaluate(x))


class LinearCombination(_Base):
    """sum_k a_k psi_k, evaluated term by term on the same block."""

    def __init__(self, terms: Sequence[tuple[complex, "Observable"]]):
        flat: list[tuple[complex, Observable]] = []
        for a, obs in terms:
            if isinstance(obs, LinearCombination):
                flat.extend((a * b, o) for b, o in obs.terms)
            else:
                flat.append((a, obs))
        self.terms = tuple(flat)
        self.is_complex = any(
            o.is_complex or isinstance(a, complex) for a, o in self.terms
        )

    def evaluate(self, x):
        dtype = complex if self.is_complex else float
        out = np.zeros(x.shape[0], dtype=dtype)
        for a, obs in self.terms:
            out += a * obs.evaluate(x)
        return out

    def norm(self) -> float:
        # valid when the terms are mutually orthogonal or a single scaled term
        if len(self.terms) == 1:
            a, obs = self.terms[0]
            return abs(a) * obs.norm()
        raise ObservableError("no closed-form norm for a general combination")


Observable = (
    ConstantObservable
    | IndicatorObservable
    | FourierMode
    | FourierPolynomial
    | GridFunction
    | HamiltonianObservable
    | LinearCombination
)

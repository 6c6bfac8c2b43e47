"""Finite-dimensional evolution operators and invariant projectors.

Two bases back one interface:

* Fourier modes (m, n) with |m|, |n| <= cutoff, where torus rotations act
  diagonally with unimodular entries exp(2pi i (m alpha + n beta)) - the
  exact oracle side;
* Ulam grids, where a general map is represented by the row-stochastic
  matrix of cell-to-cell transition fractions - the simulation side.

The projector onto invariant functions is either written down analytically
(rotations) or obtained as the Cesaro mean of operator powers with a
doubling schedule, then symmetrized and re-idempotized once.  Floats are
all rational, so "irrational rotation number" is a declaration: passing a
plain float selects the irrational branch of the analytic projector,
passing a RationalApproximant the rational one.

Vector conventions: Fourier coefficient vectors are indexed by
``(m + cutoff) * (2*cutoff + 1) + (n + cutoff)``; Ulam vectors hold one
value per cell in cell-id order, plus a trailing bookkeeping entry for the
overflow cell on windowed (cylinder) partitions.  Inner products use the
mode orthonormality, respectively the uniform cell volume; the overflow
entry carries weight zero.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import Box, EnsembleSpec, GeometryError, GridPartition, sample_array
from .maps import MapDef, RationalApproximant
from .observables import (
    ConstantObservable,
    FourierMode,
    FourierPolynomial,
    GridFunction,
    HamiltonianExpr,
    IndicatorObservable,
    LinearCombination,
    Observable,
    ObservableError,
    ScalarFn,
)

_TWO_PI = 2.0 * math.pi


class BasisError(ValueError):
    pass


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Bases


@dataclass(frozen=True)
class FourierBasis:
    cutoff: int

    def __post_init__(self):
        if self.cutoff < 1:
            raise BasisError("mode cutoff must be >= 1")

    @property
    def side(self) -> int:
        return 2 * self.cutoff + 1

    @property
    def size(self) -> int:
        return self.side * self.side

    def mode_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(size,) arrays of m and n in vector-index order."""
        r = np.arange(-self.cutoff, self.cutoff + 1)
        m = np.repeat(r, self.side)
        n = np.tile(r, self.side)
        return m, n

    def index_of(self, m: int, n: int) -> int:
        if abs(m) > self.cutoff or abs(n) > self.cutoff:
            raise BasisError(f"mode ({m}, {n}) outside cutoff {self.cutoff}")
        return (m + self.cutoff) * self.side + (n + self.cutoff)


@dataclass(frozen=True)
class UlamBasis:
    partition: GridPartition

    @property
    def size(self) -> int:
        return self.partition.cell_count + (1 if self.partition.has_overflow else 0)


Basis = FourierBasis | UlamBasis


def inner(basis: Basis, a: np.ndarray, b: np.ndarray) -> complex:
    """<a | b> in the basis geometry (conjugate-linear in the first slot)."""
    if isinstance(basis, FourierBasis):
        return complex(np.vdot(a, b))
    c = basis.partition.cell_count
    return complex(np.vdot(a[:c], b[:c]) * basis.partition.cell_volume)


def vec_norm(basis: Basis, a: np.ndarray) -> float:
    return math.sqrt(max(inner(basis, a, a).real, 0.0))


# ---------------------------------------------------------------------------
# Operators


@dataclass
class KoopmanOperator:
    """Composition operator in a finite basis: diagonal or dense matrix."""

    basis: Basis
    diag: np.ndarray | None = None
    matrix: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.diag is None) == (self.matrix is None):
            raise BasisError("exactly one of diag and matrix must be set")
        n = self.basis.size
        arr = self.diag if self.diag is not None else self.matrix
        want = (n,) if self.diag is not None else (n, n)
        if arr.shape != want:
            raise BasisError(f"array shape {arr.shape} does not match basis size {n}")

    @property
    def is_diagonal(self) -> bool:
        return self.diag is not None

    def apply(self, vec: np.ndarray) -> np.ndarray:
        if self.is_diagonal:
            return self.diag * vec
        return self.matrix @ vec

    def matrix_full(self) -> np.ndarray:
        return np.diag(self.diag) if self.is_diagonal else self.matrix


@dataclass
class InvariantProjector:
    """Orthogonal projector onto the invariant subspace of an operator."""

    basis: Basis
    diag: np.ndarray | None = None
    matrix: np.ndarray | None = None
    construction: str = "analytic"
    converged: bool = True
    residual: float = 0.0
    n_averaged: int = 0

    def __post_init__(self):
        if (self.diag is None) == (self.matrix is None):
            raise BasisError("exactly one of diag and matrix must be set")

    @property
    def is_diagonal(self) -> bool:
        return self.diag is not None

    def apply(self, vec: np.ndarray) -> np.ndarray:
        if self.is_diagonal:
            return self.diag * vec
        return self.matrix @ vec

    def matrix_full(self) -> np.ndarray:
        return np.diag(self.diag) if self.is_diagonal else self.matrix

    @property
    def rank_estimate(self) -> int:
        if self.is_diagonal:
            return int(np.sum(self.diag.real > 0.5))
        return int(round(float(np.trace(self.matrix).real)))


def _mode_phase(k: np.ndarray, value) -> np.ndarray:
    """k * value reduced mod 1 exactly when value is a declared rational."""
    if isinstance(value, RationalApproximant):
        return ((k * value.numerator) % value.denominator) / value.denominator
    return k * float(value)


def fourier_koopman_rotation(alpha, beta, cutoff: int) -> KoopmanOperator:
    """Diagonal unitary of the rotation (p, q) -> (p+alpha, q+beta) mod 1.

    Rotation numbers may be floats or RationalApproximant fractions; for a
    rational N/D the phase m*N/D is reduced mod 1 in integer arithmetic, so
    resonant modes (D | m) carry the diagonal entry 1.0 exactly.
    """
    basis = FourierBasis(cutoff)
    m, n = basis.mode_arrays()
    phase = _mode_phase(m, alpha) + _mode_phase(n, beta)
    diag = np.exp(2j * math.pi * phase)
    # quadrant phases arise exactly from the rational reduction; keep the
    # corresponding roots of unity exact as well
    quarter = phase % 1.0
    for frac, root in ((0.0, 1.0), (0.25, 1.0j), (0.5, -1.0), (0.75, -1.0j)):
        diag[quarter == frac] = root
    return KoopmanOperator(basis, diag=diag,
                           provenance={"kind": "rotation", "alpha": str(alpha),
                                       "beta": str(beta)})


def fourier_projector_rotation(alpha, beta: float, cutoff: int) -> InvariantProjector:
    """Analytic invariant projector of a rotation, 0/1 on the mode diagonal.

    alpha as a plain float declares the fully irrational case (together
    with irrational beta and alpha/beta): only the mean mode (0, 0)
    survives.  alpha as a RationalApproximant N/D keeps the resonant modes
    (m, 0) with D | m.
    """
    basis = FourierBasis(cutoff)
    m, n = basis.mode_arrays()
    if isinstance(alpha, RationalApproximant):
        keep = (n == 0) & (m % alpha.denominator == 0)
    else:
        keep = (m == 0) & (n == 0)
    return InvariantProjector(basis, diag=keep.astype(float),
                              construction="analytic-rotation", converged=True,
                              residual=0.0, n_averaged=0)


def ulam_matrix(mapdef: MapDef, partition: GridPartition, samples_per_cell: int,
                seed: int) -> KoopmanOperator:
    """Row-stochastic cell-transition matrix from per-cell uniform samples.

    Entry (i, j) is the fraction of the cell-i sample whose one-step image
    lands in cell j.  On windowed partitions the overflow cell is a final
    absorbing bookkeeping row.  Deterministic for equal seeds.
    """
    if samples_per_cell < 1:
        raise BasisError("samples_per_cell must be >= 1")
    if tuple(partition.topology) != tuple(mapdef.topology):
        raise GeometryError("partition and map live on different phase spaces")
    basis = UlamBasis(partition)
    c = partition.cell_count
    size = basis.size
    rng = np.random.default_rng(seed)
    lows = partition.cell_lows()
    widths = partition.cell_widths()
    pts = lows[:, None, :] + rng.random((c, samples_per_cell, partition.dim)) * widths
    images = mapdef.step_array(pts.reshape(c * samples_per_cell, partition.dim))
    dest = partition.cell_index_array(images)
    rows = np.repeat(np.arange(c, dtype=np.int64), samples_per_cell)
    counts = np.bincount(rows * size + dest, minlength=c * size).reshape(c, size)
    matrix = np.zeros((size, size))
    matrix[:c] = counts / samples_per_cell
    if partition.has_overflow:
        matrix[c, c] = 1.0
    return KoopmanOperator(basis, matrix=matrix,
                           provenance={"kind": "ulam", "map": repr(mapdef),
                                       "samples_per_cell": samples_per_cell,
                                       "seed": seed})


#: Idempotency target of the Cesaro finalization (the projector contract).
_IDEM_TOL = 1e-8
_IDEM_MAX_ITER = 40


def cesaro_projector(u: KoopmanOperator, n_op: int, tol: float) -> InvariantProjector:
    """Cesaro mean of operator powers with a doubling schedule.

    Maintains A_N = (1/N) sum_{k<N} U^k and V_N = U^N; one doubling step is
    A_2N = (A_N + V_N A_N)/2, V_2N = V_N^2, and the stopping residual
    ||A_N U - A_N||_F equals ||V_N - I||_F / N exactly.  Doubling stops when
    the residual reaches tol or N would exceed n_op; in the latter case the
    result is flagged non-converged with the achieved residual.

    Finalization: the Hermitian Gram square A*A is re-idempotized by
    iterating P <- 3P^2 - 2P^3.  For a unitary U this equals the plain
    symmetrized limit; for noisy row-stochastic (Ulam) matrices the left
    and right fixed spaces differ by the Monte Carlo error in measure
    preservation, and the Gram square selects the orthogonal projector
    onto the stationary-density span, the unique Hermitian idempotent with
    ||P U - P|| at the Cesaro residual scale (plain symmetrization stalls
    at the much larger column-sum error).  ||U P - P|| remains limited by
    that Monte Carlo error on Ulam matrices.
    """
    if n_op < 1:
        raise BasisError("n_op must be >= 1")
    if u.is_diagonal:
        a = np.ones_like(u.diag)
        v = u.diag.copy()
        n = 1
        residual = float(np.linalg.norm(v - 1.0)) / n
        while residual > tol and 2 * n <= n_op:
            a = 0.5 * (a + v * a)
            v = v * v
            n *= 2
            residual = float(np.linalg.norm(v - 1.0)) / n
        p = (np.conj(a) * a).real
        for _ in range(_IDEM_MAX_ITER):
            if float(np.linalg.norm(p * p - p)) <= _IDEM_TOL:
                break
            p = 3.0 * p * p - 2.0 * p * p * p
        return InvariantProjector(u.basis, diag=p, construction="cesaro",
                                  converged=residual <= tol, residual=residual,
                                  n_averaged=n)
    eye = np.eye(u.basis.size, dtype=u.matrix.dtype)
    a = eye.copy()
    v = u.matrix.copy()
    n = 1
    residual = float(np.linalg.norm(v - eye)) / n
    while residual > tol and 2 * n <= n_op:
        a = 0.5 * (a + v @ a)
        v = v @ v
        n *= 2
        residual = float(np.linalg.norm(v - eye)) / n
    p = a.conj().T @ a
    for _ in range(_IDEM_MAX_ITER):
        p2 = p @ p
        if float(np.linalg.norm(p2 - p)) <= _IDEM_TOL:
            break
        p = 3.0 * p2 - 2.0 * (p2 @ p)
    return InvariantProjector(u.basis, matrix=p, construction="cesaro",
                              converged=residual <= tol, residual=residual,
                              n_averaged=n)


# ---------------------------------------------------------------------------
# Observables as basis vectors


def _interval_coefficients(lo: float, hi: float, ks: np.ndarray) -> np.ndarray:
    """integral_lo^hi exp(-2pi i k t) dt for the 1-periodic character.

    Works for wrapped intervals (lo > hi) by integrating to hi + 1.
    """
    width = (hi - lo) if hi >= lo else (1.0 - lo + hi)
    top = hi if hi >= lo else hi + 1.0
    out = np.empty(ks.shape, dtype=complex)
    nz = ks != 0
    k = ks[nz]
    out[nz] = (np.exp(-2j * math.pi * k * top) - np.exp(-2j * math.pi * k * lo)) / (
        -2j * math.pi * k
    )
    out[~nz] = width
    return out


def _box_fourier_vector(box: Box, basis: FourierBasis) -> np.ndarray:
    if len(box.intervals) != 2 or any(t != "periodic" for t in box.topology):
        raise BasisError("Fourier expansion needs a box on the 2-torus")
    ks = np.arange(-basis.cutoff, basis.cutoff + 1)
    cp = _interval_coefficients(*box.intervals[0], ks)
    cq = _interval_coefficients(*box.intervals[1], ks)
    return np.outer(cp, cq).reshape(-1)


def _box_cell_overlap(box: Box, partition: GridPartition) -> np.ndarray:
    """Fraction of each cell covered by the box (exact, axis-separable)."""
    fracs = []
    for j in range(partition.dim):
        lo, hi = box.intervals[j]
        n = partition.cells_per_axis[j]
        a, b = partition.axis_bounds(j)
        w = (b - a) / n
        edges_lo = a + w * np.arange(n)
        edges_hi = edges_lo + w
        pieces = [(lo, hi)] if hi >= lo else [(lo, 1.0), (0.0, hi)]
        f = np.zeros(n)
        for plo, phi_ in pieces:
            f += np.clip(np.minimum(edges_hi, phi_) - np.maximum(edges_lo, plo), 0.0, None) / w
        fracs.append(np.clip(f, 0.0, 1.0))
    grid = fracs[0]
    for f in fracs[1:]:
        grid = np.multiply.outer(f, grid)  # later axes vary slower
    return grid.reshape(-1)


def to_coefficients(obs: Observable, basis: Basis) -> np.ndarray:
    """Expand an observable in the basis; raises BasisError if inexpressible."""
    if isinstance(basis, FourierBasis):
        if isinstance(obs, FourierMode):
            vec = np.zeros(basis.size, dtype=complex)
            vec[basis.index_of(obs.m, obs.n)] = 1.0
            return vec
        if isinstance(obs, FourierPolynomial):
            if obs.cutoff > basis.cutoff:
                outer_mask = np.ones(obs.coeffs.shape, dtype=bool)
                k = obs.cutoff - basis.cutoff
                outer_mask[k:-k, k:-k] = False
                if np.any(obs.coeffs[outer_mask] != 0):
                    raise BasisError("observable has modes beyond the basis cutoff")
                lo = obs.cutoff - basis.cutoff
                return obs.coeffs[lo:lo + basis.side, lo:lo + basis.side].reshape(-1).copy()
            pad = basis.cutoff - obs.cutoff
            full = np.zeros((basis.side, basis.side), dtype=complex)
            full[pad:pad + obs.coeffs.shape[0], pad:pad + obs.coeffs.shape[1]] = obs.coeffs
            return full.reshape(-1)
        if isinstance(obs, ConstantObservable):
            vec = np.zeros(basis.size, dtype=complex)
            vec[basis.index_of(0, 0)] = obs.value
            return vec
        if isinstance(obs, IndicatorObservable) and isinstance(obs.region, Box):
            vec = _box_fourier_vector(obs.region, basis)
            if obs.normalize:
                vec = vec / math.sqrt(obs.region.volume())
            return vec
        if isinstance(obs, LinearCombination):
            out = np.zeros(basis.size, dtype=complex)
            for a, term in obs.terms:
                out += a * to_coefficients(term, basis)
            return out
        raise BasisError(f"{type(obs).__name__} has no Fourier-mode expansion here")
    # Ulam basis: vectors of cell means
    part = basis.partition
    if isinstance(obs, GridFunction):
        if obs.partition != part:
            raise BasisError("grid function lives on a different partition")
        vec = np.zeros(basis.size)
        vec[: len(obs.values)] = obs.values
        return vec
    if isinstance(obs, ConstantObservable):
        vec = np.full(basis.size, float(obs.value))
        if part.has_overflow:
            vec[-1] = 0.0
        return vec
    if isinstance(obs, IndicatorObservable) and isinstance(obs.region, Box):
        vec = np.zeros(basis.size)
        vec[: part.cell_count] = _box_cell_overlap(obs.region, part)
        if obs.normalize:
            vec /= math.sqrt(obs.region.volume())
        return vec
    if isinstance(obs, LinearCombination):
        out = np.zeros(basis.size, dtype=complex)
        for a, term in obs.terms:
            out = out + a * to_coefficients(term, basis)
        return out if np.iscomplexobj(out) and np.any(out.imag != 0) else out.real
    raise BasisError(f"{type(obs).__name__} has no cell-mean expansion here")


def from_coefficients(vec: np.ndarray, basis: Basis) -> Observable:
    if isinstance(basis, FourierBasis):
        return FourierPolynomial(np.asarray(vec, dtype=complex).reshape(basis.side, basis.side))
    vals = np.asarray(vec)
    if np.iscomplexobj(vals):
        if np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals.real))):
            raise BasisError("grid functions are real-valued")
        vals = vals.real
    return GridFunction(basis.partition, tuple(vals))


def apply_projector(p: InvariantProjector, psi: Observable) -> Observable:
    """Project an observable onto the invariant subspace, in p's basis."""
    vec = to_coefficients(psi, p.basis)
    return from_coefficients(p.apply(vec), p.basis)


# ---------------------------------------------------------------------------
# Distances, the continuity functional, probes


class WeakStrongDistance(NamedTuple):
    weak: float
    strong: float


def default_probe(cutoff: int, include_mean: bool = False) -> FourierPolynomial:
    """Smoothly weighted mode bundle: coefficients 1/(1 + m^2 + n^2), unit norm.

    The mean mode (0,0) is dropped by default so the probe lies in the
    orthogonal complement of the constants.  Raw high-frequency probes make
    the continuity functional trivially O(1); fixed smooth weights encode
    probing at fixed resolution.
    """
    side = 2 * cutoff + 1
    r = np.arange(-cutoff, cutoff + 1)
    w = 1.0 / (1.0 + r[:, None] ** 2 + r[None, :] ** 2)
    if not include_mean:
        w[cutoff, cutoff] = 0.0
    w = w / np.linalg.norm(w)
    return FourierPolynomial(w.astype(complex))


def _same_basis(b1: Basis, b2: Basis) -> None:
    if b1 != b2:
        raise BasisError("operands live in different bases")


def weak_distance(u1: KoopmanOperator, u2: KoopmanOperator,
                  probes: Sequence[tuple[Observable, Observable]] | None = None,
                  ) -> WeakStrongDistance:
    """Probe-limited weak and strong operator distances.

    weak  = max over probe pairs of |<phi | (U1 - U2) psi>|
    strong = max over probe psi of ||(U1 - U2) psi||
    """
    _same_basis(u1.basis, u2.basis)
    if probes is None:
        if not isinstance(u1.basis, FourierBasis):
            raise BasisError("explicit probe pairs are required for grid bases")
        w = default_probe(u1.basis.cutoff)
        probes = [(w, w)]
    weak = 0.0
    strong = 0.0
    for phi, psi in probes:
        pv = to_coefficients(phi, u1.basis)
        sv = to_coefficients(psi, u1.basis)
        dv = u1.apply(sv) - u2.apply(sv)
        weak = max(weak, abs(inner(u1.basis, pv, dv)))
        strong = max(strong, vec_norm(u1.basis, dv))
    return WeakStrongDistance(weak, strong)


def eta(phi: Observable, psi: Observable, p_eps: InvariantProjector,
        p_base: InvariantProjector) -> float:
    """Continuity functional |<phi | (P_eps - P) psi>| in a shared basis."""
    _same_basis(p_eps.basis, p_base.basis)
    pv = to_coefficients(phi, p_eps.basis)
    nrm = vec_norm(p_eps.basis, pv)
    if abs(nrm - 1.0) > 1e-8:
        warnings.warn("eta: phi is not normalized; normalizing internally")
        pv = pv / nrm
    sv = to_coefficients(psi, p_eps.basis)
    dv = p_eps.apply(sv) - p_base.apply(sv)
    return abs(inner(p_eps.basis, pv, dv))


# ---------------------------------------------------------------------------
# Coboundary (cohomological) solve


@dataclass
class CoboundaryResult:
    chi: Observable
    residual: float
    sufficient: bool
    ridge: float


def coboundary_solve(psi_c: Observable, u: KoopmanOperator, delta: float,
                     projector: InvariantProjector | None = None,
                     ridge: float | None = None) -> CoboundaryResult:
    """Ridge least-squares solve of psi_c ~ (U - 1) chi in the truncated basis.

    psi_c must be orthogonal to the invariant subspace (within 1e-8,
    checked via the projector when given, else via exactly-invariant
    directions of a diagonal U).  Success means residual <= delta/2; on
    failure the best chi is returned flagged insufficient - expected for
    poorly approximable rotation numbers at small cutoff (small divisors).
    """
    b = to_coefficients(psi_c, u.basis)
    if projector is not None:
        _same_basis(projector.basis, u.basis)
        if vec_norm(u.basis, projector.apply(b)) > 1e-8:
            raise ObservableError("psi_c is not orthogonal to the invariant subspace")
    elif u.is_diagonal:
        invariant = np.abs(u.diag - 1.0) <= 1e-12
        if np.linalg.norm(b[invariant]) > 1e-8:
            raise ObservableError("psi_c is not orthogonal to the invariant subspace")
    if u.is_diagonal:
        lam = ridge if ridge is not None else 1e-10 * float(np.linalg.norm(u.diag - 1.0))
        a = u.diag - 1.0
        chi = np.conj(a) * b / (np.abs(a) ** 2 + lam * lam)
        resid_vec = b - a * chi
    else:
        lam = ridge if ridge is not None else 1e-10 * float(
            np.linalg.norm(u.matrix - np.eye(u.basis.size))
        )
        a = u.matrix - np.eye(u.basis.size)
        gram = a.conj().T @ a + (lam * lam) * np.eye(u.basis.size)
        chi = np.linalg.solve(gram, a.conj().T @ b)
        resid_vec = b - a @ chi
    residual = vec_norm(u.basis, resid_vec)
    return CoboundaryResult(
        chi=from_coefficients(chi, u.basis),
        residual=residual,
        sufficient=residual <= 0.5 * delta,
        ridge=lam,
    )


# ---------------------------------------------------------------------------
# Hamiltonian level-function criterion


@dataclass(frozen=True)
class HamiltonianPerturbation:
    """Unperturbed and perturbed energies with a positive level function f."""

    H: HamiltonianExpr
    H_eps: HamiltonianExpr
    f: ScalarFn


def hamiltonian_ratio_bound(pert: HamiltonianPerturbation, sample: EnsembleSpec) -> float:
    """sup over the sample of |f(H(x)) / f(H_eps(x)) - 1|."""
    x = sample_array(sample)
    num = pert.f.evaluate(pert.H.evaluate(x))
    den = pert.f.evaluate(pert.H_eps.evaluate(x))
    bad = den <= 0.0
    if np.any(bad):
        pt = x[int(np.argmax(bad))]
        raise DomainError(f"f(H_eps) is non-positive at {tuple(pt)}")
    return float(np.max(np.abs(num / den - 1.0)))


# ---------------------------------------------------------------------------
# Serialization


def _basis_descriptor(basis: Basis) -> dict:
    if isinstance(basis, FourierBasis):
        return {"kind": "fourier", "cutoff": basis.cutoff}
    p = basis.partition
    return {
        "kind": "ulam",
        "cells_per_axis": list(p.cells_per_axis),
        "topology": list(p.topology),
        "windows": [list(w) if w else None for w in p.windows],
    }


def save_operator(obj: KoopmanOperator | InvariantProjector, path: str) -> None:
    """Dump basis descriptor plus matrix/diagonal to a .npz file."""
    meta = {
        "type": type(obj).__name__,
        "basis": _basis_descriptor(obj.basis),
    }
    if isinstance(obj, InvariantProjector):
        meta.update(construction=obj.construction, converged=obj.converged,
                    residual=obj.residual, n_averaged=obj.n_averaged)
    else:
        meta["provenance"] = {k: str(v) for k, v in obj.provenance.items()}
    arrays = {"meta": np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)}
    if obj.diag is not None:
        arrays["diag"] = obj.diag
    else:
        arrays["matrix"] = obj.matrix
    np.savez(path, **arrays)


def load_operator(path: str) -> KoopmanOperator | InvariantProjector:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        diag = data["diag"] if "diag" in data else None
        matrix = data["matrix"] if "matrix" in data else None
    bd = meta["basis"]
    if bd["kind"] == "fourier":
        basis: Basis = FourierBasis(bd["cutoff"])
    else:
        basis = UlamBasis(GridPartition(
            tuple(bd["cells_per_axis"]),
            tuple(bd["topology"]),
            tuple(tuple(w) if w else None for w in bd["windows"]),
        ))
    if meta["type"] == "InvariantProjector":
        return InvariantProjector(basis, diag=diag, matrix=matrix,
                                  construction=meta["construction"],
                                  converged=bool(meta["converged"]),
                                  residual=float(meta["residual"]),
                                  n_averaged=int(meta["n_averaged"]))
    return KoopmanOperator(basis, diag=diag, matrix=matrix,
                           provenance=meta.get("provenance", {}))

import math
import warnings

import numpy as np
import pytest

from ergostab.geometry import TORUS_2D, Box, EnsembleSpec, GridPartition
from ergostab.maps import (
    RationalApproximant,
    StandardMapTorus,
    TorusRotation,
    convergents,
)
from ergostab.observables import (
    ConstantObservable,
    ExpNeg,
    FourierMode,
    FourierPolynomial,
    IndicatorObservable,
    KineticEnergy,
    ObservableError,
    ShiftedEnergy,
)
from ergostab.operators import (
    BasisError,
    FourierBasis,
    HamiltonianPerturbation,
    InvariantProjector,
    KoopmanOperator,
    UlamBasis,
    apply_projector,
    cesaro_projector,
    coboundary_solve,
    default_probe,
    eta,
    fourier_koopman_rotation,
    fourier_projector_rotation,
    hamiltonian_ratio_bound,
    inner,
    load_operator,
    save_operator,
    to_coefficients,
    ulam_matrix,
    vec_norm,
    weak_distance,
)

from oracles import cesaro_unimodular

GOLDEN = (math.sqrt(5) - 1) / 2
SQRT2M1 = math.sqrt(2) - 1


class TestFourierOperators:
    def test_zero_rotation_is_identity(self):
        u = fourier_koopman_rotation(0.0, 0.0, 3)
        assert np.array_equal(u.diag, np.ones(49, dtype=complex))

    def test_half_rotation_mode_entry(self):
        u = fourier_koopman_rotation(RationalApproximant(1, 2, 0.5), 0.0, 2)
        idx = u.basis.index_of(1, 0)
        assert u.diag[idx] == -1.0 + 0.0j

    def test_resonant_mode_entry_exactly_one(self):
        u = fourier_koopman_rotation(RationalApproximant(3, 5, 3 / 5), SQRT2M1, 6)
        assert u.diag[u.basis.index_of(5, 0)] == 1.0 + 0.0j

    def test_unitarity(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 8)
        err = np.abs(np.conj(u.diag) * u.diag - 1.0)
        assert float(np.linalg.norm(err)) <= 1e-12

    def test_projector_irrational_keeps_only_mean(self):
        p = fourier_projector_rotation(GOLDEN, SQRT2M1, 5)
        assert p.rank_estimate == 1
        assert p.diag[p.basis.index_of(0, 0)] == 1.0

    def test_projector_rational_divisibility(self):
        p = fourier_projector_rotation(RationalApproximant(3, 5, 3 / 5), SQRT2M1, 12)
        kept = {tuple(mn) for mn, v in zip(zip(*p.basis.mode_arrays()), p.diag) if v == 1.0}
        assert kept == {(0, 0), (5, 0), (-5, 0), (10, 0), (-10, 0)}
        assert p.rank_estimate == 5

    def test_projector_idempotent_exactly(self):
        p = fourier_projector_rotation(RationalApproximant(2, 3, 2 / 3), SQRT2M1, 8)
        assert np.array_equal(p.diag * p.diag, p.diag)

    def test_projector_absorbs_operator_exactly(self):
        r = RationalApproximant(3, 5, 3 / 5)
        u = fourier_koopman_rotation(r, SQRT2M1, 10)
        p = fourier_projector_rotation(r, SQRT2M1, 10)
        assert np.array_equal(p.diag * u.diag, p.diag.astype(complex))


class TestUlam:
    def test_identity_map_gives_identity_matrix(self):
        part = GridPartition((8, 8), TORUS_2D)
        u = ulam_matrix(TorusRotation(0.0, 0.0), part, 50, seed=0)
        assert np.array_equal(u.matrix, np.eye(64))

    def test_quarter_rotation_is_cyclic_permutation(self):
        part = GridPartition((4, 1), TORUS_2D)
        u = ulam_matrix(TorusRotation(0.25, 0.0), part, 100, seed=1)
        expect = np.zeros((4, 4))
        for i in range(4):
            expect[i, (i + 1) % 4] = 1.0
        assert np.array_equal(u.matrix, expect)

    def test_rows_stochastic_and_columns_near_one(self):
        part = GridPartition((32, 32), TORUS_2D)
        u = ulam_matrix(StandardMapTorus(0.5), part, 400, seed=2)
        rows = u.matrix.sum(axis=1)
        assert np.max(np.abs(rows - 1.0)) <= 1e-12
        cols = u.matrix.sum(axis=0)
        # measure preservation makes the matrix doubly stochastic up to
        # Monte Carlo noise ~ sqrt(colsum / samples_per_cell)
        assert np.max(np.abs(cols - 1.0)) <= 5 * math.sqrt(1.0 / 400)
        assert np.mean(np.abs(cols - 1.0)) <= 2 * math.sqrt(1.0 / 400) / math.sqrt(math.pi / 2)

    def test_entries_nonnegative(self):
        part = GridPartition((16, 16), TORUS_2D)
        u = ulam_matrix(StandardMapTorus(1.2), part, 100, seed=3)
        assert np.min(u.matrix) >= 0.0

    def test_deterministic_under_seed(self):
        part = GridPartition((8, 8), TORUS_2D)
        a = ulam_matrix(StandardMapTorus(0.7), part, 64, seed=9)
        b = ulam_matrix(StandardMapTorus(0.7), part, 64, seed=9)
        assert np.array_equal(a.matrix, b.matrix)

    def test_cylinder_overflow_row_absorbing(self):
        from ergostab.geometry import CYLINDER_2D
        from ergostab.maps import StandardMapCylinder

        part = GridPartition((8, 8), CYLINDER_2D, ((-2.0, 2.0), None))
        u = ulam_matrix(StandardMapCylinder(8.0), part, 50, seed=4)
        assert u.matrix.shape == (65, 65)
        assert u.matrix[64, 64] == 1.0
        assert np.max(np.abs(u.matrix.sum(axis=1) - 1.0)) <= 1e-12


class TestCesaroProjector:
    def test_identity_converges_immediately(self):
        u = KoopmanOperator(FourierBasis(2), diag=np.ones(25, dtype=complex))
        p = cesaro_projector(u, n_op=2**20, tol=1e-12)
        assert p.converged and p.n_averaged == 1
        assert np.array_equal(p.diag, np.ones(25))

    def test_plus_minus_one_diagonal(self):
        basis = FourierBasis(1)
        diag = np.array([1, -1, 1, -1, 1, -1, 1, -1, 1], dtype=complex)
        u = KoopmanOperator(basis, diag=diag)
        p = cesaro_projector(u, n_op=2**10, tol=1e-12)
        assert p.converged
        assert np.allclose(p.diag, (diag.real + 1) / 2, atol=1e-15)

    def test_rotation_cesaro_matches_analytic_projector(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 8)
        tol = 1e-6
        p = cesaro_projector(u, n_op=2**62, tol=tol)
        assert p.converged
        exact = fourier_projector_rotation(GOLDEN, SQRT2M1, 8)
        assert np.max(np.abs(p.diag - exact.diag)) <= tol

    def test_cesaro_entries_bounded_by_geometric_closed_form(self):
        # doubling stops at a power of two; the finalization squares the
        # Cesaro entry and then only shrinks sub-threshold values, so the
        # geometric closed form |c_N|^2 bounds every off mode
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 4)
        p = cesaro_projector(u, n_op=2**10, tol=1e-12)
        n = p.n_averaged
        m, mode_n = p.basis.mode_arrays()
        for idx in range(p.basis.size):
            theta = m[idx] * GOLDEN + mode_n[idx] * SQRT2M1
            raw = abs(cesaro_unimodular(theta, n)) ** 2
            if m[idx] == 0 and mode_n[idx] == 0:
                assert p.diag[idx] == 1.0
            else:
                assert p.diag[idx] <= raw + 1e-12

    def test_ulam_projector_algebra(self):
        part = GridPartition((16, 16), TORUS_2D)
        u = ulam_matrix(StandardMapTorus(1.2), part, 200, seed=5)
        p = cesaro_projector(u, n_op=2**21, tol=2e-4)
        assert p.converged
        m = p.matrix
        assert np.linalg.norm(m - m.T) <= 1e-12
        assert np.linalg.norm(m @ m - m) <= 1e-8
        assert np.linalg.norm(m @ u.matrix - m) <= 1e-4
        # left-invariance is limited by the Monte Carlo measure error
        assert np.linalg.norm(u.matrix @ m - m) <= 0.2


class TestApplyProjector:
    def test_ergodic_projection_of_indicator_is_its_measure(self):
        p = fourier_projector_rotation(GOLDEN, SQRT2M1, 8)
        det = Box(((0.5, 0.75), (0.5, 0.75)), TORUS_2D)
        proj = apply_projector(p, IndicatorObservable(det))
        # rank-1 projector keeps the mean mode only: a constant mu(D)
        assert proj.coefficient(0, 0) == pytest.approx(1 / 16, abs=1e-15)
        off = proj.coeffs.copy()
        off[8, 8] = 0.0
        assert np.max(np.abs(off)) == 0.0

    def test_apply_twice_is_apply_once(self):
        r = RationalApproximant(3, 5, 3 / 5)
        p = fourier_projector_rotation(r, SQRT2M1, 8)
        psi = default_probe(8)
        once = apply_projector(p, psi)
        twice = apply_projector(p, once)
        assert np.max(np.abs(once.coeffs - twice.coeffs)) <= 1e-8

    def test_resonant_mode_passes_through(self):
        r = RationalApproximant(3, 5, 3 / 5)
        p = fourier_projector_rotation(r, SQRT2M1, 8)
        out = apply_projector(p, FourierMode(5, 0))
        assert out.coefficient(5, 0) == 1.0
        assert np.sum(np.abs(out.coeffs)) == 1.0

    def test_grid_constant_projection(self):
        # quarter rotation on a 4-cell ring: P averages around the cycle
        part = GridPartition((4, 1), TORUS_2D)
        u = ulam_matrix(TorusRotation(0.25, 0.0), part, 100, seed=1)
        p = cesaro_projector(u, n_op=2**8, tol=1e-12)
        cell0 = IndicatorObservable(Box(((0.0, 0.25), (0.0, 1.0)), TORUS_2D))
        out = apply_projector(p, cell0)
        assert np.allclose(out.values, 0.25, atol=1e-12)


class TestDistancesAndEta:
    def test_identical_operators_distance_zero(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 8)
        d = weak_distance(u, u)
        assert d.weak == 0.0 and d.strong == 0.0

    def test_single_mode_probe_closed_form(self):
        u1 = fourier_koopman_rotation(GOLDEN, SQRT2M1, 4)
        u2 = fourier_koopman_rotation(3 / 5, SQRT2M1, 4)
        mode = FourierMode(1, 0)
        d = weak_distance(u1, u2, [(mode, mode)])
        expect = abs(np.exp(2j * math.pi * GOLDEN) - np.exp(2j * math.pi * 3 / 5))
        assert d.weak == pytest.approx(expect, abs=1e-14)
        assert d.strong == pytest.approx(expect, abs=1e-14)
        assert expect == pytest.approx(2 * abs(math.sin(math.pi * (GOLDEN - 3 / 5))))

    def test_distance_decreases_along_convergents(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 8)
        probe = default_probe(8)
        dists = []
        for r in convergents(GOLDEN, 40):
            ue = fourier_koopman_rotation(r, SQRT2M1, 8)
            dists.append(weak_distance(u, ue, [(probe, probe)]).strong)
        assert dists == sorted(dists, reverse=True)

    def test_eta_zero_for_equal_projectors(self):
        p = fourier_projector_rotation(GOLDEN, SQRT2M1, 8)
        probe = default_probe(8)
        assert eta(probe, probe, p, p) == 0.0

    def test_eta_divisibility_examples(self):
        p = fourier_projector_rotation(GOLDEN, SQRT2M1, 8)
        pe = fourier_projector_rotation(RationalApproximant(3, 5, 3 / 5), SQRT2M1, 8)
        mode1 = FourierMode(1, 0)
        mode5 = FourierMode(5, 0)
        assert eta(mode1, mode1, pe, p) == 0.0
        assert eta(mode5, mode5, pe, p) == 1.0

    def test_eta_warns_and_normalizes(self):
        p = fourier_projector_rotation(GOLDEN, SQRT2M1, 8)
        pe = fourier_projector_rotation(RationalApproximant(1, 2, 0.5), SQRT2M1, 8)
        big = FourierPolynomial(2.0 * default_probe(8).coeffs)
        with pytest.warns(UserWarning):
            val = eta(big, FourierMode(2, 0), pe, p)
        ref = eta(default_probe(8), FourierMode(2, 0), pe, p)
        assert val == pytest.approx(ref, rel=1e-12)

    def test_basis_mismatch_rejected(self):
        p8 = fourier_projector_rotation(GOLDEN, SQRT2M1, 8)
        p4 = fourier_projector_rotation(GOLDEN, SQRT2M1, 4)
        with pytest.raises(BasisError):
            eta(default_probe(8), default_probe(8), p8, p4)


class TestCoboundary:
    def test_single_mode_closed_form(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 6)
        psi = FourierMode(2, 1)
        res = coboundary_solve(psi, u, delta=0.1)
        z = np.exp(2j * math.pi * (2 * GOLDEN + SQRT2M1))
        expect = 1.0 / (z - 1.0)
        assert res.chi.coefficient(2, 1) == pytest.approx(expect, rel=1e-6)
        assert res.residual <= 1e-8
        assert res.sufficient

    def test_zero_input_gives_zero(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 4)
        zero = FourierPolynomial(np.zeros((9, 9)))
        res = coboundary_solve(zero, u, delta=0.1)
        assert res.residual == 0.0
        assert np.max(np.abs(res.chi.coeffs)) == 0.0

    def test_smooth_probe_solves_below_half_delta(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 16)
        res = coboundary_solve(default_probe(16), u, delta=0.1)
        assert res.residual <= 0.05
        assert res.sufficient

    def test_invariant_component_rejected(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 4)
        with pytest.raises(ObservableError):
            coboundary_solve(ConstantObservable(1.0), u, delta=0.1)

    def test_chain_inequality_along_convergents(self):
        # eta(eps) <= delta/2 + ||(U_eps - U) chi_delta|| for every sampled eps
        cutoff, delta = 16, 0.1
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, cutoff)
        p = fourier_projector_rotation(GOLDEN, SQRT2M1, cutoff)
        probe = default_probe(cutoff)
        res = coboundary_solve(probe, u, delta=delta, projector=p)
        assert res.sufficient
        chi_vec = to_coefficients(res.chi, u.basis)
        for r in convergents(GOLDEN, 40):
            ue = fourier_koopman_rotation(r, SQRT2M1, cutoff)
            pe = fourier_projector_rotation(r, SQRT2M1, cutoff)
            lhs = eta(probe, probe, pe, p)
            rhs = 0.5 * delta + vec_norm(u.basis, ue.apply(chi_vec) - u.apply(chi_vec))
            assert rhs - lhs >= 0.0

    def test_dense_path_matches_diagonal(self):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 3)
        dense = KoopmanOperator(u.basis, matrix=np.diag(u.diag))
        psi = FourierMode(1, -2)
        a = coboundary_solve(psi, u, delta=0.2)
        b = coboundary_solve(psi, dense, delta=0.2)
        assert a.residual == pytest.approx(b.residual, abs=1e-10)
        assert np.allclose(a.chi.coeffs, b.chi.coeffs, atol=1e-8)


class TestHamiltonianCriterion:
    sample = EnsembleSpec(Box(((-2.0, 2.0), (0.0, 1.0)),
                              ("real", "periodic")), 500, "uniform", 7)

    def test_unperturbed_bound_is_zero(self):
        h = KineticEnergy()
        pert = HamiltonianPerturbation(h, h, ExpNeg(1.5))
        assert hamiltonian_ratio_bound(pert, self.sample) == 0.0

    def test_exponential_shift_closed_form(self):
        h = KineticEnergy()
        beta, eps = 1.5, 0.2
        pert = HamiltonianPerturbation(h, ShiftedEnergy(h, eps), ExpNeg(beta))
        got = hamiltonian_ratio_bound(pert, self.sample)
        assert got == pytest.approx(math.exp(beta * eps) - 1.0, rel=1e-12)

    def test_monotone_in_shift_size(self):
        h = KineticEnergy()
        bounds = [
            hamiltonian_ratio_bound(
                HamiltonianPerturbation(h, ShiftedEnergy(h, e), ExpNeg(1.0)), self.sample
            )
            for e in (-0.3, -0.1, 0.0, 0.1, 0.3)
        ]
        assert bounds[2] == 0.0
        assert bounds == sorted(bounds, key=abs) or (
            bounds[0] >= bounds[1] >= bounds[2] <= bounds[3] <= bounds[4]
        )

    def test_nonpositive_denominator_reported(self):
        from ergostab.observables import Polynomial
        from ergostab.operators import DomainError

        h = KineticEnergy()
        pert = HamiltonianPerturbation(h, ShiftedEnergy(h, 0.0), Polynomial((1.0, -10.0)))
        with pytest.raises(DomainError):
            hamiltonian_ratio_bound(pert, self.sample)


class TestSerialization:
    def test_operator_roundtrip(self, tmp_path):
        u = fourier_koopman_rotation(GOLDEN, SQRT2M1, 4)
        path = str(tmp_path / "op.npz")
        save_operator(u, path)
        back = load_operator(path)
        assert isinstance(back, KoopmanOperator)
        assert np.array_equal(back.diag, u.diag)

    def test_projector_roundtrip(self, tmp_path):
        part = GridPartition((4, 4), TORUS_2D)
        u = ulam_matrix(StandardMapTorus(0.5), part, 50, seed=11)
        p = cesaro_projector(u, n_op=2**12, tol=1e-3)
        path = str(tmp_path / "proj.npz")
        save_operator(p, path)
        back = load_operator(path)
        assert isinstance(back, InvariantProjector)
        assert np.array_equal(back.matrix, p.matrix)
        assert back.construction == "cesaro"
        assert back.n_averaged == p.n_averaged

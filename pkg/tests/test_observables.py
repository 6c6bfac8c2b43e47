import math

import numpy as np
import pytest

from ergostab.geometry import TORUS_2D, Box, Disk, GridPartition
from ergostab.observables import (
    ConstantObservable,
    ExpNeg,
    FourierMode,
    FourierPolynomial,
    GridFunction,
    HamiltonianObservable,
    IndicatorObservable,
    KineticEnergy,
    LinearCombination,
    ObservableError,
    PendulumEnergy,
    Polynomial,
    ShiftedEnergy,
)


def test_indicator_values_and_norm():
    box = Box(((0.0, 0.25), (0.0, 0.25)), TORUS_2D)
    obs = IndicatorObservable(box)
    vals = obs(np.array([[0.1, 0.1], [0.5, 0.5]]))
    assert vals.tolist() == [1.0, 0.0]
    assert obs.norm() == pytest.approx(0.25)
    assert IndicatorObservable(box, normalize=True).norm() == 1.0


def test_fourier_mode_evaluation():
    obs = FourierMode(2, -1)
    x = np.array([[0.25, 0.5]])
    expected = np.exp(2j * math.pi * (2 * 0.25 - 1 * 0.5))
    assert obs(x)[0] == pytest.approx(expected)
    assert obs.norm() == 1.0


def test_fourier_polynomial_matches_mode_sum():
    rng = np.random.default_rng(0)
    cutoff = 3
    coeffs = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    poly = FourierPolynomial(coeffs)
    x = rng.random((40, 2))
    direct = np.zeros(40, dtype=complex)
    for m in range(-cutoff, cutoff + 1):
        for n in range(-cutoff, cutoff + 1):
            direct += coeffs[m + cutoff, n + cutoff] * FourierMode(m, n)(x)
    assert np.allclose(poly(x), direct, atol=1e-12)
    assert poly.norm() == pytest.approx(np.linalg.norm(coeffs))


def test_grid_function_lookup_and_norm():
    part = GridPartition((2, 2), TORUS_2D)
    gf = GridFunction(part, (1.0, 2.0, 3.0, 4.0))
    vals = gf(np.array([[0.1, 0.1], [0.9, 0.9]]))
    assert vals.tolist() == [1.0, 4.0]
    # discrete norm: sqrt(sum v^2 * cellvol), cellvol = 1/4
    assert gf.norm() == pytest.approx(math.sqrt(30.0 / 4.0))
    unit = gf.normalized()
    n2 = sum(abs(a) ** 2 * t.norm() ** 2 for a, t in unit.terms)
    assert abs(math.sqrt(n2) - 1.0) <= 1e-10


def test_constant_and_linear_combination():
    one = ConstantObservable(1.0)
    box = IndicatorObservable(Box(((0.0, 0.5), (0.0, 1.0)), TORUS_2D))
    combo = 2.0 * one - 3.0 * box
    x = np.array([[0.25, 0.5], [0.75, 0.5]])
    assert combo(x).tolist() == [-1.0, 2.0]
    flat = LinearCombination(((1.0, combo), (1.0, one)))
    assert len(flat.terms) == 3  # nested combinations are flattened


def test_hamiltonian_observables():
    x = np.array([[1.0, 0.0], [2.0, 0.25]])
    kin = KineticEnergy()
    assert kin.evaluate(x).tolist() == [0.5, 2.0]
    pend = PendulumEnergy(4 * math.pi**2)
    assert pend.evaluate(x)[0] == pytest.approx(0.5 + 1.0)
    fH = HamiltonianObservable(ExpNeg(2.0), ShiftedEnergy(kin, 0.5))
    assert fH(x)[0] == pytest.approx(math.exp(-2.0))
    poly = HamiltonianObservable(Polynomial((1.0, 0.0)), kin)  # f(h) = h
    assert poly(x).tolist() == [0.5, 2.0]


def test_polynomial_degree_cap():
    with pytest.raises(ObservableError):
        Polynomial((1.0,) * 7)


def test_disk_indicator():
    obs = IndicatorObservable(Disk((0.5, 0.5), 0.2))
    assert obs(np.array([[0.5, 0.55]]))[0] == 1.0
    assert obs(np.array([[0.5, 0.65]]))[0] == 0.0

import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from hiz.exactcore import ChiSeries, CoincidentEigenvalues, SpectralPoint
from hiz.graphexp import beta4_chi
from hiz.oracle import (
    Ensemble,
    calibrate_beta4_weight,
    haar_sample,
    hciz_unitary_det,
    mc_group_integral,
    mc_matrix_integral,
    pde_residual_numeric,
    reconstruct_full_integral,
    unitary_normalization,
)
from hiz.pdesolver import pde_apply
from hiz.recursion3 import chi_k3


@pytest.mark.parametrize("ens", ["o", "u", "s"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_haar_samples_are_group_elements(ens, k):
    s = haar_sample(ens, k, 500, np.random.default_rng(0))
    assert s.defect() <= 1e-12
    d = 2 * k if ens == "s" else k
    assert s.matrix.shape == (500, d, d)


def test_k1_integrals_are_plane_waves():
    pt = ((0.7,), (1.3,))
    for ens in "ous":
        est = mc_group_integral(ens, pt, 1000, seed=1)
        assert est.mean == pytest.approx(cmath.exp(1j * 0.91), abs=1e-12)
        assert est.std_error < 1e-12


@pytest.mark.parametrize("k", [2, 3])
def test_determinant_small_lambda_limit(k):
    x = [0.3, -1.1, 0.8][:k]
    lam = np.array([0.5, -0.2, 1.4][:k])
    for t, tol in ((1e-3, 1e-2), (1e-4, 1e-3)):
        assert abs(hciz_unitary_det((x, t * lam)) - 1) < tol


def test_normalization_constants():
    assert unitary_normalization(2) == pytest.approx(-1j)
    assert unitary_normalization(3) == pytest.approx(2 * (1j) ** -3)


def test_determinant_k2_closed_form():
    t = 0.37
    val = hciz_unitary_det(((1.0, -1.0), (t, -t)))
    assert val == pytest.approx(-1j * 2j * math.sin(2 * t) / (4 * t), rel=1e-12)


def test_coincident_points_rejected():
    with pytest.raises(CoincidentEigenvalues):
        hciz_unitary_det(((1.0, 1.0), (0.0, 1.0)))


def test_mc_determinism():
    pt = ((0.0, 1.0), (0.0, 2.0))
    a = mc_group_integral("u", pt, 5000, seed=9)
    b = mc_group_integral("u", pt, 5000, seed=9)
    assert a.mean == b.mean and a.std_error == b.std_error


def test_mc_batching_does_not_change_estimate_beyond_noise():
    pt = ((0.0, 1.0), (0.0, 2.0))
    a = mc_group_integral("u", pt, 20000, seed=9, batch=20000)
    b = mc_group_integral("u", pt, 20000, seed=9, batch=3000)
    assert abs(a.mean - b.mean) < 4 * math.hypot(a.std_error, b.std_error)


def _random_group_element(ens: Ensemble, k: int):
    return haar_sample(ens, k, 1, np.random.default_rng(123)).matrix[0]


@pytest.mark.parametrize("ens", list(Ensemble))
def test_haar_invariance(ens):
    k = 2
    lam = [0.0, 1.5]
    x = np.array([0.3, 1.2])
    X = np.diag(np.concatenate([x, x]) if ens is Ensemble.SYMPLECTIC else x).astype(complex)
    h = _random_group_element(ens, k)
    Xh = h @ X @ h.conj().T
    a = mc_matrix_integral(ens, lam, X, 10**4, seed=1)
    b = mc_matrix_integral(ens, lam, Xh, 10**4, seed=2)
    assert abs(a.mean - b.mean) < 4 * math.hypot(a.std_error, b.std_error)


def test_reconstruction_beta2_is_determinant():
    for pt in (((0.0, 1.0), (0.0, 2.0)), ((0.0, 0.5, 1.2), (0.0, 1.0, 2.5))):
        k = len(pt[0])
        rec = reconstruct_full_integral(ChiSeries.one(k), 0, pt)
        assert unitary_normalization(k) * rec == pytest.approx(hciz_unitary_det(pt), rel=1e-12)


def test_beta4_weight_calibration():
    p1, p2 = ((0.0, 0.6), (0.0, 1.5)), ((0.2, 1.1), (0.3, 1.0))
    reps = calibrate_beta4_weight(beta4_chi(2), p1, p2, 200_000, seed=4)
    assert reps["one"].passed
    assert not reps["sign"].passed


def test_beta4_coincident_limit_is_finite():
    from hiz.oracle import coincident_limit

    vals = coincident_limit(beta4_chi(2), 4, 0.3, (0.0, 1.5), eps=(1e-2, 1e-3, 1e-4))
    assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0])


def test_pde_residual_numeric_examples():
    pt = SpectralPoint((0, 1, 3), (0, 1, 2))
    assert abs(pde_residual_numeric(chi_k3(4, 3), 4, pt)) < 1e-10
    one = ChiSeries.one(3)
    expected = -4 * (1 + 1 / 9 + 1 / 4)
    assert pde_residual_numeric(one, 4, pt) == pytest.approx(expected, rel=1e-12)


def test_float_and_exact_operators_agree():
    s = chi_k3(Fraction(3, 2), 6)
    rng = random.Random(12)
    for _ in range(10):
        pt = SpectralPoint.random(3, rng)
        exact = complex(pde_apply(s, pt, Fraction(3, 2)))
        approx = pde_residual_numeric(s, Fraction(3, 2), pt)
        # the residual is a cancellation of O(1) terms, so allow a float64 floor
        assert abs(approx - exact) <= 1e-9 * abs(exact) + 1e-14


def test_truncation_residual_scaling():
    """Residual of the order-6 series at beta = 3 falls like s^-8 under x -> s x."""
    s = chi_k3(Fraction(3, 2), 6)
    pt = SpectralPoint((0, 1, 3), (0, 2, 5))
    r1 = abs(pde_residual_numeric(s, Fraction(3, 2), pt.scaled_x(2)))
    r2 = abs(pde_residual_numeric(s, Fraction(3, 2), pt.scaled_x(20)))
    slope = math.log(r2 / r1) / math.log(10)
    assert slope == pytest.approx(-8, abs=0.3)
    # the exact operator shows the same slope at tau of order 10^2
    e1 = abs(pde_apply(s, pt.scaled_x(20), Fraction(3, 2)))
    e2 = abs(pde_apply(s, pt.scaled_x(200), Fraction(3, 2)))
    assert math.log(e2 / e1) / math.log(10) == pytest.approx(-8, abs=0.05)

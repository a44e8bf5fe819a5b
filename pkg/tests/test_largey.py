from fractions import Fraction

import pytest

from hiz.exactcore import ChiSeries, SpectralPoint, YPoly, parse_monomial
from hiz.largey import (
    PhiSeries,
    is_symmetric,
    largey_vs_recursion,
    phi0,
    phi1,
    phi2_k3,
    phi_order_residual,
    phi_residual_suite,
)


def V(text):
    return parse_monomial(3, text)


def coeff(s, text):
    return s.coeff(V(text)).coeff(0)


def test_phi0_examples():
    assert phi0(2).terms == {(1,): YPoly.const(Fraction(1, 2))}
    assert all(c.coeff(0) == Fraction(1, 2) for c in phi0(3).terms.values())


def test_phi1_examples():
    assert phi1(2).terms == {(2,): YPoly.const(Fraction(-1, 2)), (3,): YPoly.const(Fraction(-1, 12))}
    p = phi1(3)
    assert coeff(p, "v1 v2 v3") == Fraction(1, 4)
    assert coeff(p, "v1^2") == Fraction(-1, 2)
    assert coeff(p, "v2^3") == Fraction(-1, 12)
    triplets = [m for m in phi1(4).terms if sum(m) == 3 and max(m) == 1]
    assert len(triplets) == 4


def test_phi2_examples():
    p = phi2_k3()
    assert coeff(p, "v1^3") == 1
    assert coeff(p, "v1^2 v2 v3") == Fraction(-1, 2)
    assert coeff(p, "v1^5") == Fraction(1, 20)
    assert coeff(p, "v1^4") == Fraction(1, 2)
    assert coeff(p, "v1^3 v2 v3") == Fraction(-1, 8)


@pytest.mark.parametrize("s", [phi0(3), phi1(3), phi1(4), phi1(5), phi2_k3()])
def test_symmetry(s):
    assert is_symmetric(s)


def test_order0_example():
    rep = phi_order_residual(0, SpectralPoint((0, 1, 3), (0, 1, 2)), 1)
    assert rep.exact_zero


@pytest.mark.parametrize("order", [0, 1, 2])
def test_residual_suite_k3(order):
    assert all(r.exact_zero for r in phi_residual_suite(order, 3, 100, seed=2))


@pytest.mark.parametrize("k,order", [(4, 0), (4, 1), (5, 1)])
def test_residual_suite_general_k(k, order):
    assert all(r.exact_zero for r in phi_residual_suite(order, k, 20, seed=3))


def test_order2_restricted_to_k3():
    with pytest.raises(ValueError):
        phi_order_residual(2, SpectralPoint((0, 1, 2, 3), (0, 1, 2, 4)), 1)


def test_corrupted_phi_fails_residual(monkeypatch):
    import hiz.largey as ly

    good = ly.phi2_k3()
    terms = dict(good.terms)
    terms[V("v1^5")] = YPoly.const(Fraction(1, 10))
    monkeypatch.setattr(ly, "phi2_k3", lambda: ChiSeries(3, terms, 5))
    rep = ly.phi_order_residual(2, SpectralPoint((0, 1, 3), (0, 2, 5)), 2)
    assert not rep.passed


def test_largey_expansion_examples():
    chi_phi = PhiSeries.build(3, 3).to_tau_series(3)
    from hiz.exactcore import series_exp

    chi = series_exp(chi_phi, 3)
    y = YPoly.y()
    # 1/tau12 (stored, phase i): y/2
    assert chi.coeff((1, 0, 0)) == y / 2
    # 1/tau12^2 (stored, phase i^2): y^2/8 - y/2  ->  i^2 c = -y^2/8 + y/2
    assert chi.coeff((2, 0, 0)) == y * y / 8 - y / 2


def test_largey_vs_recursion_through_degree5():
    rep = largey_vs_recursion(5)
    assert rep.passed and rep.details["compared"] > 100


def test_fourth_power_needs_phi3():
    rep = largey_vs_recursion(4, top_powers=3)
    assert rep.passed
    with pytest.raises(ValueError):
        largey_vs_recursion(4, top_powers=4)

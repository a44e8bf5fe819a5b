import random
from fractions import Fraction

import pytest
import sympy as sp

from hiz.exactcore import SpectralPoint, YPoly, ypoly_eval
from hiz.pdesolver import graded_residual, pde_apply, solve_chi
from hiz.recursion3 import (
    CoefficientTable3,
    _k3_monomial,
    c_pair,
    c_triple,
    c_two_point,
    chi_k3,
    chi_k3_beta4_compact,
    k2_ode_residual,
    k2_series,
    permutation_symmetric,
    render_factored,
)

Y = YPoly.y()


def test_two_point_examples():
    assert c_two_point(0) == YPoly.const(1)
    assert c_two_point(1) == Y / 2
    assert ypoly_eval(c_two_point(1), 4) == 2
    assert ypoly_eval(c_two_point(2), 4) == 0


def test_pair_examples():
    assert c_pair(1, 1) == (Y / 2) ** 2
    assert c_pair(3, 0) == c_two_point(3)
    assert ypoly_eval(c_pair(2, 2), 12) == 144


def test_triple_examples():
    assert c_triple(1, 1, 1) == (Y / 2) ** 2 * (1 + Y / 2)
    assert ypoly_eval(c_triple(1, 1, 1), 4) == 12


def test_low_r_formulas():
    # C_{n,m,1} = C_{n,m,0} (nm + y/2)
    for n in range(5):
        for m in range(5):
            assert c_triple(n, m, 1) == c_pair(n, m) * (YPoly.const(n * m) + Y / 2)


def test_factored_rendering():
    assert render_factored(c_triple(2, 2, 2)) == "(y/2)^2(-1+y/4)^2(-6+3y/2+y^2/8)"


def test_symmetry_through_nine():
    assert permutation_symmetric(9) == []


@pytest.mark.parametrize("j", [1, 2, 3])
def test_termination_for_even_beta(j):
    y = 2 * j * (j + 1)
    for n in range(j + 3):
        for m in range(j + 3):
            for r in range(j + 3):
                if max(n, m, r) > j:
                    assert ypoly_eval(c_triple(n, m, r), y) == 0


def test_table_lookup_is_permutation_invariant():
    t = CoefficientTable3.build(6)
    assert t[(1, 2, 3)] == t[(3, 2, 1)] == t[(2, 3, 1)] == c_triple(3, 2, 1)
    with pytest.raises(KeyError):
        t[(4, 2, 1)]


def test_chi_k3_examples():
    assert len(chi_k3(0, 5)) == 1
    s = chi_k3(12, 6)
    assert all(max(m) <= 2 for m in s.terms)
    assert s.coeff(_k3_monomial(2, 2, 2)).coeff(0) == 4320


def test_compact_form_equals_recursion():
    assert chi_k3_beta4_compact() == chi_k3(4, 3)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_solver_agrees_with_recursion(j):
    y = 2 * j * (j + 1)
    series, gauge = solve_chi(3, y, j, seed=j)
    assert gauge.free_monomials == []
    assert series == chi_k3(y, 3 * j)


def test_general_y_series_solves_pde_degree_by_degree():
    """For non-integer beta the series does not end; each graded equation
    through the truncation order must still vanish exactly."""
    y = Fraction(3, 2)
    s = chi_k3(y, 10)
    rng = random.Random(5)
    for _ in range(3):
        pt = SpectralPoint.random(3, rng)
        for D in range(1, 11):
            assert graded_residual(s, pt, y, D) == 0


def test_reference_c333_violates_pde():
    """The reference C_{3,3,3} cofactor is -51 - 59y/8 + 37y^2/48 + y^3/48; the
    recursion gives -48 - 8y + 19y^2/24 + y^3/48. Only the latter satisfies
    the degree-9 equation."""
    pref = (Y / 2) ** 2 * YPoly.linear(-1, Fraction(1, 4)) ** 2 * YPoly.linear(-2, Fraction(1, 6)) ** 2
    ours = pref * YPoly((Fraction(-48), Fraction(-8), Fraction(19, 24), Fraction(1, 48)))
    reference = pref * YPoly((Fraction(-51), Fraction(-59, 8), Fraction(37, 48), Fraction(1, 48)))
    assert c_triple(3, 3, 3) == ours
    # the two cofactors differ by (y - 6)(y - 24)/48
    assert ours - reference == pref * (YPoly.linear(-6, 1) * YPoly.linear(-24, 1) * Fraction(1, 48))
    y = Fraction(3, 2)
    good = chi_k3(y, 10)
    terms = dict(good.terms)
    terms[_k3_monomial(3, 3, 3)] = YPoly.const(ypoly_eval(reference, y))
    bad = type(good)(3, terms, 10)
    pt = SpectralPoint((0, 1, 3), (0, 2, 7))
    assert graded_residual(good, pt, y, 9) == 0
    assert graded_residual(bad, pt, y, 9) == Fraction(369, 469762048)


def test_k2_series_matches_product():
    s = k2_series(8)
    for n in range(9):
        assert s.coeff((n,)) == c_two_point(n)


def test_k2_ode_examples():
    pt = SpectralPoint((0, 1), (0, 1))
    rep = k2_ode_residual(1, 4, pt)
    assert rep.passed and rep.exact_zero
    rep = k2_ode_residual(5, 0, pt)
    assert rep.passed and rep.exact_zero


def test_k2_ode_boundary_term_against_sympy():
    """y = 3, N = 6 at tau = 10: the residual is the single term
    (2N(N+1) - y) a_N tau^-(N+2); recomputed by brute-force substitution."""
    N, y = 6, 3
    pt = SpectralPoint((0, 10), (0, 1))  # tau12 = 10
    rep = k2_ode_residual(N, y, pt)
    assert rep.passed and not rep.exact_zero

    t = sp.symbols("t")
    chi = sum(sp.I**n * sp.Rational(ypoly_eval(c_two_point(n), y)) / t**n for n in range(N + 1))
    ode = sp.expand(2 * sp.diff(chi, t, 2) + 2 * sp.I * sp.diff(chi, t) - y / t**2 * chi)
    val = complex(ode.subs(t, 10))
    assert abs(val) == pytest.approx(rep.residual, rel=1e-12)
    boundary = (2 * N * (N + 1) - y) * ypoly_eval(c_two_point(N), y) / Fraction(10) ** (N + 2)
    assert rep.details["boundary_term"] == boundary


def test_pde_apply_on_recursion_series():
    rng = random.Random(9)
    for _ in range(5):
        assert pde_apply(chi_k3(4, 3), SpectralPoint.random(3, rng), 4).is_zero()

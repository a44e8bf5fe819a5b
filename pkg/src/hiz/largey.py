"""The 1/y expansion chi = exp(phi_0 + phi_1/y + phi_2/y^2 + ...).

With u = x/y and v_ab = i / ((lam_a - lam_b)(u_a - u_b)) = i y / tau_ab, each
phi_j is a symmetric polynomial in the v's. A polynomial in v is stored as a
ChiSeries whose "tau" is (lam_a - lam_b)(u_a - u_b): the stored rational
coefficient times i^deg is exactly the v-monomial coefficient, so series_eval
at the u-point gives phi numerically.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .exactcore import (
    ChiSeries,
    GaussianRational,
    Monomial,
    SpectralPoint,
    YPoly,
    edges,
    i_power,
    monomial_from_edges,
    monomial_log_derivatives,
    series_exp,
    to_rational,
)
from .recursion3 import _k3_monomial, c_triple
from .report import VerificationReport


def _v(k: int, *pairs: tuple[int, int]) -> Monomial:
    exps: dict[tuple[int, int], int] = {}
    for a, b in pairs:
        e = (min(a, b), max(a, b))
        exps[e] = exps.get(e, 0) + 1
    return monomial_from_edges(k, exps)


def _vpoly(k: int, terms: dict[Monomial, Fraction], order: int) -> ChiSeries:
    # stored coefficient c with phase i^deg; v^M = i^deg / tau(u)^M, so c is the v-coefficient.
    return ChiSeries(k, {m: YPoly.const(c) for m, c in terms.items()}, order)


@dataclass(frozen=True)
class PhiSeries:
    """phi_0 .. phi_n as polynomials in the v variables."""

    k: int
    orders: tuple[ChiSeries, ...]

    @classmethod
    def build(cls, k: int, n_orders: int = 3) -> "PhiSeries":
        if n_orders > 3 or (n_orders == 3 and k != 3):
            raise ValueError("phi_2 is available for k = 3 only")
        makers = [phi0, phi1, lambda _k: phi2_k3()]
        return cls(k, tuple(makers[j](k) for j in range(n_orders)))

    def to_tau_series(self, max_tau_degree: int) -> ChiSeries:
        """phi as a series in 1/tau with y-polynomial coefficients:
        a v-monomial of degree d in phi_j becomes a y^(d-j) / tau^M."""
        terms: dict[Monomial, YPoly] = {}
        for j, order in enumerate(self.orders):
            for m, c in order.terms.items():
                d = sum(m)
                if d > max_tau_degree:
                    continue
                if d < j:
                    raise ValueError("negative power of y")
                terms[m] = terms.get(m, YPoly()) + YPoly((Fraction(0),) * (d - j) + (c.coeff(0),))
        return ChiSeries(self.k, terms, max_tau_degree)


def phi0(k: int) -> ChiSeries:
    if k < 2:
        raise ValueError("k must be at least 2")
    return _vpoly(k, {_v(k, e): Fraction(1, 2) for e in edges(k)}, 1)


def phi1(k: int) -> ChiSeries:
    if k < 2:
        raise ValueError("k must be at least 2")
    terms: dict[Monomial, Fraction] = {}
    for a, b, c in itertools.combinations(range(1, k + 1), 3):
        terms[_v(k, (a, b), (b, c), (a, c))] = Fraction(1, 4)
    for e in edges(k):
        terms[_v(k, e, e)] = Fraction(-1, 2)
        terms[_v(k, e, e, e)] = Fraction(-1, 12)
    return _vpoly(k, terms, 3)


def phi2_k3() -> ChiSeries:
    k = 3
    V = {1: (2, 3), 2: (1, 3), 3: (1, 2)}
    terms: dict[Monomial, Fraction] = {}

    def add(m, c):
        terms[m] = terms.get(m, Fraction(0)) + c

    tri = [V[1], V[2], V[3]]
    for i in (1, 2, 3):
        add(_v(k, *[V[i]] * 3), Fraction(1))
        add(_v(k, *[V[i]] * 4), Fraction(1, 2))
        add(_v(k, *tri, V[i]), Fraction(-1, 2))
        add(_v(k, *[V[i]] * 5), Fraction(1, 20))
        add(_v(k, *tri, V[i], V[i]), Fraction(-1, 8))
    return _vpoly(k, terms, 5)


# --------------------------------------------------------------------------
# exact evaluation of value, gradient and Laplacian in u


def _jet(s: ChiSeries, pt: SpectralPoint):
    """(gradient list, laplacian) of the v-polynomial s at the u-point pt."""
    k = s.k
    inv = [1 / t for t in pt.taus()]
    grad = [GaussianRational() for _ in range(k)]
    lap = GaussianRational()
    for m, c in s.terms.items():
        val = c.coeff(0)
        for e, n in enumerate(m):
            if n:
                val *= inv[e] ** n
        T = i_power(sum(m)) * val
        g, h = monomial_log_derivatives(k, m, pt.x)
        for a in range(k):
            grad[a] = grad[a] + T * g[a]
        lap = lap + T * sum(ga * ga + ha for ga, ha in zip(g, h))
    return grad, lap


def _lam_dot(pt: SpectralPoint, grad) -> GaussianRational:
    out = GaussianRational()
    for la, ga in zip(pt.lam, grad):
        out = out + ga * la
    return out


def phi_order_residual(order: int, pt: SpectralPoint, y=None) -> VerificationReport:
    """Residual of the order-``order`` equation at the x-point pt (u = x/y).

    order 0:  2i lam.grad phi0 - sum (u_a - u_b)^-2
    order 1:  lap phi0 + |grad phi0|^2 + 2i lam.grad phi1
    order 2:  lap phi1 + 2 grad phi0 . grad phi1 + 2i lam.grad phi2
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if order == 2 and pt.k != 3:
        raise ValueError("order 2 is available for k = 3 only")
    k = pt.k
    yv = Fraction(1) if y is None else to_rational(y)
    if yv == 0:
        raise ValueError("y must be non-zero")
    upt = SpectralPoint(tuple(x / yv for x in pt.x), pt.lam)
    twoi = GaussianRational(Fraction(0), Fraction(2))
    g0, l0 = _jet(phi0(k), upt)
    if order == 0:
        W = sum(1 / (upt.x[a - 1] - upt.x[b - 1]) ** 2 for a, b in edges(k))
        res = twoi * _lam_dot(upt, g0) - W
    else:
        g1, l1 = _jet(phi1(k), upt)
        if order == 1:
            sq = GaussianRational()
            for ga in g0:
                sq = sq + ga * ga
            res = l0 + sq + twoi * _lam_dot(upt, g1)
        else:
            g2, _ = _jet(phi2_k3(), upt)
            cross = GaussianRational()
            for a, b in zip(g0, g1):
                cross = cross + a * b
            res = l1 + cross * 2 + twoi * _lam_dot(upt, g2)
    return VerificationReport(
        name=f"phi{order} residual k={k}",
        passed=res.is_zero(),
        exact_zero=res.is_zero(),
        residual=abs(res),
        inputs={"x": list(pt.x), "lambda": list(pt.lam), "y": yv},
    )


def phi_residual_suite(order: int, k: int, draws: int, seed: int) -> list[VerificationReport]:
    rng = random.Random(seed)
    out = []
    for _ in range(draws):
        pt = SpectralPoint.random(k, rng)
        yv = Fraction(rng.randint(1, 40), rng.randint(1, 7))
        rep = phi_order_residual(order, pt, yv)
        rep.seed = seed
        out.append(rep)
    return out


def is_symmetric(s: ChiSeries) -> bool:
    return all(s.relabel(p) == s for p in itertools.permutations(range(1, s.k + 1)))


# --------------------------------------------------------------------------
# comparison with the k = 3 recursion


def largey_vs_recursion(max_tau_degree: int = 5, top_powers: int = 3) -> VerificationReport:
    """Compare exp(phi_0 + phi_1/y + phi_2/y^2) with c_triple, coefficient by
    coefficient, in the ``top_powers`` highest powers of y."""
    if not 0 <= max_tau_degree <= 5:
        raise ValueError("max_tau_degree must be in 0..5")
    if not 1 <= top_powers <= 3:
        raise ValueError("phi through 1/y^2 fixes at most the top three powers of y")
    phi = PhiSeries.build(3, 3).to_tau_series(max_tau_degree)
    chi = series_exp(phi, max_tau_degree)
    mismatches = []
    checked = 0
    for total in range(max_tau_degree + 1):
        for n in range(total + 1):
            for m in range(total - n + 1):
                r = total - n - m
                mono = _k3_monomial(n, m, r)
                exact = c_triple(n, m, r)
                approx = chi.coeff(mono)
                top = max(exact.degree, approx.degree)
                for p in range(top, max(top - top_powers, -1), -1):
                    checked += 1
                    if exact.coeff(p) != approx.coeff(p):
                        mismatches.append({"nmr": [n, m, r], "power": p, "recursion": exact.coeff(p), "largey": approx.coeff(p)})
    return VerificationReport(
        name=f"largey vs recursion through tau-degree {max_tau_degree}",
        passed=not mismatches,
        exact_zero=not mismatches,
        inputs={"max_tau_degree": max_tau_degree, "top_powers": top_powers},
        details={"compared": checked, "mismatches": mismatches[:20]},
    )

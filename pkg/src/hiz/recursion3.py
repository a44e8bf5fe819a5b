"""Three-point coefficients C_{n,m,r} for arbitrary y, and the two-point series.

chi(k=3) = sum i^(n+m+r) C_{n,m,r} / (tau12^n tau23^m tau31^r).

The recursion runs in r with m held fixed; the third-index terms couple to
C_{n+j, m, r-1-j}, j = 1..r-1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .exactcore import (
    ChiSeries,
    SpectralPoint,
    YPoly,
    monomial_from_edges,
    series_exp,
    to_rational,
    ypoly_eval,
)
from .report import VerificationReport


def two_point_factor(l: int) -> YPoly:
    """-(l-1) + y/(2l)"""
    return YPoly.linear(-(l - 1), Fraction(1, 2 * l))


@lru_cache(maxsize=None)
def c_two_point(n: int) -> YPoly:
    if n < 0:
        raise ValueError("n must be non-negative")
    out = YPoly.const(1)
    for l in range(1, n + 1):
        out = out * two_point_factor(l)
    return out


def c_pair(n: int, m: int) -> YPoly:
    return c_two_point(n) * c_two_point(m)


@lru_cache(maxsize=None)
def _recur(n: int, m: int, r: int) -> YPoly:
    if r == 0:
        return c_pair(n, m)
    out = _recur(n, m, r - 1) * YPoly.linear(Fraction(m * (n - r + 1), r) - (r - 1), Fraction(1, 2 * r))
    for j in range(1, r):
        out = out + _recur(n + j, m, r - 1 - j) * Fraction(m * (n - r + 1 + 2 * j), r)
    return out


def c_triple(n: int, m: int, r: int) -> YPoly:
    """C_{n,m,r} from the recursion, with the indices in the order given."""
    if min(n, m, r) < 0:
        raise ValueError("indices must be non-negative")
    return _recur(n, m, r)


@dataclass
class CoefficientTable3:
    max_order: int
    entries: dict[tuple[int, int, int], YPoly] = field(default_factory=dict)

    @classmethod
    def build(cls, max_order: int) -> "CoefficientTable3":
        t = cls(max_order)
        for total in range(max_order + 1):
            for n in range(total, -1, -1):
                for m in range(min(n, total - n), -1, -1):
                    r = total - n - m
                    if r <= m:
                        t.entries[(n, m, r)] = c_triple(n, m, r)
        return t

    def __getitem__(self, idx) -> YPoly:
        key = tuple(sorted(idx, reverse=True))
        if sum(key) > self.max_order:
            raise KeyError(f"{idx} beyond order {self.max_order}")
        return self.entries[key]

    def to_json_obj(self) -> dict:
        return {
            "max_order": self.max_order,
            "entries": [{"nmr": list(k), "coeff_y": v.to_json()} for k, v in self.entries.items()],
        }


def factor_two_point(p: YPoly, max_l: int = 12) -> tuple[list[tuple[int, int]], YPoly]:
    """Strip factors -(l-1)+y/(2l) from p; returns ([(l, multiplicity)], cofactor)."""
    found = []
    rest = p
    for l in range(1, max_l + 1):
        f = two_point_factor(l)
        mult = 0
        while rest.degree >= 1:
            q, rem = rest.divmod_linear(f.coeff(0), f.coeff(1))
            if rem != 0:
                break
            rest = q
            mult += 1
        if mult:
            found.append((l, mult))
    return found, rest


def render_factored(p: YPoly) -> str:
    from .exactcore import render_ypoly

    factors, rest = factor_two_point(p)
    out = ""
    for l, mult in factors:
        base = "y/2" if l == 1 else render_ypoly(two_point_factor(l), ascending=True)
        out += f"({base})" + (f"^{mult}" if mult > 1 else "")
    if rest.degree > 0 or not out:
        out += f"({render_ypoly(rest, ascending=True)})" if out else render_ypoly(rest, ascending=True)
    elif rest.coeff(0) != 1:
        out = f"{rest.coeff(0)}*" + out
    return out


# --------------------------------------------------------------------------
# series


def _k3_monomial(n: int, m: int, r: int):
    return monomial_from_edges(3, {(1, 2): n, (2, 3): m, (1, 3): r})


def chi_k3(y_value=None, max_order: int = 3) -> ChiSeries:
    """k = 3 series through total degree max_order; y_value None keeps the
    coefficients symbolic in y."""
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    y = None if y_value is None else to_rational(y_value)
    terms = {}
    for total in range(max_order + 1):
        for n in range(total + 1):
            for m in range(total - n + 1):
                r = total - n - m
                c = c_triple(n, m, r)
                terms[_k3_monomial(n, m, r)] = c if y is None else YPoly.const(ypoly_eval(c, y))
    return ChiSeries(3, terms, max_order)


def chi_k3_beta4_compact() -> ChiSeries:
    """exp(phi), phi = 2i sum 1/tau - 4i/(tau12 tau23 tau13), no repeated lines."""
    phi = ChiSeries(
        3,
        {
            _k3_monomial(1, 0, 0): YPoly.const(2),
            _k3_monomial(0, 1, 0): YPoly.const(2),
            _k3_monomial(0, 0, 1): YPoly.const(2),
            # -4i = i^3 * 4
            _k3_monomial(1, 1, 1): YPoly.const(4),
        },
        3,
    )
    return series_exp(phi, 3, per_edge_cap=1)


def k2_series(max_order: int, y_value=None) -> ChiSeries:
    terms = {}
    for n in range(max_order + 1):
        c = c_two_point(n)
        terms[(n,)] = c if y_value is None else YPoly.const(ypoly_eval(c, y_value))
    return ChiSeries(2, terms, max_order)


def k2_recursion_holds(n_max: int = 20) -> bool:
    """-2(n+1) c_{n+1} == (2n(n+1) - y) c_n  as polynomials, n < n_max.

    This is a_{n+1} 2i(n+1) = a_n (2n(n+1) - y) with a_n = i^n c_n.
    """
    y = YPoly.y()
    return all(
        c_two_point(n + 1) * (-2 * (n + 1)) == c_two_point(n) * (YPoly.const(2 * n * (n + 1)) - y)
        for n in range(n_max)
    )


def k2_ode_residual(max_order: int, y_value, pt: SpectralPoint) -> VerificationReport:
    """Residual of 2 chi'' + 2i chi' - (y/tau^2) chi for the truncated series.

    Everything below order tau^-(N+2) cancels, leaving the single term
    (2N(N+1) - y) a_N tau^-(N+2); the check is that nothing else survives.
    """
    if pt.k != 2:
        raise ValueError("k2_ode_residual needs a k=2 point")
    y = to_rational(y_value)
    tau = pt.tau(1, 2)
    N = max_order
    a = [ypoly_eval(c_two_point(n), y) for n in range(N + 1)]  # times i^n
    # collect real and imaginary parts of the residual
    re = Fraction(0)
    im = Fraction(0)

    def add(phase: int, v: Fraction):
        nonlocal re, im
        phase %= 4
        if phase == 0:
            re += v
        elif phase == 1:
            im += v
        elif phase == 2:
            re -= v
        else:
            im -= v

    for n, c in enumerate(a):
        # chi'' term: 2 n (n+1) tau^-(n+2); chi' term: 2i(-n) tau^-(n+1); potential -y tau^-(n+2)
        add(n, (2 * n * (n + 1) - y) * c / tau ** (n + 2))
        add(n + 1, -2 * n * c / tau ** (n + 1))
    boundary = (2 * N * (N + 1) - y) * a[N] / tau ** (N + 2)
    b_re, b_im = Fraction(0), Fraction(0)
    phase = N % 4
    if phase == 0:
        b_re = boundary
    elif phase == 1:
        b_im = boundary
    elif phase == 2:
        b_re = -boundary
    else:
        b_im = -boundary
    exact = re == b_re and im == b_im
    magnitude = float(abs(complex(float(re), float(im))))
    return VerificationReport(
        name=f"k2_ode N={N} y={y}",
        passed=exact,
        exact_zero=(re == 0 and im == 0),
        residual=magnitude,
        inputs={"max_order": N, "y": y, "tau": tau},
        details={"boundary_term": boundary, "residual_re": re, "residual_im": im},
    )


def permutation_symmetric(max_total: int) -> list[tuple[int, int, int]]:
    """Index triples (n+m+r <= max_total) where some permutation disagrees."""
    bad = []
    for total in range(max_total + 1):
        for n in range(total + 1):
            for m in range(total - n + 1):
                r = total - n - m
                base = c_triple(n, m, r)
                if any(c_triple(*p) != base for p in itertools.permutations((n, m, r))):
                    bad.append((n, m, r))
    return bad

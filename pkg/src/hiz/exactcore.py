"""Exact arithmetic carriers: rationals, polynomials in y, edge monomials and
truncated series in the inverse pair variables 1/tau_ab.

A ``ChiSeries`` stores real coefficients only. The phase i**d of a degree-d
monomial is applied when the series is evaluated or rendered, so all linear
algebra stays over the rationals.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

Rational = Fraction
Monomial = tuple[int, ...]  # exponent vector aligned with edges(k)


class CoincidentEigenvalues(ValueError):
    """Two x's or two lambda's coincide, so some tau_ab vanishes."""


def to_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact input")
    return Fraction(value)


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def y_from_beta(beta) -> Fraction:
    beta = to_rational(beta)
    return beta * (beta / 2 - 1)


def beta_from_y(y) -> Fraction | None:
    """Inverse of y = beta(beta/2 - 1) on the branch beta >= 1, when rational."""
    y = to_rational(y)
    disc = 1 + 2 * y
    if disc < 0:
        return None
    num, den = disc.numerator, disc.denominator
    rn, rd = _isqrt_exact(num), _isqrt_exact(den)
    if rn is None or rd is None:
        return None
    return 1 + Fraction(rn, rd)


def _isqrt_exact(n: int) -> int | None:
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


# --------------------------------------------------------------------------
# polynomials in y


@dataclass(frozen=True)
class YPoly:
    """Polynomial in y with exact rational coefficients (index = power)."""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        cs = [to_rational(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def const(cls, c) -> "YPoly":
        return cls((to_rational(c),))

    @classmethod
    def y(cls) -> "YPoly":
        return cls((Fraction(0), Fraction(1)))

    @classmethod
    def linear(cls, c0, c1) -> "YPoly":
        return cls((to_rational(c0), to_rational(c1)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, power: int) -> Fraction:
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return Fraction(0)

    def __call__(self, y) -> Fraction:
        return ypoly_eval(self, y)

    def _coerce(self, other) -> "YPoly":
        if isinstance(other, YPoly):
            return other
        return YPoly.const(other)

    def __add__(self, other) -> "YPoly":
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return YPoly(tuple(self.coeff(i) + other.coeff(i) for i in range(n)))

    __radd__ = __add__

    def __neg__(self) -> "YPoly":
        return YPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "YPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "YPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "YPoly":
        if not isinstance(other, YPoly):
            c = to_rational(other)
            return YPoly(tuple(c * a for a in self.coeffs))
        if not self.coeffs or not other.coeffs:
            return YPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return YPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "YPoly":
        out = YPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, other) -> "YPoly":
        return self * (1 / to_rational(other))

    def divmod_linear(self, c0: Fraction, c1: Fraction) -> tuple["YPoly", Fraction]:
        """Divide by (c0 + c1*y); return quotient and the constant remainder."""
        if c1 == 0:
            raise ZeroDivisionError("not a linear divisor")
        if not self.coeffs:
            return YPoly(), Fraction(0)
        root = -c0 / c1
        # synthetic division by (y - root), then rescale by 1/c1
        n = len(self.coeffs)
        q = [Fraction(0)] * max(n - 1, 0)
        acc = Fraction(0)
        for i in range(n - 1, -1, -1):
            acc = acc * root + self.coeffs[i]
            if i > 0:
                q[i - 1] = acc
        return YPoly(tuple(c / c1 for c in q)), acc

    def to_json(self) -> list[str]:
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "YPoly":
        return cls(tuple(parse_rational(s) for s in data))

    def __str__(self) -> str:
        return render_ypoly(self)


def ypoly_eval(p: YPoly, y) -> Fraction:
    y = to_rational(y)
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * y + c
    return acc


def _render_term(c: Fraction, power: int, var: str) -> str:
    if power == 0:
        return str(c)
    mono = var if power == 1 else f"{var}^{power}"
    num, den = c.numerator, c.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    head = mono if num == 1 else f"{num}{mono}"
    return f"{sign}{head}" if den == 1 else f"{sign}{head}/{den}"


def render_ypoly(p: YPoly, var: str = "y", ascending: bool = False) -> str:
    if p.is_zero():
        return "0"
    powers = range(len(p.coeffs)) if ascending else range(len(p.coeffs) - 1, -1, -1)
    parts = [_render_term(p.coeffs[i], i, var) for i in powers if p.coeffs[i] != 0]
    out = parts[0]
    for t in parts[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


# --------------------------------------------------------------------------
# Gaussian rationals


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __add__(self, other):
        other = _as_gauss(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_as_gauss(other))

    def __rsub__(self, other):
        return _as_gauss(other) - self

    def __mul__(self, other):
        other = _as_gauss(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __truediv__(self, other):
        other = _as_gauss(other)
        n = other.re * other.re + other.im * other.im
        num = self * other.conjugate()
        return GaussianRational(num.re / n, num.im / n)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self) -> float:
        return abs(complex(self))

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _as_gauss(v) -> GaussianRational:
    if isinstance(v, GaussianRational):
        return v
    return GaussianRational(to_rational(v), Fraction(0))


def i_power(d: int) -> GaussianRational:
    return _I_POWERS[d % 4]


_I_POWERS = (
    GaussianRational(Fraction(1), Fraction(0)),
    GaussianRational(Fraction(0), Fraction(1)),
    GaussianRational(Fraction(-1), Fraction(0)),
    GaussianRational(Fraction(0), Fraction(-1)),
)


# --------------------------------------------------------------------------
# edges and monomials


@lru_cache(maxsize=None)
def edges(k: int) -> tuple[tuple[int, int], ...]:
    """Lexicographic list of pairs (a, b), 1 <= a < b <= k."""
    return tuple(itertools.combinations(range(1, k + 1), 2))


@lru_cache(maxsize=None)
def edge_position(k: int) -> dict[tuple[int, int], int]:
    return {e: i for i, e in enumerate(edges(k))}


def k_from_edge_count(n_edges: int) -> int:
    k = 1
    while k * (k - 1) // 2 < n_edges:
        k += 1
    if k * (k - 1) // 2 != n_edges:
        raise ValueError(f"{n_edges} is not a triangular number")
    return k


def monomial_degree(m: Monomial) -> int:
    return sum(m)


def monomial_from_edges(k: int, exps: Mapping[tuple[int, int], int]) -> Monomial:
    pos = edge_position(k)
    out = [0] * len(pos)
    for (a, b), n in exps.items():
        if a > b:
            a, b = b, a
        if (a, b) not in pos:
            raise ValueError(f"edge {(a, b)} not valid for k={k}")
        if n < 0:
            raise ValueError("exponents must be non-negative")
        out[pos[(a, b)]] += n
    return tuple(out)


def monomial_edges(k: int, m: Monomial) -> dict[tuple[int, int], int]:
    return {e: n for e, n in zip(edges(k), m) if n}


def monomials_of_degree(k: int, degree: int, cap: int | None = None) -> list[Monomial]:
    """All exponent vectors of total ``degree``, each entry <= cap, sorted lex."""
    n = k * (k - 1) // 2
    cap = degree if cap is None else cap
    out: list[Monomial] = []

    def rec(prefix: list[int], remaining: int, slots: int):
        if slots == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for e in range(min(cap, remaining), -1, -1):
            if remaining - e > cap * (slots - 1):
                break
            prefix.append(e)
            rec(prefix, remaining - e, slots - 1)
            prefix.pop()

    rec([], degree, n)
    out.sort()
    return out


def permute_monomial(k: int, m: Monomial, perm: Sequence[int]) -> Monomial:
    """Relabel vertices: vertex a goes to perm[a-1] (1-based labels)."""
    exps = {}
    for (a, b), n in zip(edges(k), m):
        if n:
            pa, pb = perm[a - 1], perm[b - 1]
            exps[(min(pa, pb), max(pa, pb))] = n
    return monomial_from_edges(k, exps)


# Conventional labels v1..v6; the k=3 and k=4 conventions differ.
V_LABELS: dict[int, dict[str, tuple[int, int]]] = {
    3: {"v1": (2, 3), "v2": (1, 3), "v3": (1, 2)},
    4: {
        "v1": (1, 2),
        "v2": (2, 3),
        "v3": (1, 3),
        "v4": (1, 4),
        "v5": (2, 4),
        "v6": (3, 4),
    },
}


def parse_monomial(k: int, text: str) -> Monomial:
    """Parse tokens like ``v1 v6``, ``12 34``, ``t12^2 t13`` or ``1-2``."""
    exps: dict[tuple[int, int], int] = {}
    for tok in text.replace("*", " ").replace(",", " ").split():
        power = 1
        if "^" in tok:
            tok, p = tok.split("^")
            power = int(p)
        tok = tok.strip()
        if tok in ("1", ""):
            continue
        if tok.startswith("v"):
            labels = V_LABELS.get(k)
            if labels is None or tok not in labels:
                raise ValueError(f"label {tok!r} not defined for k={k}")
            e = labels[tok]
        else:
            digits = tok.lstrip("t").replace("-", "")
            if len(digits) != 2 or not digits.isdigit():
                raise ValueError(f"cannot parse edge token {tok!r}")
            a, b = int(digits[0]), int(digits[1])
            e = (min(a, b), max(a, b))
        exps[e] = exps.get(e, 0) + power
    return monomial_from_edges(k, exps)


def render_monomial(k: int, m: Monomial, notation: str = "tau") -> str:
    if not any(m):
        return "1"
    names = {}
    if notation == "v":
        if k not in V_LABELS:
            raise ValueError(f"v notation only defined for k in {sorted(V_LABELS)}")
        names = {e: lab for lab, e in V_LABELS[k].items()}
    parts = []
    for e, n in zip(edges(k), m):
        if not n:
            continue
        base = names[e] if notation == "v" else f"t{e[0]}{e[1]}"
        parts.append(base if n == 1 else f"{base}^{n}")
    if notation == "v":
        return " ".join(sorted(parts))
    return "1/(" + " ".join(parts) + ")"


# --------------------------------------------------------------------------
# spectral points


@dataclass(frozen=True)
class SpectralPoint:
    x: tuple[Fraction, ...]
    lam: tuple[Fraction, ...]

    def __post_init__(self):
        x = tuple(to_rational(v) for v in self.x)
        lam = tuple(to_rational(v) for v in self.lam)
        if len(x) != len(lam):
            raise ValueError("x and lambda must have the same length")
        if len(set(x)) != len(x):
            raise CoincidentEigenvalues(f"coincident x values: {x}")
        if len(set(lam)) != len(lam):
            raise CoincidentEigenvalues(f"coincident lambda values: {lam}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "lam", lam)

    @property
    def k(self) -> int:
        return len(self.x)

    def tau(self, a: int, b: int) -> Fraction:
        return (self.lam[a - 1] - self.lam[b - 1]) * (self.x[a - 1] - self.x[b - 1])

    def taus(self) -> tuple[Fraction, ...]:
        return tuple(self.tau(a, b) for a, b in edges(self.k))

    def permute_lambda(self, perm: Sequence[int]) -> "SpectralPoint":
        """lambda'_a = lambda_{perm[a]} (0-based indices)."""
        return SpectralPoint(self.x, tuple(self.lam[p] for p in perm))

    def scaled_x(self, s) -> "SpectralPoint":
        s = to_rational(s)
        return SpectralPoint(tuple(s * v for v in self.x), self.lam)

    @classmethod
    def random(cls, k: int, rng: random.Random, lo: int = -20, hi: int = 20) -> "SpectralPoint":
        if hi - lo + 1 < k:
            raise ValueError("range too small for k distinct values")
        x = rng.sample(range(lo, hi + 1), k)
        lam = rng.sample(range(lo, hi + 1), k)
        return cls(tuple(Fraction(v) for v in x), tuple(Fraction(v) for v in lam))

    def to_json(self) -> dict:
        return {"x": [format_rational(v) for v in self.x], "lambda": [format_rational(v) for v in self.lam]}


# --------------------------------------------------------------------------
# series


@dataclass(frozen=True, eq=False)
class ChiSeries:
    """Finite sum  sum_M i^deg(M) * coeff_M(y) * prod tau_ab^(-n_ab)."""

    k: int
    terms: Mapping[Monomial, YPoly] = field(default_factory=dict)
    max_degree: int = 0

    def __post_init__(self):
        n = self.k * (self.k - 1) // 2
        clean = {}
        for m, c in self.terms.items():
            if len(m) != n:
                raise ValueError(f"monomial {m} has wrong length for k={self.k}")
            if not isinstance(c, YPoly):
                c = YPoly.const(c)
            if not c.is_zero():
                clean[tuple(m)] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items(), key=_term_order)))

    @classmethod
    def one(cls, k: int, max_degree: int = 0) -> "ChiSeries":
        return cls(k, {(0,) * (k * (k - 1) // 2): YPoly.const(1)}, max_degree)

    def coeff(self, m: Monomial) -> YPoly:
        return self.terms.get(tuple(m), YPoly())

    def value_coeff(self, m: Monomial, y=None) -> GaussianRational:
        """Coefficient including its phase i^deg, optionally evaluated at y."""
        c = self.coeff(m)
        if y is None:
            if c.degree > 0:
                raise ValueError("coefficient depends on y; pass a value")
            val = c.coeff(0)
        else:
            val = ypoly_eval(c, y)
        return i_power(sum(m)) * val

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def at_y(self, y) -> "ChiSeries":
        return ChiSeries(self.k, {m: YPoly.const(ypoly_eval(c, y)) for m, c in self.terms.items()}, self.max_degree)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChiSeries):
            return NotImplemented
        return self.k == other.k and self.max_degree == other.max_degree and self.terms == other.terms

    def __add__(self, other: "ChiSeries") -> "ChiSeries":
        if self.k != other.k:
            raise ValueError("mismatched k")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, YPoly()) + c
        return ChiSeries(self.k, out, max(self.max_degree, other.max_degree))

    def scale(self, c) -> "ChiSeries":
        return ChiSeries(self.k, {m: v * c for m, v in self.terms.items()}, self.max_degree)

    def relabel(self, perm: Sequence[int]) -> "ChiSeries":
        return ChiSeries(self.k, {permute_monomial(self.k, m, perm): c for m, c in self.terms.items()}, self.max_degree)

    def items(self) -> Iterator[tuple[Monomial, YPoly]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    # serialization
    def to_json_obj(self) -> dict:
        return {
            "k": self.k,
            "max_degree": self.max_degree,
            "terms": [
                {
                    "edges": {f"{a}-{b}": n for (a, b), n in monomial_edges(self.k, m).items()},
                    "coeff_y": c.to_json(),
                }
                for m, c in self.terms.items()
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_obj(), **kw)

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "ChiSeries":
        k = int(obj["k"])
        terms = {}
        for t in obj["terms"]:
            exps = {}
            for key, n in t.get("edges", {}).items():
                a, b = (int(s) for s in key.split("-"))
                exps[(a, b)] = int(n)
            m = monomial_from_edges(k, exps)
            if m in terms:
                raise ValueError(f"duplicate monomial {key} in JSON")
            terms[m] = YPoly.from_json(t["coeff_y"])
        return cls(k, terms, int(obj.get("max_degree", 0)))

    @classmethod
    def from_json(cls, text: str) -> "ChiSeries":
        return cls.from_json_obj(json.loads(text))

    def to_text(self, notation: str = "tau", y=None) -> str:
        """Aligned text listing with phases applied, one monomial per line."""
        lines = []
        for m, c in self.terms.items():
            d = sum(m)
            if y is not None or c.degree <= 0:
                val = i_power(d) * (ypoly_eval(c, y) if y is not None else c.coeff(0))
                coef = _render_gauss(val)
            else:
                phase = ["", "i", "-", "-i"][d % 4]
                coef = f"{phase}({render_ypoly(c)})" if phase else f"({render_ypoly(c)})"
            lines.append(f"{coef:>24}  {render_monomial(self.k, m, notation)}")
        return "\n".join(lines) if lines else "0"


def _render_gauss(v: GaussianRational) -> str:
    if v.im == 0:
        return str(v.re)
    if v.re == 0:
        return f"{v.im}i"
    return str(v)


def _term_order(item):
    m = item[0]
    return (sum(m), tuple(-e for e in m))


def series_multiply_truncate(
    s1: ChiSeries, s2: ChiSeries, max_total_degree: int, per_edge_cap: int | None = None
) -> ChiSeries:
    if s1.k != s2.k:
        raise ValueError(f"mismatched k: {s1.k} vs {s2.k}")
    out: dict[Monomial, YPoly] = {}
    for m1, c1 in s1.terms.items():
        d1 = sum(m1)
        if d1 > max_total_degree:
            continue
        for m2, c2 in s2.terms.items():
            if d1 + sum(m2) > max_total_degree:
                continue
            m = tuple(a + b for a, b in zip(m1, m2))
            if per_edge_cap is not None and max(m, default=0) > per_edge_cap:
                continue
            out[m] = out.get(m, YPoly()) + c1 * c2
    return ChiSeries(s1.k, out, max_total_degree)


def series_exp(phi: ChiSeries, max_total_degree: int, per_edge_cap: int | None = None) -> ChiSeries:
    """exp(phi) for phi without constant term, truncated like series_multiply_truncate."""
    zero = (0,) * (phi.k * (phi.k - 1) // 2)
    if not phi.coeff(zero).is_zero():
        raise ValueError("phi must have no constant term")
    result = ChiSeries.one(phi.k, max_total_degree)
    power = ChiSeries.one(phi.k, max_total_degree)
    n = 1
    while True:
        power = series_multiply_truncate(power, phi, max_total_degree, per_edge_cap)
        if not power.terms:
            break
        result = result + power.scale(Fraction(1, _factorial(n)))
        n += 1
    return ChiSeries(phi.k, result.terms, max_total_degree)


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    import math

    return math.factorial(n)


def series_eval(s: ChiSeries, pt: SpectralPoint, y=None) -> GaussianRational:
    if pt.k != s.k:
        raise ValueError(f"point has k={pt.k}, series has k={s.k}")
    inv = [1 / t for t in pt.taus()]
    acc = [Fraction(0)] * 4
    for m, c in s.terms.items():
        val = ypoly_eval(c, y) if y is not None else _const_or_raise(c)
        for e, n in enumerate(m):
            if n:
                val *= inv[e] ** n
        acc[sum(m) % 4] += val
    return GaussianRational(acc[0] - acc[2], acc[1] - acc[3])


def _const_or_raise(c: YPoly) -> Fraction:
    if c.degree > 0:
        raise ValueError("series coefficients depend on y; pass y")
    return c.coeff(0)


def series_from_pairs(k: int, pairs: Iterable[tuple[Monomial, object]], max_degree: int = 0) -> ChiSeries:
    return ChiSeries(k, {m: (c if isinstance(c, YPoly) else YPoly.const(c)) for m, c in pairs}, max_degree)


# --------------------------------------------------------------------------
# derivatives of monomials through the chain rule


def monomial_log_derivatives(k: int, m: Monomial, x: Sequence[Fraction]):
    """For M = prod_e (c_e / (x_a - x_b))^{n_e}:  d_a M = M g_a  and
    d_a^2 M = M (g_a^2 + h_a).  Returns (g, h); constants c_e drop out."""
    g = [Fraction(0)] * k
    h = [Fraction(0)] * k
    for (a, b), n in zip(edges(k), m):
        if not n:
            continue
        inv = 1 / (x[a - 1] - x[b - 1])
        g[a - 1] -= n * inv
        g[b - 1] += n * inv
        q = n * inv * inv
        h[a - 1] += q
        h[b - 1] += q
    return g, h

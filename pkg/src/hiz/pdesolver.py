"""Heat-kernel operator on chi and the collocation solver for even beta.

The operator  L = sum_a d_a^2 + 2i sum_a lambda_a d_a - y sum_{a<b} (x_a-x_b)^-2
maps a homogeneous piece of x-degree -D into pieces of degree -(D+1) (first
order part) and -(D+2) (the rest). Writing chi = sum_D i^D chi_D with real
chi_D, L chi = 0 splits into one real equation per degree:

    2 * lambda.grad(chi_D) = (Laplacian - y V)(chi_{D-1})

so the solver fixes chi_D from chi_{D-1}, degree by degree. Each degree is an
exact linear system assembled by evaluating both sides at random integer
spectral points.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import prod

import numpy as np

from .exactcore import (
    ChiSeries,
    GaussianRational,
    Monomial,
    SpectralPoint,
    YPoly,
    edges,
    monomial_from_edges,
    monomial_log_derivatives,
    monomials_of_degree,
    permute_monomial,
    to_rational,
    ypoly_eval,
)
from .linalg import (
    InconsistentSystem,
    crt_pair,
    fraction_mod,
    primes_below,
    rational_reconstruct,
    solve_mod,
)

log = logging.getLogger(__name__)

MAX_PRIMES = 16


# --------------------------------------------------------------------------
# exact operator


def pde_apply(s: ChiSeries, pt: SpectralPoint, y) -> GaussianRational:
    """Exact value of L(chi) at pt."""
    if pt.k != s.k:
        raise ValueError(f"point has k={pt.k}, series has k={s.k}")
    y = to_rational(y)
    k = s.k
    taus = pt.taus()
    inv_tau = [1 / t for t in taus]
    potential = sum(1 / (pt.x[a - 1] - pt.x[b - 1]) ** 2 for a, b in edges(k))
    acc = [Fraction(0)] * 4
    for m, c in s.terms.items():
        coef = ypoly_eval(c, y)
        if coef == 0:
            continue
        M = coef
        for e, n in enumerate(m):
            if n:
                M *= inv_tau[e] ** n
        g, h = monomial_log_derivatives(k, m, pt.x)
        second = sum(ga * ga + ha for ga, ha in zip(g, h)) - y * potential
        first = sum(la * ga for la, ga in zip(pt.lam, g))
        d = sum(m)
        acc[d % 4] += M * second
        acc[(d + 1) % 4] += 2 * M * first
    return GaussianRational(acc[0] - acc[2], acc[1] - acc[3])


def graded_residual(s: ChiSeries, pt: SpectralPoint, y, degree: int) -> Fraction:
    """Real residual of the degree-``degree`` equation
    2 lambda.grad(chi_D) - (Lap - yV) chi_{D-1} at pt."""
    y = to_rational(y)
    k = s.k
    inv_tau = [1 / t for t in pt.taus()]
    potential = sum(1 / (pt.x[a - 1] - pt.x[b - 1]) ** 2 for a, b in edges(k))
    total = Fraction(0)
    for m, c in s.terms.items():
        d = sum(m)
        if d not in (degree, degree - 1):
            continue
        M = ypoly_eval(c, y)
        for e, n in enumerate(m):
            if n:
                M *= inv_tau[e] ** n
        g, h = monomial_log_derivatives(k, m, pt.x)
        if d == degree:
            total += 2 * M * sum(la * ga for la, ga in zip(pt.lam, g))
        else:
            total -= M * (sum(ga * ga + ha for ga, ha in zip(g, h)) - y * potential)
    return total


class _IntPoint:
    """Integer-scaled exact evaluation at a point with integer coordinates.

    With T = prod tau_e^cap and P = prod delta_e (delta_e = x_a - x_b):
        A_M * T * P        = a(M)   (A_M = lambda.grad M)
        B_M * T * P^2 * yd = b(M)   (B_M = (Lap - yV) M, yd = denominator of y)
    """

    def __init__(self, k: int, pt: SpectralPoint, cap: int, y: Fraction):
        self.k = k
        es = edges(k)
        x = [int(v) for v in pt.x]
        lam = [int(v) for v in pt.lam]
        self.delta = [x[a - 1] - x[b - 1] for a, b in es]
        self.lam_e = [lam[a - 1] - lam[b - 1] for a, b in es]
        self.tau = [d * l for d, l in zip(self.delta, self.lam_e)]
        self.P = prod(self.delta)
        self.P_e = [self.P // d for d in self.delta]
        self.cap = cap
        self.pows = [[t**j for j in range(cap + 1)] for t in self.tau]
        self.y_num, self.y_den = y.numerator, y.denominator
        self.V_P2 = sum(pe * pe for pe in self.P_e)
        self.incident = [[(e, -1 if a == v else 1) for e, (a, b) in enumerate(es) if v in (a, b)] for v in range(1, k + 1)]

    def _mnum(self, m: Monomial) -> int:
        return prod(self.pows[e][self.cap - n] for e, n in enumerate(m))

    def a(self, m: Monomial) -> int:
        return -self._mnum(m) * sum(n * l * pe for n, l, pe in zip(m, self.lam_e, self.P_e) if n)

    def b(self, m: Monomial) -> int:
        gsq = 0
        for inc in self.incident:
            ga = sum(sgn * m[e] * self.P_e[e] for e, sgn in inc)
            gsq += ga * ga
        hsum = 2 * sum(n * pe * pe for n, pe in zip(m, self.P_e) if n)
        inner = (gsq + hsum) * self.y_den - self.y_num * self.V_P2
        return self._mnum(m) * inner


# --------------------------------------------------------------------------
# residual systems


@dataclass
class GaugeReport:
    """Coefficients fixed to zero because the monomial basis is over-complete."""

    free_monomials: list[Monomial] = field(default_factory=list)
    identity_count: int = 0
    by_degree: dict[int, int] = field(default_factory=dict)
    directions: list[dict[Monomial, Fraction]] = field(default_factory=list)

    def to_json_obj(self, k: int) -> dict:
        def key(m):
            return " ".join(f"{a}-{b}^{n}" if n > 1 else f"{a}-{b}" for (a, b), n in zip(edges(k), m) if n) or "1"

        return {
            "identity_count": self.identity_count,
            "by_degree": {str(d): n for d, n in sorted(self.by_degree.items())},
            "free_monomials": [key(m) for m in self.free_monomials],
            "directions": [
                {key(m): f"{c.numerator}/{c.denominator}" for m, c in sorted(d.items())} for d in self.directions
            ],
        }


@dataclass
class ResidualSystem:
    """Linear system for the degree-``degree`` coefficients.

    Column j is the sum of the monomials in ``columns[j]`` (a single monomial
    in the plain basis, a permutation orbit in the symmetric basis).
    """

    k: int
    y: Fraction
    cap: int
    degree: int
    columns: list[list[Monomial]]
    prev: dict[Monomial, Fraction]
    points: list[SpectralPoint] = field(default_factory=list)

    @property
    def unknowns(self) -> list[Monomial]:
        return [c[0] for c in self.columns]

    def __post_init__(self):
        flat = [m for col in self.columns for m in col]
        self._flat = np.array(flat, dtype=np.int64).reshape(len(flat), self.k * (self.k - 1) // 2)
        self._col_of = np.repeat(np.arange(len(self.columns)), [len(c) for c in self.columns])
        prev_items = sorted(self.prev.items())
        self._prev_monos = np.array([m for m, _ in prev_items], dtype=np.int64).reshape(
            len(prev_items), self.k * (self.k - 1) // 2
        )
        self._prev_coeffs = [c for _, c in prev_items]

    def rows_mod(self, p: int) -> np.ndarray:
        """Augmented matrix [2A | B-part] modulo p, one row per point."""
        ncols = len(self.columns)
        out = np.zeros((len(self.points), ncols + 1), dtype=np.int64)
        prev_c = np.array([fraction_mod(c, p) for c in self._prev_coeffs], dtype=np.int64)
        y_mod = fraction_mod(self.y, p)
        for i, pt in enumerate(self.points):
            tab = _mod_tables(self.k, pt, p, self.cap)
            A = _mod_A(self._flat, tab, p)
            col = np.zeros(ncols, dtype=np.int64)
            np.add.at(col, self._col_of, A)
            out[i, :ncols] = 2 * (col % p) % p
            if len(self._prev_coeffs):
                B = _mod_B(self._prev_monos, tab, p, y_mod)
                out[i, ncols] = int(np.sum(prev_c * B % p) % p)
        return out

    def exact_residual(self, pt: SpectralPoint, coeffs: list[Fraction]) -> Fraction:
        ip = _IntPoint(self.k, pt, self.cap, self.y)
        lhs = Fraction(0)
        for col, c in zip(self.columns, coeffs):
            if c:
                lhs += c * sum(ip.a(m) for m in col)
        rhs = Fraction(0)
        for m, c in self.prev.items():
            rhs += c * ip.b(m)
        return 2 * lhs * ip.P * ip.y_den - rhs

    def exact_identity(self, pt: SpectralPoint, direction: list[Fraction]) -> Fraction:
        ip = _IntPoint(self.k, pt, self.cap, self.y)
        return sum(
            (c * sum(ip._mnum(m) for m in col) for col, c in zip(self.columns, direction) if c),
            Fraction(0),
        )


def _mod_tables(k: int, pt: SpectralPoint, p: int, cap: int):
    es = edges(k)
    delta = [int(pt.x[a - 1] - pt.x[b - 1]) for a, b in es]
    lam_e = [int(pt.lam[a - 1] - pt.lam[b - 1]) for a, b in es]
    inv_d = [pow(d, -1, p) for d in delta]
    inv_t = [inv_d[e] * pow(lam_e[e], -1, p) % p for e in range(len(es))]
    powtab = np.array([[pow(t, j, p) for j in range(cap + 1)] for t in inv_t], dtype=np.int64)
    sg = np.zeros((len(es), k), dtype=np.int64)
    for e, (a, b) in enumerate(es):
        sg[e, a - 1] = (-inv_d[e]) % p
        sg[e, b - 1] = inv_d[e]
    return {
        "pow": powtab,
        "sg": sg,
        "lam_inv": np.array([l * d % p for l, d in zip(lam_e, inv_d)], dtype=np.int64),
        "h2": np.array([2 * d * d % p for d in inv_d], dtype=np.int64),
        "V": sum(d * d for d in inv_d) % p,
    }


def _mod_M(monos: np.ndarray, tab, p: int) -> np.ndarray:
    M = np.ones(monos.shape[0], dtype=np.int64)
    for e in range(monos.shape[1]):
        M = M * tab["pow"][e][monos[:, e]] % p
    return M


def _mod_A(monos: np.ndarray, tab, p: int) -> np.ndarray:
    M = _mod_M(monos, tab, p)
    s = monos @ tab["lam_inv"] % p
    return M * ((p - s) % p) % p


def _mod_B(monos: np.ndarray, tab, p: int, y_mod: int) -> np.ndarray:
    M = _mod_M(monos, tab, p)
    G = monos @ tab["sg"] % p
    gsq = np.zeros(monos.shape[0], dtype=np.int64)
    for a in range(G.shape[1]):
        gsq = (gsq + G[:, a] * G[:, a] % p) % p
    hs = monos @ tab["h2"] % p
    inner = (gsq + hs - y_mod * tab["V"] % p) % p
    return M * inner % p


# --------------------------------------------------------------------------
# orbits under vertex relabeling


def _orbit_columns(k: int, monos: list[Monomial]) -> list[list[Monomial]]:
    index = {m: i for i, m in enumerate(monos)}
    parent = list(range(len(monos)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    gens = [tuple([2, 1] + list(range(3, k + 1)))]
    if k > 2:
        gens.append(tuple(list(range(2, k + 1)) + [1]))
    for m in monos:
        for g in gens:
            i, j = find(index[m]), find(index[permute_monomial(k, m, g)])
            if i != j:
                parent[i] = j
    groups: dict[int, list[Monomial]] = {}
    for m in monos:
        groups.setdefault(find(index[m]), []).append(m)
    cols = [sorted(g) for g in groups.values()]
    cols.sort(key=lambda c: c[0])
    return cols


# --------------------------------------------------------------------------
# solver


def _draw_points(k: int, rng: random.Random, n: int) -> list[SpectralPoint]:
    return [SpectralPoint.random(k, rng) for _ in range(n)]


def _reconstruct(residues: list[int], modulus: int) -> list[Fraction] | None:
    out = []
    for r in residues:
        q = rational_reconstruct(r, modulus)
        if q is None:
            return None
        out.append(q)
    return out


def _solve_degree(system: ResidualSystem, rng: random.Random, margin: int):
    """Coefficients of the columns (free ones zero), free column indices and
    the kernel basis, all exact."""
    ncols = len(system.columns)
    system.points = _draw_points(system.k, rng, ncols + margin)
    primes = primes_below()
    p = next(primes)

    # refresh points until the rank is stable
    rank = len(solve_mod(system.rows_mod(p), ncols, p)[2])
    while rank < ncols:
        system.points += _draw_points(system.k, rng, margin)
        new_rank = len(solve_mod(system.rows_mod(p), ncols, p)[2])
        if new_rank == rank:
            break
        rank = new_rank

    acc = None
    modulus = 1
    pivots_ref = None
    failures = 0
    for attempt in range(MAX_PRIMES):
        if attempt:
            p = next(primes)
        try:
            x, kernel, pivots, free = solve_mod(system.rows_mod(p), ncols, p)
        except InconsistentSystem:
            failures += 1
            if failures >= 2:
                raise InconsistentSystem(
                    f"no solution at degree {system.degree} (k={system.k}, y={system.y}, cap={system.cap})"
                )
            continue
        if pivots_ref is None or len(pivots) > len(pivots_ref):
            pivots_ref, acc, modulus = pivots, None, 1
        elif pivots != pivots_ref:
            continue
        vec = [int(v) for v in x] + [int(v) for v in kernel.T.ravel()]
        if acc is None:
            acc, modulus = vec, p
        else:
            merged = [crt_pair(a, modulus, b, p) for a, b in zip(acc, vec)]
            acc = [m[0] for m in merged]
            modulus *= p
        rec = _reconstruct(acc, modulus)
        if rec is None:
            continue
        sol, kflat = rec[:ncols], rec[ncols:]
        kern = [kflat[j * ncols : (j + 1) * ncols] for j in range(len(free))]
        checks = _draw_points(system.k, rng, 2)
        if all(system.exact_residual(pt, sol) == 0 for pt in checks) and all(
            system.exact_identity(pt, kv) == 0 for kv in kern for pt in checks
        ):
            return sol, free, kern
    raise InconsistentSystem(f"reconstruction did not stabilise at degree {system.degree}")


@lru_cache(maxsize=32)
def _solve_cached(k: int, y: Fraction, cap: int, seed: int, basis: str, margin: int):
    rng = random.Random(seed)
    n_edges = k * (k - 1) // 2
    top = cap * n_edges
    zero = (0,) * n_edges
    coeffs: dict[Monomial, Fraction] = {zero: Fraction(1)}
    prev = {zero: Fraction(1)}
    gauge = GaugeReport()
    for D in range(1, top + 1):
        monos = monomials_of_degree(k, D, cap)
        columns = _orbit_columns(k, monos) if basis == "symmetric" else [[m] for m in monos]
        system = ResidualSystem(k, y, cap, D, columns, prev)
        sol, free, kern = _solve_degree(system, rng, margin)
        cur: dict[Monomial, Fraction] = {}
        for col, c in zip(columns, sol):
            if c:
                for m in col:
                    cur[m] = c
        for f in free:
            gauge.free_monomials.append(columns[f][0])
        for kv in kern:
            gauge.directions.append({m: c for col, c in zip(columns, kv) if c for m in col})
        if free:
            gauge.by_degree[D] = len(free)
        log.debug("degree %d: %d columns, %d free", D, len(columns), len(free))
        coeffs.update(cur)
        prev = cur
    # the degree top+1 equation has no unknowns left: (Lap - yV) chi_top must vanish
    term = ResidualSystem(k, y, cap, top + 1, [], prev)
    for pt in _draw_points(k, rng, 3):
        if term.exact_residual(pt, []) != 0:
            raise InconsistentSystem(f"series does not terminate within per-edge cap {cap}")
    gauge.identity_count = len(gauge.free_monomials)
    series = ChiSeries(k, {m: YPoly.const(c) for m, c in coeffs.items()}, top)
    return series, gauge


def solve_chi(
    k: int,
    y,
    per_edge_cap: int,
    seed: int = 0,
    basis: str = "monomial",
    margin: int = 8,
) -> tuple[ChiSeries, GaugeReport]:
    """Terminating chi for even beta = 2(cap+1), i.e. y = 2 cap (cap+1).

    ``basis="symmetric"`` solves for one coefficient per permutation orbit,
    which is much smaller and gives the same series whenever no gauge freedom
    is present.
    """
    y = to_rational(y)
    if k < 2:
        raise ValueError("k must be at least 2")
    if per_edge_cap < 0 or y != 2 * per_edge_cap * (per_edge_cap + 1):
        raise ValueError(f"y={y} does not match per_edge_cap={per_edge_cap} (need y = 2 cap (cap+1))")
    if basis not in ("monomial", "symmetric"):
        raise ValueError(f"unknown basis {basis!r}")
    series, gauge = _solve_cached(k, y, per_edge_cap, seed, basis, margin)
    return series, gauge


# --------------------------------------------------------------------------
# identities


def cubic_identity_residual(pt: SpectralPoint, quadruple=(1, 2, 3, 4)) -> Fraction:
    """Sixteen-term cubic relation between the six tau's of four points."""
    if pt.k < 4:
        raise ValueError("need k >= 4")
    a, b, c, d = quadruple
    if len({a, b, c, d}) != 4:
        raise ValueError("quadruple labels must be distinct")
    t12, t13, t14 = pt.tau(a, b), pt.tau(a, c), pt.tau(a, d)
    t23, t24, t34 = pt.tau(b, c), pt.tau(b, d), pt.tau(c, d)
    return (
        t12**2 * t34
        + t13**2 * t24
        + t14**2 * t23
        + t23**2 * t14
        + t24**2 * t13
        + t34**2 * t12
        - t12 * t34 * (t23 + t24 + t14 + t13)
        - t13 * t24 * (t14 + t12 + t23 + t34)
        - t14 * t23 * (t12 + t24 + t34 + t13)
        + t12 * t24 * t14
        + t13 * t14 * t34
        + t23 * t24 * t34
        + t12 * t23 * t13
    )


def cubic_identity_direction(k: int = 4, cap: int = 2, quadruple=(1, 2, 3, 4)) -> dict[Monomial, Fraction]:
    """The cubic relation divided by prod tau^cap, as a relation among
    inverse-tau monomials (needs cap >= 2)."""
    a, b, c, d = quadruple
    e = {
        "12": (a, b), "13": (a, c), "14": (a, d),
        "23": (b, c), "24": (b, d), "34": (c, d),
    }
    terms: list[tuple[int, tuple[str, ...]]] = []
    for s, t in (("12", "34"), ("13", "24"), ("14", "23")):
        terms.append((1, (s, s, t)))
        terms.append((1, (t, t, s)))
        for g in e:
            if g not in (s, t):
                terms.append((-1, (s, t, g)))
    for tri in (("12", "24", "14"), ("13", "14", "34"), ("23", "24", "34"), ("12", "23", "13")):
        terms.append((1, tri))
    out: dict[Monomial, Fraction] = {}
    for sign, factors in terms:
        exps = {}
        for name, (u, v) in e.items():
            exps[(min(u, v), max(u, v))] = cap - factors.count(name)
        m = monomial_from_edges(k, exps)
        out[m] = out.get(m, Fraction(0)) + sign
    return {m: c for m, c in out.items() if c}


def id_residuals(pt: SpectralPoint) -> list[Fraction]:
    """Residuals of id0, id1, id2, id3 at a k=3 point (all should be 0).

    The V's are taken as 1/tau; every identity is homogeneous, so the factor i
    in V = i/tau (and any rescaling of x) drops out.
    """
    if pt.k != 3:
        raise ValueError("identities are stated for k=3")
    lam = pt.lam

    def L(a, b):
        return lam[a - 1] - lam[b - 1]

    def t(a, b):
        return pt.tau(a, b)

    def V(a, b):
        return 1 / t(a, b)

    cyc = ((1, 2, 3), (2, 3, 1), (3, 1, 2))
    id0 = sum(L(a, b) * L(c, a) * t(b, c) ** 2 - L(a, b) ** 2 * t(c, a) * t(b, c) for a, b, c in cyc)
    id1 = sum(V(c, a) * V(a, b) * L(a, b) * L(a, c) for a, b, c in cyc)
    V1, V2, V3 = V(2, 3), V(3, 1), V(1, 2)
    P = V1 * V2 * V3
    id2 = sum(V(c, a) ** 2 * V(a, b) ** 2 * L(a, b) * L(a, c) for a, b, c in cyc) + P * sum(
        L(b, c) ** 2 * V(b, c) for a, b, c in cyc
    )
    S2 = V1**2 + V2**2 + V3**2
    id3 = sum(
        V(c, a) ** 2 * V(a, b) ** 2 * (V(c, a) ** 2 + V(a, b) ** 2) * L(a, b) * L(a, c) for a, b, c in cyc
    ) + sum(L(b, c) ** 2 * P * (V(b, c) * S2 + P / 2) for a, b, c in cyc)
    return [id0, id1, id2, id3]


def all_quadruples(k: int):
    return itertools.combinations(range(1, k + 1), 4)


# --------------------------------------------------------------------------
# k = 4 six-index coefficients and relations modulo the gauge


def six_index_monomial(n: int, m: int, r: int, p: int, q: int, l: int) -> Monomial:
    """C_{nmr;pql} multiplies 1/(t12^n t13^m t23^r t24^p t34^q t14^l)."""
    return monomial_from_edges(4, {(1, 2): n, (1, 3): m, (2, 3): r, (2, 4): p, (3, 4): q, (1, 4): l})


def six_index(series: ChiSeries, idx: str | tuple) -> Fraction:
    """Coefficient by six-index label, e.g. ``"222;220"``."""
    if isinstance(idx, str):
        digits = [int(ch) for ch in idx if ch.isdigit()]
    else:
        digits = list(idx)
    if len(digits) != 6:
        raise ValueError(f"need six indices, got {idx!r}")
    return series.coeff(six_index_monomial(*digits)).coeff(0)


class _Affine:
    """const + sum_j vec[j] t_j, for coefficients shifted along gauge directions."""

    def __init__(self, const: Fraction, vec: list[Fraction]):
        self.const = const
        self.vec = vec

    @property
    def is_const(self) -> bool:
        return not any(self.vec)

    def __sub__(self, other: "_Affine") -> "_Affine":
        return _Affine(self.const - other.const, [a - b for a, b in zip(self.vec, other.vec)])

    def times(self, other: "_Affine") -> "_Affine":
        if not self.is_const and not other.is_const:
            raise ArithmeticError("relation is not linear in the gauge parameters")
        if self.is_const:
            return _Affine(self.const * other.const, [self.const * v for v in other.vec])
        return other.times(self)

    def scale(self, c: Fraction) -> "_Affine":
        return _Affine(self.const * c, [v * c for v in self.vec])


def beta6_relations(series: ChiSeries, gauge: GaugeReport, y=12):
    """Residual forms of the three k = 4 relations at beta = 6.

    R1: C_{nm2;pq1} = C_{nm2;pq0} (np + mq + y/2)
    R2: C_{nmr;pq0} C_{r00;000} = C_{nmr;000} C_{pqr;000}
    R3: C_{222;pq2} = C_{222;pq1} (p/2 + q/2 - 1 + y/4)

    Each coefficient is taken as its solved value plus sum_j t_j d_j(M) over
    the gauge directions d_j; returns a list of (label, _Affine residual).
    """
    y = to_rational(y)
    nd = len(gauge.directions)

    def C(*idx) -> _Affine:
        m = six_index_monomial(*idx)
        return _Affine(series.coeff(m).coeff(0), [d.get(m, Fraction(0)) for d in gauge.directions])

    out = []
    R = range(3)
    for n, m, p, q in itertools.product(R, R, R, R):
        out.append((f"R1 {n}{m}2;{p}{q}1", C(n, m, 2, p, q, 1) - C(n, m, 2, p, q, 0).scale(n * p + m * q + y / 2)))
    for n, m, r, p, q in itertools.product(R, R, R, R, R):
        lhs = C(n, m, r, p, q, 0).times(C(r, 0, 0, 0, 0, 0))
        out.append((f"R2 {n}{m}{r};{p}{q}0", lhs - C(n, m, r, 0, 0, 0).times(C(p, q, r, 0, 0, 0))))
    for p, q in itertools.product(R, R):
        rhs = C(2, 2, 2, p, q, 1).scale(Fraction(p + q, 2) - 1 + y / 4)
        out.append((f"R3 222;{p}{q}2", C(2, 2, 2, p, q, 2) - rhs))
    return out


def relations_modulo_gauge(relations) -> tuple[bool, list[Fraction] | None, list[str]]:
    """Find a gauge shift t making every residual vanish.

    Returns (consistent, t, labels violated at t = 0).
    """
    from .linalg import solve_rational

    raw = [lab for lab, form in relations if form.const != 0]
    rows = [form.vec for _, form in relations]
    rhs = [-form.const for _, form in relations]
    if not rows or not rows[0]:
        return (not raw), [], raw
    try:
        t, _ = solve_rational(rows, rhs)
    except InconsistentSystem:
        return False, None, raw
    return True, t, raw

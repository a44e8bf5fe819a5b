"""Complete-graph weights for beta = 4.

Each monomial of chi at beta = 4 is a simple graph on k labelled points (one
line per factor 1/tau_ab). The coefficient of the complete graph on n points
is C_n = prod_{l<=n} l!. The series itself comes from the PDE solver; the
graph rules here serve as independent regression checks.
"""

from __future__ import annotations

import enum
import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exactcore import ChiSeries, Monomial, edges, monomial_from_edges
from .pdesolver import solve_chi
from .report import VerificationReport


@lru_cache(maxsize=None)
def complete_weight(n: int) -> int:
    if n < 0:
        raise ValueError("n must be non-negative")
    return math.prod(math.factorial(l) for l in range(1, n + 1))


def gaussian_weight_check(
    n: int, mc_samples: int, seed: int, batch: int = 500_000, target_rel_error: float = 0.05
) -> VerificationReport:
    """Monte Carlo estimate of E[prod_{i<j} (z_i - z_j)^2] for z ~ N(0, 1)^n,
    compared with complete_weight(n) at four standard errors."""
    if not 1 <= n <= 4:
        raise ValueError("n must be in 1..4")
    if mc_samples < 2:
        raise ValueError("need at least two samples")
    exact = complete_weight(n)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < mc_samples:
        m = min(batch, mc_samples - done)
        z = rng.standard_normal((m, n))
        f = np.ones(m)
        for i, j in itertools.combinations(range(n), 2):
            f *= (z[:, i] - z[:, j]) ** 2
        total += f.sum()
        total_sq += (f * f).sum()
        done += m
    mean = total / mc_samples
    var = max(total_sq / mc_samples - mean * mean, 0.0) * mc_samples / (mc_samples - 1)
    se = math.sqrt(var / mc_samples)
    rel = se / exact
    return VerificationReport(
        name=f"gaussian_weight n={n}",
        passed=abs(mean - exact) <= 4 * se,
        residual=abs(mean - exact),
        tolerance=4 * se,
        seed=seed,
        inputs={"n": n, "samples": mc_samples},
        details={
            "mean": mean,
            "std_error": se,
            "exact": exact,
            "relative_std_error": rel,
            "target_reached": rel <= target_rel_error,
        },
    )


@lru_cache(maxsize=None)
def beta4_chi(k: int) -> ChiSeries:
    """Terminating chi at beta = 4: integer coefficients, constant term 1 and
    top coefficient C_k on the complete graph."""
    if not 2 <= k <= 6:
        raise ValueError("beta4_chi supports 2 <= k <= 6")
    basis = "symmetric" if k >= 6 else "monomial"
    series, _ = solve_chi(k, 4, 1, basis=basis)
    top = (1,) * (k * (k - 1) // 2)
    if series.coeff(top).coeff(0) != complete_weight(k):
        raise ArithmeticError("top coefficient differs from C_k")
    for c in series.terms.values():
        if c.coeff(0).denominator != 1:
            raise ArithmeticError("non-integer coefficient at beta = 4")
    return series


class DeletionRule(str, enum.Enum):
    ONE_LINE = "one_line"
    TWO_LINES_SAME_POINT = "two_lines_same_point"
    TWO_LINES_NONADJACENT = "two_lines_nonadjacent"


def deletion_rule_weight(k: int, rule: DeletionRule | str) -> Fraction:
    rule = DeletionRule(rule)
    C = complete_weight
    if rule is DeletionRule.ONE_LINE:
        if k < 2:
            raise ValueError("one_line needs k >= 2")
        return Fraction(C(k - 1) ** 2, C(k - 2))
    if k < 4:
        raise ValueError(f"{rule.value} needs k >= 4")
    if rule is DeletionRule.TWO_LINES_SAME_POINT:
        return Fraction(C(k - 1) * C(k - 2), C(k - 3))
    return Fraction(C(k - 2) ** 4 * C(k - 4), C(k - 3) ** 4)


def deletion_monomial(k: int, rule: DeletionRule | str) -> Monomial:
    """A representative graph: K_k with the given lines removed."""
    rule = DeletionRule(rule)
    removed = {
        DeletionRule.ONE_LINE: [(1, 2)],
        DeletionRule.TWO_LINES_SAME_POINT: [(1, 2), (1, 3)],
        DeletionRule.TWO_LINES_NONADJACENT: [(1, 2), (3, 4)],
    }[rule]
    return monomial_from_edges(k, {e: 1 for e in edges(k) if e not in removed})


# --------------------------------------------------------------------------
# graph helpers


def graph_of(k: int, m: Monomial) -> list[tuple[int, int]]:
    if any(n > 1 for n in m):
        raise ValueError("beta = 4 graphs have single lines only")
    return [e for e, n in zip(edges(k), m) if n]


def maximal_cliques(k: int, m: Monomial) -> list[frozenset[int]]:
    """Maximal cliques, isolated points included as one-point cliques."""
    adj = {v: set() for v in range(1, k + 1)}
    for a, b in graph_of(k, m):
        adj[a].add(b)
        adj[b].add(a)
    out: list[frozenset[int]] = []

    def bk(r, p, x):
        if not p and not x:
            out.append(frozenset(r))
            return
        for v in list(p):
            bk(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bk(set(), set(adj), set())
    return sorted(out, key=lambda c: (len(c), sorted(c)))


def disjoint_clique_weight(k: int, m: Monomial) -> int | None:
    """Product of complete weights when the graph is a vertex-disjoint union of
    cliques; None otherwise."""
    cliques = maximal_cliques(k, m)
    seen: set[int] = set()
    for c in cliques:
        if seen & c:
            return None
        seen |= c
    return math.prod(complete_weight(len(c)) for c in cliques)


def clique_cover_weight(k: int, m: Monomial) -> Fraction:
    """Inclusion-exclusion over maximal cliques: prod over nonempty subsets S
    of C_{|cap S|} ** (-1)^(|S|+1).

    Reproduces every weight written out for k = 3 and k = 4 and the three
    deletion rules; it is a heuristic for other graphs, not a theorem.
    """
    cliques = maximal_cliques(k, m)
    num, den = 1, 1
    for r in range(1, len(cliques) + 1):
        for subset in itertools.combinations(cliques, r):
            inter = frozenset.intersection(*subset)
            w = complete_weight(len(inter))
            if r % 2:
                num *= w
            else:
                den *= w
    return Fraction(num, den)


def _C(n):
    return Fraction(complete_weight(n))


def k4_table() -> list[tuple[str, Fraction, list[str]]]:
    """The written-out k = 4 expansion: (class, weight without phase, monomials
    in v1..v6 labels)."""
    C = _C
    return [
        ("empty", Fraction(1), [""]),
        ("line", C(2) * C(1) / C(0), ["v1", "v2", "v3", "v4", "v5", "v6"]),
        (
            "adjacent pair",
            C(2) ** 2 / C(1),
            ["v1 v2", "v2 v3", "v1 v3", "v1 v4", "v1 v5", "v2 v5", "v2 v6", "v3 v6", "v3 v4", "v4 v5", "v4 v6", "v5 v6"],
        ),
        ("opposite pair", C(2) ** 2, ["v1 v6", "v2 v4", "v3 v5"]),
        ("triangle", C(3) * C(1) / C(0), ["v1 v2 v3", "v1 v4 v5", "v2 v5 v6", "v3 v4 v6"]),
        (
            "path",
            C(2) ** 3 / C(1) ** 2,
            [
                "v1 v3 v5", "v1 v3 v6", "v2 v3 v4", "v3 v4 v5", "v3 v5 v6", "v1 v5 v6",
                "v2 v4 v5", "v2 v3 v5", "v1 v2 v4", "v1 v4 v6", "v1 v2 v6", "v2 v4 v6",
            ],
        ),
        ("star", C(2) ** 3 / C(1), ["v1 v2 v5", "v1 v3 v4", "v2 v3 v6", "v4 v5 v6"]),
        ("square", C(2) ** 4 * C(0) / C(1) ** 4, ["v1 v2 v4 v6", "v1 v3 v5 v6", "v2 v3 v4 v5"]),
        (
            "triangle with tail",
            C(3) * C(2) / C(1),
            [
                "v2 v4 v5 v6", "v2 v3 v5 v6", "v1 v2 v5 v6", "v3 v4 v5 v6", "v1 v3 v4 v6", "v2 v3 v4 v6",
                "v1 v2 v3 v5", "v1 v2 v3 v6", "v1 v2 v3 v4", "v1 v3 v4 v5", "v1 v2 v4 v5", "v1 v4 v5 v6",
            ],
        ),
        (
            "two triangles",
            C(3) ** 2 / C(2),
            ["v2 v3 v4 v5 v6", "v1 v3 v4 v5 v6", "v1 v2 v4 v5 v6", "v1 v2 v3 v5 v6", "v1 v2 v3 v4 v6", "v1 v2 v3 v4 v5"],
        ),
        ("tetrahedron", C(4), ["v1 v2 v3 v4 v5 v6"]),
    ]


def k3_table() -> list[tuple[str, Fraction, list[str]]]:
    C = _C
    return [
        ("empty", Fraction(1), [""]),
        ("line", C(2) * C(1) / C(0), ["v1", "v2", "v3"]),
        ("pair", C(2) ** 2 / C(1), ["v1 v2", "v2 v3", "v1 v3"]),
        ("triangle", C(3), ["v1 v2 v3"]),
    ]


def f_polynomial(series: ChiSeries) -> dict[Monomial, "GaussianRational"]:
    """f = chi * prod tau_ab, normalized to constant term 1, as a map from
    tau-exponent vectors (positive powers) to Gaussian-rational coefficients.

    Only meaningful for a terminating series with per-edge exponent <= 1.
    """
    from .exactcore import GaussianRational, i_power

    n_edges = series.k * (series.k - 1) // 2
    raw: dict[Monomial, GaussianRational] = {}
    for m, c in series.terms.items():
        if any(e > 1 for e in m):
            raise ValueError("f is defined here for per-edge exponent <= 1")
        raw[tuple(1 - e for e in m)] = i_power(sum(m)) * c.coeff(0)
    norm = raw.get((0,) * n_edges)
    if norm is None or norm.is_zero():
        raise ValueError("series lacks the complete-graph term")
    return {m: v / norm for m, v in raw.items()}


def f_linear_terms(series: ChiSeries) -> dict[tuple[int, int], "GaussianRational"]:
    f = f_polynomial(series)
    out = {}
    for idx, e in enumerate(edges(series.k)):
        m = tuple(1 if j == idx else 0 for j in range(len(edges(series.k))))
        out[e] = f.get(m)
    return out

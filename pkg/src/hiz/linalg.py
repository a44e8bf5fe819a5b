"""Exact linear solves over Q.

Two routes: plain Gauss-Jordan on ``Fraction`` for small systems, and a
multi-modular route (elimination mod word-sized primes in numpy, CRT, rational
reconstruction) for the collocation systems, whose answers are always checked
exactly by the caller.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np


class InconsistentSystem(ArithmeticError):
    pass


def solve_rational(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve rows @ x = rhs exactly.

    Free variables (columns without a pivot, scanning left to right) are set to
    zero. Returns ``(x, free_columns)``; raises InconsistentSystem.
    """
    m = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    if not m:
        return [], []
    ncols = len(m[0]) - 1
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        best = None
        for i in range(r, len(m)):
            v = m[i][c]
            if v != 0:
                size = v.numerator.bit_length() + v.denominator.bit_length()
                if best is None or size < best[0]:
                    best = (size, i)
        if best is None:
            continue
        i = best[1]
        m[r], m[i] = m[i], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for j in range(len(m)):
            if j != r and m[j][c] != 0:
                f = m[j][c]
                m[j] = [a - f * b for a, b in zip(m[j], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    for j in range(r, len(m)):
        if m[j][ncols] != 0:
            raise InconsistentSystem("right-hand side is not in the column span")
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][ncols]
    free = [c for c in range(ncols) if c not in set(pivots)]
    return x, free


# --------------------------------------------------------------------------
# modular route


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 7, 61):  # deterministic below 4.7e9
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_below(bound: int = 2**31):
    n = bound - 1
    while n > 2:
        if _is_prime(n):
            yield n
        n -= 1


def rref_mod(aug: np.ndarray, ncols: int, p: int):
    """Row-reduce an int64 matrix mod p (p < 2**31) in place on a copy.

    The first ``ncols`` columns are eliminated; trailing columns ride along.
    Returns (reduced, pivot_columns).
    """
    R = np.array(aug, dtype=np.int64) % p
    nrows = R.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r, c:] = R[r, c:] * inv % p
        col = R[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            R[np.ix_(rows, np.arange(c, R.shape[1]))] = (
                R[rows, c:] - np.outer(col[rows], R[r, c:]) % p
            ) % p
        pivots.append(c)
        r += 1
    return R, pivots


def solve_mod(aug: np.ndarray, ncols: int, p: int):
    """Solution (free vars = 0) and kernel basis of aug[:, :ncols] mod p.

    Returns (x, kernel, pivots, free) with kernel as an (ncols, n_free) array,
    or raises InconsistentSystem.
    """
    R, pivots = rref_mod(aug, ncols, p)
    rank = len(pivots)
    if R.shape[1] > ncols and np.any(R[rank:, ncols:] != 0):
        raise InconsistentSystem(f"inconsistent modulo {p}")
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    x = np.zeros(ncols, dtype=np.int64)
    if R.shape[1] > ncols:
        for i, c in enumerate(pivots):
            x[c] = R[i, ncols]
    kernel = np.zeros((ncols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        kernel[f, j] = 1
        for i, c in enumerate(pivots):
            kernel[c, j] = (-R[i, f]) % p
    return x, kernel, pivots, free


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    t = (r2 - r1) * pow(m1, -1, m2) % m2
    return r1 + m1 * t, m1 * m2


def rational_reconstruct(a: int, m: int) -> Fraction | None:
    """Find n/d == a (mod m) with |n|, d <= sqrt(m/2), or None."""
    a %= m
    if a == 0:
        return Fraction(0)
    bound = int((m // 2) ** 0.5)
    while (bound + 1) * (bound + 1) <= m // 2:
        bound += 1
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    from math import gcd

    if gcd(r1, s1) != 1:
        return None
    return Fraction(r1, s1)


def fraction_mod(q: Fraction, p: int) -> int:
    den = q.denominator % p
    if den == 0:
        raise ZeroDivisionError(f"denominator divisible by {p}")
    return q.numerator % p * pow(den, -1, p) % p

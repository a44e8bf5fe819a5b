"""Floating-point ground truth: the unitary determinant formula, Haar Monte
Carlo over O(k), U(k) and Sp(k), and the permutation-symmetrized
reconstruction of the group integral from a terminating chi.
"""

from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactcore import ChiSeries, CoincidentEigenvalues, SpectralPoint, edges, to_rational, ypoly_eval
from .report import VerificationReport

UNITARITY_TOL = 1e-12
DEFAULT_BATCH = 100_000


class Ensemble(str, enum.Enum):
    ORTHOGONAL = "o"
    UNITARY = "u"
    SYMPLECTIC = "s"

    @property
    def beta(self) -> int:
        return {"o": 1, "u": 2, "s": 4}[self.value]

    @classmethod
    def from_beta(cls, beta: int) -> "Ensemble":
        return {1: cls.ORTHOGONAL, 2: cls.UNITARY, 4: cls.SYMPLECTIC}[int(beta)]


@dataclass
class HaarSample:
    """A batch of Haar-distributed group elements, shape (n, d, d).

    For Sp(k) the matrices are 2k x 2k complex with block form
    [[A, B], [-conj(B), conj(A)]].
    """

    ensemble: Ensemble
    k: int
    matrix: np.ndarray

    def defect(self) -> float:
        g = self.matrix
        d = g.shape[-1]
        gram = np.conj(np.swapaxes(g, -1, -2)) @ g
        err = float(np.max(np.abs(gram - np.eye(d)))) if len(g) else 0.0
        if self.ensemble is Ensemble.SYMPLECTIC:
            k = self.k
            err = max(
                err,
                float(np.max(np.abs(g[:, k:, k:] - np.conj(g[:, :k, :k])))),
                float(np.max(np.abs(g[:, k:, :k] + np.conj(g[:, :k, k:])))),
            )
        elif self.ensemble is Ensemble.ORTHOGONAL:
            err = max(err, float(np.max(np.abs(g.imag))))
        return err


def _qr_haar(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[:, None, :]


def _symplectic_gram_schmidt(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Columns (p_j; q_j) orthonormalized together with their partners
    (-conj q_j; conj p_j); returns the 2k x 2k matrices."""
    n, k, _ = p.shape
    cols: list[np.ndarray] = []
    left, right = [], []
    for j in range(k):
        u = np.concatenate([p[:, :, j], q[:, :, j]], axis=1)
        for w in cols:
            u = u - np.sum(np.conj(w) * u, axis=1, keepdims=True) * w
        # second pass for round-off
        for w in cols:
            u = u - np.sum(np.conj(w) * u, axis=1, keepdims=True) * w
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        partner = np.concatenate([-np.conj(u[:, k:]), np.conj(u[:, :k])], axis=1)
        cols += [u, partner]
        left.append(u)
        right.append(partner)
    return np.stack(left + right, axis=2)


def haar_sample(ensemble: Ensemble | str, k: int, n: int, rng: np.random.Generator) -> HaarSample:
    ensemble = Ensemble(ensemble)
    if k < 1 or n < 1:
        raise ValueError("k and n must be positive")
    if ensemble is Ensemble.ORTHOGONAL:
        g = _qr_haar(rng.standard_normal((n, k, k))).astype(complex)
    elif ensemble is Ensemble.UNITARY:
        z = (rng.standard_normal((n, k, k)) + 1j * rng.standard_normal((n, k, k))) / math.sqrt(2)
        g = _qr_haar(z)
    else:
        shape = (n, k, k)
        p = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        q = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        g = _symplectic_gram_schmidt(p, q)
    out = HaarSample(ensemble, k, g)
    err = out.defect()
    if not err <= UNITARITY_TOL:
        raise ArithmeticError(f"Haar sample defect {err:.2e} exceeds {UNITARITY_TOL}")
    return out


def embed_diagonal(ensemble: Ensemble, values: Sequence[float]) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if ensemble is Ensemble.SYMPLECTIC:
        v = np.concatenate([v, v])
    return v


def trace_factor(ensemble: Ensemble) -> float:
    # quaternionic trace is half the trace over the 2k complex representation
    return 0.5 if ensemble is Ensemble.SYMPLECTIC else 1.0


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass
class MCEstimate:
    mean: complex
    std_error: float
    samples: int
    seed: int
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mean": [self.mean.real, self.mean.imag],
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            **({"details": self.details} if self.details else {}),
        }


@dataclass
class _Moments:
    """Running mean and sum of squared deviations of complex samples
    (Chan et al. pairwise merge)."""

    n: int = 0
    mean: complex = 0j
    m2: float = 0.0

    def merge(self, values: np.ndarray) -> None:
        nb = values.size
        if nb == 0:
            return
        mb = complex(values.mean())
        m2b = float(np.sum(np.abs(values - mb) ** 2))
        n = self.n + nb
        delta = mb - self.mean
        self.mean += delta * nb / n
        self.m2 += m2b + abs(delta) ** 2 * self.n * nb / n
        self.n = n

    def std_error(self) -> float:
        if self.n < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.n - 1) / self.n)


def _batches(samples: int, seed: int, batch: int):
    n_batches = -(-samples // batch)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    for i, child in enumerate(children):
        yield min(batch, samples - i * batch), np.random.default_rng(child)


def _phase_batch(ensemble: Ensemble, g: np.ndarray, lam: np.ndarray, X: np.ndarray) -> np.ndarray:
    """exp(i c tr(Lam g X g^dagger)) per sample, X a full (d, d) matrix."""
    gxg = g @ X @ np.conj(np.swapaxes(g, -1, -2))
    tr = np.einsum("a,naa->n", lam, gxg)
    return np.exp(1j * trace_factor(ensemble) * tr.real)


def _diag_phase_batch(ensemble: Ensemble, g: np.ndarray, lam: np.ndarray, x: np.ndarray) -> np.ndarray:
    w = np.abs(g) ** 2
    tr = np.einsum("a,nab,b->n", lam, w, x)
    return np.exp(1j * trace_factor(ensemble) * tr)


def _check_samples(samples: int) -> None:
    if samples < 1000:
        raise ValueError("need at least 1000 samples")


def mc_group_integral(
    ensemble: Ensemble | str,
    pt: SpectralPoint | tuple,
    samples: int,
    seed: int,
    batch: int = DEFAULT_BATCH,
) -> MCEstimate:
    """Mean of exp(i tr Lam g X g^-1) over Haar g, for diagonal X and Lam."""
    ensemble = Ensemble(ensemble)
    _check_samples(samples)
    x, lam = _float_point(pt)
    k = len(x)
    xe, le = embed_diagonal(ensemble, x), embed_diagonal(ensemble, lam)
    acc = _Moments()
    for n, rng in _batches(samples, seed, batch):
        g = haar_sample(ensemble, k, n, rng).matrix
        vals = _diag_phase_batch(ensemble, g, le, xe)
        if not np.all(np.isfinite(vals)):
            raise ArithmeticError("non-finite Monte Carlo values")
        acc.merge(vals)
    return MCEstimate(acc.mean, acc.std_error(), samples, seed)


def mc_matrix_integral(
    ensemble: Ensemble | str,
    lam: Sequence[float],
    X: np.ndarray,
    samples: int,
    seed: int,
    batch: int = DEFAULT_BATCH,
) -> MCEstimate:
    """Same mean with a general (self-adjoint, in the group's representation) X."""
    ensemble = Ensemble(ensemble)
    _check_samples(samples)
    le = embed_diagonal(ensemble, lam)
    X = np.asarray(X, dtype=complex)
    k = len(lam)
    acc = _Moments()
    for n, rng in _batches(samples, seed, batch):
        g = haar_sample(ensemble, k, n, rng).matrix
        acc.merge(_phase_batch(ensemble, g, le, X))
    return MCEstimate(acc.mean, acc.std_error(), samples, seed)


def mc_ratio(
    ensemble: Ensemble | str,
    pt1: SpectralPoint | tuple,
    pt2: SpectralPoint | tuple,
    samples: int,
    seed: int,
    batch: int = DEFAULT_BATCH,
) -> MCEstimate:
    """I(pt1)/I(pt2) from common Haar samples; the error is the delta-method
    standard error of the ratio."""
    ensemble = Ensemble(ensemble)
    _check_samples(samples)
    x1, l1 = _float_point(pt1)
    x2, l2 = _float_point(pt2)
    k = len(x1)
    e = [embed_diagonal(ensemble, v) for v in (x1, l1, x2, l2)]
    sa = sb = 0j
    saa = sbb = 0.0
    sab = 0j
    for n, rng in _batches(samples, seed, batch):
        g = haar_sample(ensemble, k, n, rng).matrix
        a = _diag_phase_batch(ensemble, g, e[1], e[0])
        b = _diag_phase_batch(ensemble, g, e[3], e[2])
        sa += a.sum()
        sb += b.sum()
        saa += float(np.sum(np.abs(a) ** 2))
        sbb += float(np.sum(np.abs(b) ** 2))
        sab += complex(np.sum(a * np.conj(b)))
    N = samples
    A, B = sa / N, sb / N
    R = A / B
    # E|a - R b|^2, whose mean is zero by construction
    var = (saa + abs(R) ** 2 * sbb - 2 * (R.conjugate() * sab).real) / N
    var = max(var, 0.0) * N / (N - 1)
    se = math.sqrt(var / N) / abs(B)
    return MCEstimate(R, se, samples, seed, {"numerator": [A.real, A.imag], "denominator": [B.real, B.imag]})


# --------------------------------------------------------------------------
# closed forms and reconstruction


def _float_point(pt) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pt, SpectralPoint):
        x, lam = pt.x, pt.lam
    else:
        x, lam = pt
    x = np.array([float(v) for v in x])
    lam = np.array([float(v) for v in lam])
    if len(x) != len(lam):
        raise ValueError("x and lambda lengths differ")
    for v, name in ((x, "x"), (lam, "lambda")):
        if len(set(v.tolist())) != len(v):
            raise CoincidentEigenvalues(f"{name} values must be pairwise distinct")
    return x, lam


def vandermonde(v: Sequence[float]) -> float:
    return math.prod(v[a] - v[b] for a, b in itertools.combinations(range(len(v)), 2))


def unitary_normalization(k: int) -> complex:
    """c_k = prod_{p<k} p! * i^(-k(k-1)/2)."""
    return math.prod(math.factorial(p) for p in range(1, k)) * (1j) ** (-(k * (k - 1) // 2) % 4)


def hciz_unitary_det(pt) -> complex:
    x, lam = _float_point(pt)
    k = len(x)
    M = np.exp(1j * np.outer(x, lam))
    return complex(unitary_normalization(k) * np.linalg.det(M) / (vandermonde(x) * vandermonde(lam)))


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def series_eval_float(series: ChiSeries, x: np.ndarray, lam: np.ndarray, y=None) -> complex:
    k = series.k
    inv = [1.0 / ((lam[a - 1] - lam[b - 1]) * (x[a - 1] - x[b - 1])) for a, b in edges(k)]
    total = 0j
    for m, c in series.terms.items():
        val = float(ypoly_eval(c, y)) if y is not None else float(c.coeff(0))
        for e, n in enumerate(m):
            if n:
                val *= inv[e] ** n
        total += (1j) ** (sum(m) % 4) * val
    return total


def reconstruct_full_integral(
    series: ChiSeries, y, pt, weight: str = "auto"
) -> complex:
    """sum_sigma w(sigma) exp(i sum lam_sigma(a) x_a) chi(x, lam_sigma)
    / (Delta(x) Delta(lam))^(beta/2), without absolute normalization.

    ``weight``: "auto" uses sign(sigma)^(beta/2 mod 2); "sign" or "one"
    force a choice.
    """
    y = to_rational(y)
    beta = _beta_of(y)
    x, lam = _float_point(pt)
    k = len(x)
    if series.k != k:
        raise ValueError("series and point have different k")
    half = beta / 2
    if weight == "auto":
        use_sign = int(half) % 2 == 1
    elif weight in ("sign", "one"):
        use_sign = weight == "sign"
    else:
        raise ValueError(f"unknown weight {weight!r}")
    total = 0j
    for perm in itertools.permutations(range(k)):
        lp = lam[list(perm)]
        w = _perm_sign(perm) if use_sign else 1
        total += w * cmath.exp(1j * float(np.dot(lp, x))) * series_eval_float(series, x, lp, y)
    return total / (vandermonde(x) * vandermonde(lam)) ** half


def _beta_of(y: Fraction) -> int:
    # even beta only: y = beta(beta/2 - 1)
    for beta in range(2, 40, 2):
        if Fraction(beta * (beta - 2), 2) == y:
            return beta
    raise ValueError(f"y={y} does not correspond to an even beta")


def coincident_limit(series: ChiSeries, y, x0: float, lam: Sequence[float], x_other=(), eps=(1e-1, 1e-2, 1e-3)):
    """Reconstruction along x = (x0, x0 + eps, *x_other); returns the values."""
    return [reconstruct_full_integral(series, y, ((x0, x0 + e, *x_other), tuple(lam))) for e in eps]


def reconstruction_ratio_check(
    series: ChiSeries,
    y,
    pt1,
    pt2,
    samples: int,
    seed: int,
    weight: str = "auto",
    ensemble: Ensemble | str | None = None,
) -> VerificationReport:
    y = to_rational(y)
    ens = Ensemble(ensemble) if ensemble else Ensemble.from_beta(_beta_of(y))
    pred = reconstruct_full_integral(series, y, pt1, weight) / reconstruct_full_integral(series, y, pt2, weight)
    est = mc_ratio(ens, pt1, pt2, samples, seed)
    dist = abs(pred - est.mean) / est.std_error if est.std_error > 0 else (0.0 if pred == est.mean else math.inf)
    return VerificationReport(
        name=f"reconstruction ratio k={series.k} y={y} weight={weight}",
        passed=dist < 4,
        residual=abs(pred - est.mean),
        tolerance=4 * est.std_error,
        seed=seed,
        inputs={"pt1": _pt_json(pt1), "pt2": _pt_json(pt2), "samples": samples},
        details={"predicted": pred, "mc": est.mean, "std_error": est.std_error, "sigma_distance": dist},
    )


def calibrate_beta4_weight(series: ChiSeries, pt1, pt2, samples: int, seed: int) -> dict[str, VerificationReport]:
    """Run the k=2 ratio test under both permutation weights."""
    return {w: reconstruction_ratio_check(series, 4, pt1, pt2, samples, seed, weight=w) for w in ("one", "sign")}


def determinant_check(k: int, pt, samples: int, seed: int) -> VerificationReport:
    est = mc_group_integral(Ensemble.UNITARY, pt, samples, seed)
    exact = hciz_unitary_det(pt)
    dist = abs(est.mean - exact) / est.std_error if est.std_error > 0 else (0.0 if est.mean == exact else math.inf)
    return VerificationReport(
        name=f"unitary determinant k={k}",
        passed=dist < 4,
        residual=abs(est.mean - exact),
        tolerance=4 * est.std_error,
        seed=seed,
        inputs={"pt": _pt_json(pt), "samples": samples},
        details={"mc": est.mean, "exact": exact, "std_error": est.std_error, "sigma_distance": dist},
    )


def _pt_json(pt):
    x, lam = _float_point(pt)
    return {"x": x.tolist(), "lambda": lam.tolist()}


def pde_residual_numeric(series: ChiSeries, y, pt) -> complex:
    """Float mirror of the exact operator
    sum d_a^2 + 2i sum lam_a d_a - y sum (x_a - x_b)^-2 applied to chi."""
    x, lam = _float_point(pt)
    yv = float(to_rational(y))
    k = series.k
    E = edges(k)
    dx = [x[a - 1] - x[b - 1] for a, b in E]
    inv = [1.0 / ((lam[a - 1] - lam[b - 1]) * d) for (a, b), d in zip(E, dx)]
    potential = sum(1.0 / d**2 for d in dx)
    total = 0j
    for m, c in series.terms.items():
        M = float(ypoly_eval(c, y))
        for e, n in enumerate(m):
            if n:
                M *= inv[e] ** n
        g = [0.0] * k
        h = [0.0] * k
        for (a, b), n, d in zip(E, m, dx):
            if n:
                g[a - 1] -= n / d
                g[b - 1] += n / d
                h[a - 1] += n / d**2
                h[b - 1] += n / d**2
        phase = (1j) ** (sum(m) % 4)
        lap = sum(ga * ga + ha for ga, ha in zip(g, h)) - yv * potential
        first = sum(la * ga for la, ga in zip(lam, g))
        total += phase * M * (lap + 2j * first)
    return total

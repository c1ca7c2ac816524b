"""Weight spectra of causal codes by exhaustive enumeration, and certification.

For a decoding instant ``t`` and delay ``d``, ``C_{t,d}`` holds the codewords
of the ``t``-step code that vanish before block ``t-d+1`` and are nonzero in
that block.  With the prefix zero, only the parity rows and columns of blocks
``t-d+1 .. t`` constrain the word, so each delay is enumerated from the null
space of that ``nbar*d x n*d`` corner of the leading minor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bitlinalg import _null_vectors, _rref, rank
from .channel import derive_seed
from .code import CodeParams, principal_minor, sample_tz

__all__ = [
    "BudgetExceeded",
    "WeightSpectrum",
    "AnytimeCertificate",
    "MAX_ENUMERATION_BITS",
    "enumerate_spectrum",
    "certify",
    "smallest_passing_d_o",
    "union_bound_error",
    "ensemble_fraction",
]

MAX_ENUMERATION_BITS = 24


class BudgetExceeded(ValueError):
    """The requested enumeration needs more than ``2**MAX_ENUMERATION_BITS`` words."""


@dataclass(frozen=True)
class WeightSpectrum:
    """``counts[d][w]`` is the number of weight-``w`` words in ``C_{t,d}``."""

    n: int
    k: int
    counts: dict[int, dict[int, int]]

    @property
    def d_max(self) -> int:
        return max(self.counts) if self.counts else 0

    def w_min(self, d: int) -> int | None:
        c = self.counts[d]
        return min(c) if c else None

    def total(self, d: int) -> int:
        return sum(self.counts[d].values())

    def rows(self) -> list[tuple[int, int, int]]:
        """``(d, w, N_w)`` rows sorted by delay then weight."""
        return [(d, w, self.counts[d][w]) for d in sorted(self.counts) for w in sorted(self.counts[d])]


def _words_in_span(vectors: list[int], nbits: int) -> np.ndarray:
    """Every XOR combination of ``vectors`` as rows of little-endian uint64 words."""
    nwords = max(1, (nbits + 63) // 64)
    basis = np.array(
        [[(v >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(nwords)] for v in vectors],
        dtype=np.uint64,
    ).reshape(len(vectors), nwords)
    words = np.zeros((1, nwords), dtype=np.uint64)
    for v in basis:
        words = np.concatenate([words, words ^ v])
    return words


def _delay_counts(minor_rows: tuple[int, ...], n: int, nbar: int, t: int, d: int) -> dict[int, int]:
    shift = n * (t - d)
    sub = [r >> shift for r in minor_rows[nbar * (t - d) :]]
    nbits = n * d
    red, pivots = _rref(sub, nbits)
    vecs = _null_vectors(red, pivots, nbits)
    if len(vecs) > MAX_ENUMERATION_BITS:
        raise BudgetExceeded(f"delay {d} needs 2^{len(vecs)} words")
    words = _words_in_span(vecs, nbits)
    first_block = (1 << n) - 1
    nwords = words.shape[1]
    mask = np.array([(first_block >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(nwords)], dtype=np.uint64)
    keep = (words & mask).any(axis=1)
    weights = np.bitwise_count(words[keep]).sum(axis=1, dtype=np.int64)
    hist = np.bincount(weights)
    return {int(w): int(c) for w, c in enumerate(hist) if c}


def enumerate_spectrum(h, d_max: int, t: int | None = None) -> WeightSpectrum:
    """Exact ``w_min(d)`` and ``N_w(d)`` for ``d = 1 .. d_max`` at instant ``t``.

    ``h`` may be any finite-horizon block lower triangular parity check
    (Toeplitz or not); ``t`` defaults to ``d_max``.

    Raises
    ------
    BudgetExceeded
        If ``k * d_max`` exceeds :data:`MAX_ENUMERATION_BITS`, or a delay's
        null space is larger than that.
    """
    p = h.params
    if t is None:
        t = d_max
    if d_max < 1 or t < d_max:
        raise ValueError(f"need 1 <= d_max <= t, got d_max={d_max}, t={t}")
    if p.k * d_max > MAX_ENUMERATION_BITS:
        raise BudgetExceeded(f"k*d_max = {p.k * d_max} exceeds {MAX_ENUMERATION_BITS}")
    rows = principal_minor(h, t).rows
    counts = {d: _delay_counts(rows, p.n, p.nbar, t, d) for d in range(1, d_max + 1)}
    return WeightSpectrum(p.n, p.k, counts)


@dataclass(frozen=True)
class AnytimeCertificate:
    alpha: float
    theta: float
    d_o: int
    d_max: int
    passed: bool
    violations: list[tuple[int, str]] = field(default_factory=list)
    full_rank: bool = True

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "theta": self.theta,
            "d_o": self.d_o,
            "d_max": self.d_max,
            "pass": self.passed,
            "full_rank": self.full_rank,
            "violations": [{"d": d, "reason": r} for d, r in self.violations],
        }


def certify(ws: WeightSpectrum, alpha: float, theta: float, d_o: int, h) -> AnytimeCertificate:
    """Check the ``(alpha, theta, d_o)`` anytime-distance conditions up to ``ws.d_max``.

    Passes iff every leading minor up to ``d_max`` has full rank and, for
    ``d_o <= d <= d_max``, ``w_min(d) >= alpha*n*d`` and ``N_w(d) <= 2**(theta*w)``.
    """
    d_max = ws.d_max
    if not 1 <= d_o <= d_max:
        raise ValueError(f"spectrum covers delays 1..{d_max}, cannot certify from d_o={d_o}")
    nbar = ws.n - ws.k
    full_rank = all(rank(principal_minor(h, t)) == nbar * t for t in range(1, d_max + 1))
    violations = []
    if not full_rank:
        violations.append((0, "rank-deficient leading minor"))
    for d in range(d_o, d_max + 1):
        wmin = ws.w_min(d)
        need = alpha * ws.n * d
        if wmin is not None and wmin < need - 1e-12:
            violations.append((d, f"w_min={wmin} < alpha*n*d={need:g}"))
        for w, count in sorted(ws.counts[d].items()):
            if count > 2.0 ** (theta * w):
                violations.append((d, f"N_{w}={count} > 2^(theta*{w})={2.0 ** (theta * w):g}"))
    return AnytimeCertificate(alpha, theta, d_o, d_max, not violations, violations, full_rank)


def smallest_passing_d_o(ws: WeightSpectrum, alpha: float, theta: float, h) -> int | None:
    for d_o in range(1, ws.d_max + 1):
        if certify(ws, alpha, theta, d_o, h).passed:
            return d_o
    return None


def union_bound_error(ws: WeightSpectrum, zeta: float, d: int) -> float:
    """``sum_w N_w(d) zeta**w``, the union bound on the delay-``d`` error probability."""
    if not 0.0 < zeta < 1.0:
        raise ValueError("zeta must lie in (0, 1)")
    return float(sum(count * zeta**w for w, count in ws.counts[d].items()))


def ensemble_fraction(
    params: CodeParams,
    p: float,
    alpha: float,
    theta: float,
    d_o: int,
    d_max: int,
    trials: int,
    seed: int,
) -> float:
    """Fraction of ``trials`` TZ_p codes whose certificate passes.

    Trial ``i`` uses the code seeded by ``derive_seed(seed, i)``, so results
    do not depend on evaluation order.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    params = CodeParams(params.n, params.k, d_max)
    passed = 0
    for i in range(trials):
        h = sample_tz(params, p, derive_seed(seed, i))
        ws = enumerate_spectrum(h, d_max, d_max)
        passed += certify(ws, alpha, theta, d_o, h).passed
    return passed / trials

"""Streaming maximum-likelihood decoding of causal linear codes over the BEC.

At instant ``t`` the decoder keeps a window of unresolved steps ``r+1 .. t``.
Everything at or before ``r`` is known, so only the parity rows of window
steps constrain the remaining erasures, and the known bits of every step fold
into a per-row syndrome.  The decoder then finds the longest prefix of the
window whose erasures are pinned down by ``H_e z_e = s``.

Two equivalent searches are provided.  ``"search"`` walks the split point
``d' = 0, 1, ...`` and tests whether ``[H_e11; H_e22^perp H_e21]`` has full
column rank.  ``"echelon"`` (the default) row reduces ``H_e`` once with the
columns ordered latest first; a prefix is determined exactly when none of its
columns is free, so the earliest free column marks the first unresolved step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .bitlinalg import BitMatrix, Inconsistent, _rref, left_null_basis, null_space_basis, pack_bits
from .channel import ERASED
from .code import MessageRecovery, ToeplitzParityCheck, derive_generator, principal_minor
from .spectrum import _words_in_span

__all__ = [
    "DecoderState",
    "StepResult",
    "TraceRow",
    "TRACE_COLUMNS",
    "OracleResult",
    "ml_oracle",
    "ComplexityStats",
    "complexity_stats",
    "ORACLE_MAX_BITS",
]

ORACLE_MAX_BITS = 24
TRACE_COLUMNS = ("t", "erasures_this_step", "resolved_through", "delay", "complexity")


class StepResult(NamedTuple):
    estimates: np.ndarray | None
    """Message blocks ``b_1 .. b_r`` (shape ``(r, k)``); ``None`` without a Toeplitz generator."""
    resolved_through: int
    delay: int
    complexity: int
    newly_resolved: range


class TraceRow(NamedTuple):
    t: int
    erasures_this_step: int
    resolved_through: int
    delay: int
    complexity: int


def _parity(x: int) -> int:
    return x.bit_count() & 1


class DecoderState:
    """Erasure bookkeeping for one received stream.

    Parameters
    ----------
    h
        Parity check, Toeplitz or any finite-horizon causal one.  Message
        estimates need a Toeplitz code (for the paired generator).
    method
        ``"echelon"`` or ``"search"``.
    generator
        Generator paired with ``h``, if the caller already derived it.
    """

    def __init__(self, h, method: str = "echelon", generator=None):
        if method not in ("echelon", "search"):
            raise ValueError(f"unknown method {method!r}")
        self.h = h
        self.method = method
        p = h.params
        self.n, self.nbar, self.horizon = p.n, p.nbar, p.horizon
        self.t = 0
        self.r = 0
        self.known = np.zeros((self.horizon, self.n), dtype=np.int64)
        self._unknown = [0] * (self.horizon + 1)  # 1-based bit masks of unknown positions
        self._syn: dict[int, int] = {}
        self.erasures: set[int] = set()
        self.trace: list[TraceRow] = []
        self._toeplitz = isinstance(h, ToeplitzParityCheck)
        self._block_cache: dict[tuple[int, int], tuple[int, ...]] = {}
        if self._toeplitz:
            self._hstack = h.stack
            self._recovery = MessageRecovery(generator if generator is not None else derive_generator(h))
        else:
            self._recovery = None

    # -- helpers ------------------------------------------------------------------------

    def _block_rows(self, i: int, j: int) -> tuple[int, ...]:
        if self._toeplitz:
            return self.h.blocks[i - j].rows
        key = (i, j)
        if key not in self._block_cache:
            self._block_cache[key] = self.h.block(i, j).rows
        return self._block_cache[key]

    def _new_syndrome(self, t: int) -> int:
        if self._toeplitz:
            s = np.einsum("ajk,ak->j", self._hstack[:t], self.known[t - 1 :: -1]) & 1
            return pack_bits(s)
        s = 0
        for j in range(1, t + 1):
            x = pack_bits(self.known[j - 1])
            for rho, row in enumerate(self._block_rows(t, j)):
                s ^= _parity(row & x) << rho
        return s

    def _system(self, cols: Sequence[tuple[int, int]]):
        """Rows of ``H_e`` over ``cols`` (``(step, bit)`` pairs), with their syndromes and steps."""
        by_step: dict[int, list[tuple[int, int]]] = {}
        for c, (j, b) in enumerate(cols):
            by_step.setdefault(j, []).append((b, c))
        rows, rhs, row_steps = [], [], []
        for i in range(self.r + 1, self.t + 1):
            blocks = [(self._block_rows(i, j), by_step[j]) for j in by_step if j <= i]
            s = self._syn[i]
            for rho in range(self.nbar):
                row = 0
                for brows, bc in blocks:
                    hr = brows[rho]
                    for b, c in bc:
                        if hr >> b & 1:
                            row |= 1 << c
                rows.append(row)
                rhs.append(s >> rho & 1)
                row_steps.append(i)
        return rows, rhs, row_steps

    def _unknown_cols(self, lo: int, hi: int) -> list[tuple[int, int]]:
        """Unknown ``(step, bit)`` pairs of steps ``lo .. hi`` in time order."""
        out = []
        for j in range(lo, hi + 1):
            m = self._unknown[j]
            out.extend((j, b) for b in range(self.n) if m >> b & 1)
        return out

    def _echelon(self) -> tuple[int, dict[tuple[int, int], int]]:
        cols = self._unknown_cols(self.r + 1, self.t)[::-1]
        ncols = len(cols)
        rows, rhs, _ = self._system(cols)
        aug = [row | (s << ncols) for row, s in zip(rows, rhs)]
        red, pivots = _rref(aug, ncols)
        if any(row >> ncols for row in red[len(pivots) :]):
            raise Inconsistent("received symbols are not a codeword prefix")
        free = sorted(set(range(ncols)) - set(pivots))
        tau = cols[free[-1]][0] - 1 if free else self.t
        values = {}
        for row, p in zip(red, pivots):
            if cols[p][0] <= tau:
                values[cols[p]] = row >> ncols & 1
        return tau, values

    def _search(self) -> tuple[int, dict[tuple[int, int], int]]:
        t, r = self.t, self.r
        for dp in range(0, t - r):
            split = t - dp
            z1 = self._unknown_cols(r + 1, split)
            z2 = self._unknown_cols(split + 1, t)
            rows, rhs, row_steps = self._system(z1 + z2)
            n1 = len(z1)
            top = [(row, s) for row, s, i in zip(rows, rhs, row_steps) if i <= split]
            low = [(row, s) for row, s, i in zip(rows, rhs, row_steps) if i > split]
            mask1 = (1 << n1) - 1
            if any(row >> n1 for row, _ in top):
                raise AssertionError("causality violated: early rows touch late erasures")
            h22 = BitMatrix(tuple(row >> n1 for row, _ in low), len(z2))
            perp = left_null_basis(h22)
            stacked = [row | (s << n1) for row, s in top]
            for v in perp.rows:
                acc = 0
                for idx, (row, s) in enumerate(low):
                    if v >> idx & 1:
                        acc ^= (row & mask1) | (s << n1)
                stacked.append(acc)
            red, pivots = _rref(stacked, n1)
            if any(row >> n1 for row in red[len(pivots) :]):
                raise Inconsistent("received symbols are not a codeword prefix")
            if len(pivots) == n1:
                return split, {z1[p]: row >> n1 & 1 for row, p in zip(red, pivots)}
        return r, {}

    # -- public -------------------------------------------------------------------------

    def step(self, z_t) -> StepResult:
        """Take channel output block ``z_t`` (``ERASED`` marks erasures) and decode.

        Raises
        ------
        Inconsistent
            If the received symbols cannot come from any codeword.
        """
        z = np.asarray(z_t, dtype=np.int64).ravel()
        if z.size != self.n:
            raise ValueError(f"expected {self.n} symbols, got {z.size}")
        if self.t >= self.horizon:
            raise ValueError(f"decoder horizon {self.horizon} exhausted")
        self.t += 1
        t = self.t
        erased = z == ERASED
        self.known[t - 1] = np.where(erased, 0, z)
        self._unknown[t] = pack_bits(erased)
        base = (t - 1) * self.n
        self.erasures.update(base + int(b) for b in np.flatnonzero(erased))
        self._syn[t] = self._new_syndrome(t)

        r_prev = self.r
        if not any(self._unknown[j] for j in range(r_prev + 1, t + 1)):
            if self._syn[t]:
                raise Inconsistent(f"parity check of step {t} fails with no erasures")
            tau, values, complexity = t, {}, 0
        else:
            tau, values = self._echelon() if self.method == "echelon" else self._search()
            complexity = t - r_prev
        self._apply(tau, values)
        self.trace.append(TraceRow(t, int(erased.sum()), self.r, t - self.r, complexity))
        estimates = self._recovery.messages[: self.r] if self._recovery is not None else None
        return StepResult(estimates, self.r, t - self.r, complexity, range(r_prev + 1, self.r + 1))

    def _apply(self, tau: int, values: dict[tuple[int, int], int]) -> None:
        solved: dict[int, int] = {}
        for (j, b), v in values.items():
            self.known[j - 1, b] = v
            self._unknown[j] &= ~(1 << b)
            if v:
                solved[j] = solved.get(j, 0) | (1 << b)
        for j in range(self.r + 1, tau + 1):
            if self._unknown[j]:
                raise AssertionError(f"step {j} marked resolved with unknown bits")
        # fold newly known bits into the syndromes of rows that stay in the window
        for j, v in solved.items():
            for i in range(max(j, tau + 1), self.t + 1):
                for rho, row in enumerate(self._block_rows(i, j)):
                    self._syn[i] ^= _parity(row & v) << rho
        for j in range(self.r + 1, tau + 1):
            del self._syn[j]
            if self._recovery is not None:
                self._recovery.push(self.known[j - 1])
        self.r = max(self.r, tau)

    @property
    def delay(self) -> int:
        return self.t - self.r

    @property
    def messages(self) -> np.ndarray | None:
        return self._recovery.messages[: self.r] if self._recovery is not None else None

    def codeword(self) -> np.ndarray:
        """Resolved codeword blocks ``c_1 .. c_r``."""
        return self.known[: self.r].astype(np.uint8)

    def unknown_positions(self) -> list[int]:
        """Global indices of positions still unknown."""
        return [
            (j - 1) * self.n + b for j in range(self.r + 1, self.t + 1) for b in range(self.n) if self._unknown[j] >> b & 1
        ]


@dataclass(frozen=True)
class OracleResult:
    resolved: np.ndarray
    """``(t, n)`` bool: position agrees across every consistent codeword."""
    values: np.ndarray
    """``(t, n)`` uint8: the common value where resolved, 0 elsewhere."""
    candidates: int

    def resolved_prefix(self) -> int:
        """Largest ``tau`` with every position of steps ``<= tau`` resolved."""
        full = self.resolved.all(axis=1)
        return int(np.argmin(full)) if not full.all() else len(full)


def ml_oracle(h, z) -> OracleResult:
    """Brute-force ML over the BEC: intersect all codewords consistent with ``z``.

    ``z`` has shape ``(t, n)`` with ``ERASED`` marking erasures.
    """
    n = h.params.n
    z = np.asarray(z, dtype=np.int64).reshape(-1, n)
    t = z.shape[0]
    if n * t > ORACLE_MAX_BITS:
        raise ValueError(f"oracle limited to n*t <= {ORACLE_MAX_BITS}")
    basis = null_space_basis(principal_minor(h, t)).T.rows
    words = _words_in_span(list(basis), n * t)[:, 0]
    flat = z.ravel()
    known = np.uint64(pack_bits(flat != ERASED))
    vals = np.uint64(pack_bits(np.where(flat == ERASED, 0, flat)))
    kept = words[(words & known) == vals]
    if kept.size == 0:
        raise Inconsistent("no codeword matches the unerased symbols")
    all_and = np.bitwise_and.reduce(kept)
    all_or = np.bitwise_or.reduce(kept)
    agree = ~(all_and ^ all_or)
    bits = np.arange(n * t, dtype=np.uint64)
    resolved = ((agree >> bits) & np.uint64(1)).astype(bool).reshape(t, n)
    values = ((all_and >> bits) & np.uint64(1)).astype(np.uint8).reshape(t, n)
    return OracleResult(resolved, values, int(kept.size))


@dataclass(frozen=True)
class ComplexityStats:
    mean: float
    tail: dict[int, float]
    """``tail[d]``: fraction of steps with elimination dimension ``>= d`` (only nonzero entries)."""
    steps: int


def complexity_stats(log: Sequence[int]) -> ComplexityStats:
    arr = np.asarray(log, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("empty complexity log")
    top = int(arr.max())
    tail = {d: float(np.mean(arr >= d)) for d in range(1, top + 1)}
    return ComplexityStats(float(arr.mean()), tail, int(arr.size))

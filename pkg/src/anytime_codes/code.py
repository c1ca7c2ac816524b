"""Causal linear codes: Toeplitz parity-check sampling, generators, encoding.

A time-invariant causal code is fixed by its parity-check blocks
``H_1 .. H_T`` (each ``nbar x n``); the ``t``-step parity check is the block
lower triangular Toeplitz matrix whose ``(i, j)`` block is ``H_{i-j+1}``.
Blocks are indexed from 1 in docstrings and from 0 in Python sequences.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bitlinalg import BitMatrix, _rref, block_lower_toeplitz, null_space_basis, rank

__all__ = [
    "CodeParams",
    "ToeplitzParityCheck",
    "CausalParityCheck",
    "ToeplitzGenerator",
    "NotACodeword",
    "make_rng",
    "sample_tz",
    "sample_full_rank",
    "extend_horizon",
    "principal_minor",
    "derive_generator",
    "encode_step",
    "StreamEncoder",
    "MessageRecovery",
    "recover_messages",
    "save_code",
    "load_code",
    "code_to_dict",
    "code_from_dict",
]

MAX_H1_ATTEMPTS = 1000


class NotACodeword(ValueError):
    """A codeword block left a residual outside the column space of ``G_1``."""

    def __init__(self, block: int):
        super().__init__(f"codeword block {block} is inconsistent with the generator")
        self.block = block


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator used everywhere a seed enters the library."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    horizon: int = 1

    def __post_init__(self):
        if not 0 < self.k < self.n:
            raise ValueError(f"need 0 < k < n, got n={self.n}, k={self.k}")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")

    @property
    def nbar(self) -> int:
        return self.n - self.k

    @property
    def rate(self) -> float:
        return self.k / self.n


def _blocks_to_stack(blocks: Sequence[BitMatrix]) -> np.ndarray:
    return np.stack([b.to_array() for b in blocks]).astype(np.int64)


@dataclass(frozen=True, eq=False)
class ToeplitzParityCheck:
    """Parity-check blocks ``H_1 .. H_T`` of a time-invariant causal code."""

    params: CodeParams
    blocks: tuple[BitMatrix, ...]

    def __post_init__(self):
        p = self.params
        if len(self.blocks) != p.horizon:
            raise ValueError(f"expected {p.horizon} blocks, got {len(self.blocks)}")
        for b in self.blocks:
            if b.shape != (p.nbar, p.n):
                raise ValueError(f"block shape {b.shape} != {(p.nbar, p.n)}")
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "stack", _blocks_to_stack(self.blocks))

    def __eq__(self, other):
        if not isinstance(other, ToeplitzParityCheck):
            return NotImplemented
        return self.params == other.params and self.blocks == other.blocks

    @property
    def horizon(self) -> int:
        return self.params.horizon

    def principal_minor(self, t: int) -> BitMatrix:
        return principal_minor(self, t)

    def block(self, i: int, j: int) -> BitMatrix:
        """Block ``(i, j)`` (1-based) of the infinite parity-check matrix."""
        if i < j:
            return BitMatrix.zeros(self.params.nbar, self.params.n)
        return self.blocks[i - j]

    def to_causal(self) -> "CausalParityCheck":
        return CausalParityCheck(self.params, principal_minor(self, self.horizon))


@dataclass(frozen=True, eq=False)
class CausalParityCheck:
    """Finite-horizon block lower triangular parity check with arbitrary blocks.

    ``matrix`` is the full ``nbar*T x n*T`` matrix; leading minors are its
    top-left corners.
    """

    params: CodeParams
    matrix: BitMatrix

    def __post_init__(self):
        p = self.params
        if self.matrix.shape != (p.nbar * p.horizon, p.n * p.horizon):
            raise ValueError("matrix shape does not match params")

    def __eq__(self, other):
        if not isinstance(other, CausalParityCheck):
            return NotImplemented
        return self.params == other.params and self.matrix == other.matrix

    @property
    def horizon(self) -> int:
        return self.params.horizon

    def block(self, i: int, j: int) -> BitMatrix:
        p = self.params
        rows = range((i - 1) * p.nbar, i * p.nbar)
        cols = range((j - 1) * p.n, j * p.n)
        return self.matrix.submatrix(rows, cols)

    def principal_minor(self, t: int) -> BitMatrix:
        return principal_minor(self, t)


def sample_full_rank(rng: np.random.Generator, nrows: int, ncols: int, p: float) -> BitMatrix:
    """Draw Bernoulli(p) matrices until one has full row rank."""
    for _ in range(MAX_H1_ATTEMPTS):
        cand = BitMatrix.random(nrows, ncols, rng, p)
        if rank(cand) == nrows:
            return cand
    raise RuntimeError(f"no full-rank {nrows}x{ncols} block after {MAX_H1_ATTEMPTS} draws at p={p}")


def sample_tz(params: CodeParams, p: float, seed: int) -> ToeplitzParityCheck:
    """Draw a code from the TZ_p ensemble.

    ``H_1`` is resampled until it has full row rank; ``H_2 .. H_T`` have
    i.i.d. Bernoulli(p) entries.  The result is a deterministic function of
    ``(params, p, seed)``.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    rng = make_rng(seed)
    h1 = sample_full_rank(rng, params.nbar, params.n, p)
    rest = [BitMatrix.random(params.nbar, params.n, rng, p) for _ in range(params.horizon - 1)]
    return ToeplitzParityCheck(params, (h1, *rest))


def extend_horizon(h: CausalParityCheck | None, seed: int, params: CodeParams | None = None) -> CausalParityCheck:
    """One step of the finite-horizon induction construction.

    A new first block column is prepended: a full-rank ``H_11`` and
    Bernoulli(1/2) blocks ``H_21 .. H_T1``; the old ``(T-1)``-step matrix sits
    in the lower right corner.  Pass ``h=None`` with ``params`` for the
    one-step base case.  The result is generally not Toeplitz.
    """
    if h is None:
        if params is None:
            raise ValueError("params are required to start the construction")
        base = dataclasses.replace(params, horizon=1)
        old_rows: tuple[int, ...] = ()
    else:
        base = dataclasses.replace(h.params, horizon=h.horizon + 1)
        old_rows = h.matrix.rows
    n, nbar, T = base.n, base.nbar, base.horizon
    rng = make_rng(seed)
    h11 = sample_full_rank(rng, nbar, n, 0.5)
    first_col = [h11] + [BitMatrix.random(nbar, n, rng, 0.5) for _ in range(T - 1)]
    rows = list(h11.rows)
    for i in range(1, T):
        for r, old in zip(first_col[i].rows, old_rows[(i - 1) * nbar : i * nbar]):
            rows.append(r | (old << n))
    return CausalParityCheck(base, BitMatrix(tuple(rows), n * T))


def principal_minor(h, t: int) -> BitMatrix:
    """The ``nbar*t x n*t`` leading principal minor of a parity check."""
    if not 1 <= t <= h.horizon:
        raise ValueError(f"t={t} outside 1..{h.horizon}")
    if isinstance(h, ToeplitzParityCheck):
        return block_lower_toeplitz(h.blocks, t)
    p = h.params
    mask = (1 << (p.n * t)) - 1
    return BitMatrix(tuple(r & mask for r in h.matrix.rows[: p.nbar * t]), p.n * t)


# -- generator -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ToeplitzGenerator:
    """Generator blocks ``G_1 .. G_T`` (each ``n x k``) paired with a Toeplitz parity check."""

    params: CodeParams
    blocks: tuple[BitMatrix, ...]

    def __post_init__(self):
        p = self.params
        if len(self.blocks) != p.horizon:
            raise ValueError(f"expected {p.horizon} blocks, got {len(self.blocks)}")
        for b in self.blocks:
            if b.shape != (p.n, p.k):
                raise ValueError(f"block shape {b.shape} != {(p.n, p.k)}")
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "stack", _blocks_to_stack(self.blocks))
        object.__setattr__(self, "_left_inverse", _left_inverse(self.blocks[0]))

    def __eq__(self, other):
        if not isinstance(other, ToeplitzGenerator):
            return NotImplemented
        return self.params == other.params and self.blocks == other.blocks

    @property
    def horizon(self) -> int:
        return self.params.horizon

    def principal_minor(self, t: int) -> BitMatrix:
        return block_lower_toeplitz(self.blocks, t)


def _particular_solver(h1: BitMatrix) -> np.ndarray:
    """Matrix ``M`` (n x nbar) with ``H_1 (M s)`` = s and free variables zero."""
    nbar, n = h1.shape
    aug = [r | (1 << (n + i)) for i, r in enumerate(h1.rows)]
    red, pivots = _rref(aug, n)
    if len(pivots) != nbar:
        raise ValueError("H_1 must have full row rank")
    m = np.zeros((n, nbar), dtype=np.int64)
    for row, p in zip(red, pivots):
        for i in range(nbar):
            m[p, i] = (row >> (n + i)) & 1
    return m


def _left_inverse(g1: BitMatrix) -> np.ndarray:
    """Matrix ``E`` (n x n) with ``E G_1 = [I_k; 0]``.

    The first ``k`` rows of ``E`` invert ``G_1`` on its column space; the
    remaining rows vanish exactly on that column space.
    """
    n, k = g1.shape
    aug = [r | (1 << (k + i)) for i, r in enumerate(g1.rows)]
    red, pivots = _rref(aug, k)
    if len(pivots) != k:
        raise ValueError("G_1 must have full column rank")
    e = np.zeros((n, n), dtype=np.int64)
    for i, row in enumerate(red):
        for j in range(n):
            e[i, j] = (row >> (k + j)) & 1
    return e


def derive_generator(h: ToeplitzParityCheck) -> ToeplitzGenerator:
    """Toeplitz generator paired with ``h``.

    ``G_1`` spans ``null(H_1)``; each later block is the free-variables-zero
    solution of ``H_1 G_tau = sum_{j=2..tau} H_j G_{tau-j+1}``, which makes
    every leading minor of ``H`` annihilate the matching minor of ``G``.
    """
    p = h.params
    solver = _particular_solver(h.blocks[0])
    g1 = null_space_basis(h.blocks[0])
    if g1.ncols != p.k:
        raise ValueError("H_1 must have full row rank")
    hs = h.stack
    gs = np.zeros((p.horizon, p.n, p.k), dtype=np.int64)
    gs[0] = g1.to_array()
    for tau in range(2, p.horizon + 1):
        # sum_{a=2..tau} H_a G_{tau+1-a}
        rhs = np.einsum("aij,ajk->ik", hs[1:tau], gs[tau - 2 :: -1]) & 1
        gs[tau - 1] = (solver @ rhs) & 1
    blocks = (g1,) + tuple(BitMatrix.from_array(gs[i]) for i in range(1, p.horizon))
    return ToeplitzGenerator(p, blocks)


def _as_message_array(messages, k: int) -> np.ndarray:
    arr = np.asarray(messages, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, k)
    if arr.ndim != 2 or arr.shape[1] != k:
        raise ValueError(f"messages must be k={k} bit blocks")
    return arr


def encode_step(g: ToeplitzGenerator, messages) -> np.ndarray:
    """Channel block ``c_tau = sum_j G_{tau-j+1} b_j`` for ``tau = len(messages)``."""
    b = _as_message_array(messages, g.params.k)
    tau = b.shape[0]
    if not 1 <= tau <= g.horizon:
        raise ValueError(f"step {tau} outside horizon {g.horizon}")
    c = np.einsum("ink,ik->n", g.stack[:tau], b[::-1])
    return (c & 1).astype(np.uint8)


class StreamEncoder:
    """Streaming encoder: push one message block per step, get one channel block."""

    def __init__(self, g: ToeplitzGenerator):
        self.g = g
        self.history = np.zeros((g.horizon, g.params.k), dtype=np.int64)
        self.t = 0

    def push(self, b) -> np.ndarray:
        if self.t >= self.g.horizon:
            raise ValueError(f"encoder horizon {self.g.horizon} exhausted")
        self.history[self.t] = np.asarray(b, dtype=np.int64)
        self.t += 1
        c = np.einsum("ink,ik->n", self.g.stack[: self.t], self.history[self.t - 1 :: -1])
        return (c & 1).astype(np.uint8)


class MessageRecovery:
    """Recover message blocks from consecutive codeword blocks."""

    def __init__(self, g: ToeplitzGenerator):
        self.g = g
        self.messages = np.zeros((g.horizon, g.params.k), dtype=np.int64)
        self.t = 0

    def push(self, c) -> np.ndarray:
        g, k = self.g, self.g.params.k
        tau = self.t + 1
        if tau > g.horizon:
            raise ValueError(f"step {tau} outside horizon {g.horizon}")
        residual = np.asarray(c, dtype=np.int64).copy()
        if tau > 1:
            # sum_{j<tau} G_{tau-j+1} b_j
            residual += np.einsum("ink,ik->n", g.stack[1:tau], self.messages[tau - 2 :: -1])
        y = (g._left_inverse @ (residual & 1)) & 1
        if y[k:].any():
            raise NotACodeword(tau)
        self.messages[tau - 1] = y[:k]
        self.t = tau
        return y[:k].astype(np.uint8)


def recover_messages(g: ToeplitzGenerator, codeword_blocks) -> np.ndarray:
    """Message blocks ``b_1 .. b_t`` (shape ``(t, k)``) of a codeword.

    Raises
    ------
    NotACodeword
        At the first block whose residual is outside the column space of ``G_1``.
    """
    c = np.asarray(codeword_blocks, dtype=np.uint8).reshape(-1, g.params.n)
    rec = MessageRecovery(g)
    return np.array([rec.push(block) for block in c], dtype=np.uint8).reshape(-1, g.params.k)


# -- code files ----------------------------------------------------------------------------


def code_to_dict(h: ToeplitzParityCheck, p: float, seed: int) -> dict:
    pr = h.params
    return {
        "n": pr.n,
        "k": pr.k,
        "p": p,
        "T": pr.horizon,
        "seed": int(seed),
        "H": [b.to_hex_rows() for b in h.blocks],
    }


def code_from_dict(data: dict) -> tuple[ToeplitzParityCheck, dict]:
    params = CodeParams(int(data["n"]), int(data["k"]), int(data["T"]))
    blocks = tuple(BitMatrix.from_hex_rows(rows, params.n) for rows in data["H"])
    meta = {"p": data.get("p"), "seed": data.get("seed")}
    return ToeplitzParityCheck(params, blocks), meta


def save_code(path, h: ToeplitzParityCheck, p: float, seed: int) -> None:
    text = json.dumps(code_to_dict(h, p, seed), indent=1) + "\n"
    Path(path).write_text(text)


def load_code(path) -> tuple[ToeplitzParityCheck, dict]:
    """Read a code file; the stored seed is informational only."""
    return code_from_dict(json.loads(Path(path).read_text()))

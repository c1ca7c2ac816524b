"""Dense GF(2) linear algebra.

Matrices are stored row-major with every row packed into a Python integer:
entry ``(i, j)`` is bit ``j`` (LSB first) of ``rows[i]``.  This is the same
bit order as packing each row into little-endian 64-bit words, which is what
:attr:`BitMatrix.words` exposes, and it makes a row XOR a single big-int
operation during elimination.

Vectors at the public surface are numpy ``uint8`` arrays of zeros and ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BitMatrix",
    "Inconsistent",
    "SolutionSet",
    "rank",
    "row_reduce",
    "solve",
    "null_space_basis",
    "left_null_basis",
    "pack_bits",
    "unpack_bits",
]


class Inconsistent(ValueError):
    """Raised when a linear system over GF(2) has no solution."""


def pack_bits(vec) -> int:
    """Pack a 0/1 vector into an int, element ``j`` at bit ``j``."""
    arr = np.asarray(vec, dtype=np.uint8).ravel() & 1
    if arr.size == 0:
        return 0
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


def unpack_bits(value: int, length: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`."""
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    nbytes = (length + 7) // 8
    raw = np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length].copy()


def _rows_from_array(arr: np.ndarray) -> tuple[int, ...]:
    if arr.shape[1] == 0:
        return (0,) * arr.shape[0]
    packed = np.packbits(arr, axis=1, bitorder="little")
    return tuple(int.from_bytes(row.tobytes(), "little") for row in packed)


@dataclass(frozen=True, eq=True)
class BitMatrix:
    """Immutable dense binary matrix.

    Parameters
    ----------
    rows : tuple of int
        Packed rows; bit ``j`` of ``rows[i]`` is entry ``(i, j)``.
    ncols : int
        Number of columns.  Bits at positions ``>= ncols`` must be zero.
    """

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self):
        if self.ncols < 0:
            raise ValueError("ncols must be non-negative")
        rows = tuple(int(r) for r in self.rows)
        limit = 1 << self.ncols
        for r in rows:
            if r < 0 or r >= limit:
                raise ValueError("row has bits outside the column range")
        object.__setattr__(self, "rows", rows)

    # -- construction -------------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls((0,) * nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def from_array(cls, arr) -> "BitMatrix":
        a = np.asarray(arr, dtype=np.uint8)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(_rows_from_array(a & 1), a.shape[1])

    @classmethod
    def from_columns(cls, vectors: Sequence[int], nrows: int) -> "BitMatrix":
        """Build a matrix whose columns are the packed vectors given."""
        return cls(tuple(vectors), nrows).transpose()

    @classmethod
    def random(cls, nrows: int, ncols: int, rng: np.random.Generator, p: float = 0.5) -> "BitMatrix":
        return cls.from_array(rng.random((nrows, ncols)) < p)

    @classmethod
    def from_hex_rows(cls, hex_rows: Iterable[str], ncols: int) -> "BitMatrix":
        """Parse rows written by :meth:`to_hex_rows`."""
        ndigits = (ncols + 3) // 4
        rows = []
        for text in hex_rows:
            text = text.strip()
            if len(text) != ndigits:
                raise ValueError(f"hex row {text!r} should have {ndigits} digits")
            if ndigits == 0:
                rows.append(0)
                continue
            bits = bin(int(text, 16))[2:].zfill(4 * ndigits)
            if "1" in bits[ncols:]:
                raise ValueError(f"hex row {text!r} has nonzero padding bits")
            rows.append(int(bits[:ncols][::-1], 2) if ncols else 0)
        return cls(tuple(rows), ncols)

    # -- views ----------------------------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.ncols)

    @property
    def words(self) -> np.ndarray:
        """Rows packed into little-endian ``uint64`` words, shape ``(nrows, ceil(ncols/64))``."""
        nwords = (self.ncols + 63) // 64
        out = np.zeros((self.nrows, nwords), dtype=np.uint64)
        mask = (1 << 64) - 1
        for i, r in enumerate(self.rows):
            for w in range(nwords):
                out[i, w] = (r >> (64 * w)) & mask
        return out

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            out[i] = unpack_bits(r, self.ncols)
        return out

    def to_hex_rows(self) -> list[str]:
        """Hex text per row; column 0 is the most significant bit of the first digit."""
        ndigits = (self.ncols + 3) // 4
        out = []
        for r in self.rows:
            if ndigits == 0:
                out.append("")
                continue
            bits = bin(r)[2:].zfill(self.ncols)[::-1].ljust(4 * ndigits, "0")
            out.append(format(int(bits, 2), f"0{ndigits}x"))
        return out

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not 0 <= j < self.ncols:
            raise IndexError("column index out of range")
        return (self.rows[i] >> j) & 1

    def __repr__(self) -> str:
        body = "; ".join("".join(str(b) for b in unpack_bits(r, self.ncols)) for r in self.rows)
        return f"BitMatrix({self.nrows}x{self.ncols}: [{body}])"

    # -- algebra --------------------------------------------------------------

    def transpose(self) -> "BitMatrix":
        if self.nrows == 0 or self.ncols == 0:
            return BitMatrix.zeros(self.ncols, self.nrows)
        return BitMatrix.from_array(self.to_array().T)

    @property
    def T(self) -> "BitMatrix":
        return self.transpose()

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if not isinstance(other, BitMatrix):
            return NotImplemented
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        orows = other.rows
        out = []
        for r in self.rows:
            acc = 0
            while r:
                low = r & -r
                acc ^= orows[low.bit_length() - 1]
                r ^= low
            out.append(acc)
        return BitMatrix(tuple(out), other.ncols)

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return BitMatrix(tuple(a ^ b for a, b in zip(self.rows, other.rows)), self.ncols)

    def dot_packed(self, x: int) -> int:
        """Matrix-vector product with both vector and result packed into ints."""
        out = 0
        for i, r in enumerate(self.rows):
            if (r & x).bit_count() & 1:
                out |= 1 << i
        return out

    def dot(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint8)
        if x.shape != (self.ncols,):
            raise ValueError(f"vector length {x.shape} does not match {self.ncols} columns")
        return unpack_bits(self.dot_packed(pack_bits(x)), self.nrows)

    def submatrix(self, row_idx: Sequence[int] | None = None, col_idx: Sequence[int] | None = None) -> "BitMatrix":
        rows = self.rows if row_idx is None else tuple(self.rows[i] for i in row_idx)
        if col_idx is None:
            return BitMatrix(rows, self.ncols)
        out = []
        for r in rows:
            v = 0
            for new, old in enumerate(col_idx):
                if (r >> old) & 1:
                    v |= 1 << new
            out.append(v)
        return BitMatrix(tuple(out), len(col_idx))

    def is_zero(self) -> bool:
        return not any(self.rows)

    @staticmethod
    def vstack(mats: Sequence["BitMatrix"]) -> "BitMatrix":
        if not mats:
            raise ValueError("nothing to stack")
        ncols = mats[0].ncols
        if any(m.ncols != ncols for m in mats):
            raise ValueError("column counts differ")
        return BitMatrix(tuple(r for m in mats for r in m.rows), ncols)

    @staticmethod
    def hstack(mats: Sequence["BitMatrix"]) -> "BitMatrix":
        if not mats:
            raise ValueError("nothing to stack")
        nrows = mats[0].nrows
        if any(m.nrows != nrows for m in mats):
            raise ValueError("row counts differ")
        rows = [0] * nrows
        offset = 0
        for m in mats:
            for i, r in enumerate(m.rows):
                rows[i] |= r << offset
            offset += m.ncols
        return BitMatrix(tuple(rows), offset)


# -- elimination kernel ------------------------------------------------------


def _rref(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduce packed rows in place to RREF, searching pivots in columns < ncols."""
    pivots = []
    r = 0
    nrows = len(rows)
    for col in range(ncols):
        if r == nrows:
            break
        bit = 1 << col
        for i in range(r, nrows):
            if rows[i] & bit:
                break
        else:
            continue
        rows[r], rows[i] = rows[i], rows[r]
        prow = rows[r]
        for j in range(nrows):
            if j != r and rows[j] & bit:
                rows[j] ^= prow
        pivots.append(col)
        r += 1
    return rows, pivots


def _null_vectors(rref_rows: Sequence[int], pivots: Sequence[int], ncols: int) -> list[int]:
    pivot_set = set(pivots)
    out = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = 1 << f
        fbit = 1 << f
        for row, p in zip(rref_rows, pivots):
            if row & fbit:
                v |= 1 << p
        out.append(v)
    return out


def rank(m: BitMatrix) -> int:
    """Dimension of the row space of ``m`` over GF(2)."""
    _, pivots = _rref(list(m.rows), m.ncols)
    return len(pivots)


def row_reduce(m: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row echelon form and the (strictly increasing) pivot columns."""
    rows, pivots = _rref(list(m.rows), m.ncols)
    return BitMatrix(tuple(rows), m.ncols), pivots


def null_space_basis(a: BitMatrix) -> BitMatrix:
    """Basis of ``{x : a x = 0}``, one basis vector per column."""
    rows, pivots = _rref(list(a.rows), a.ncols)
    vecs = _null_vectors(rows, pivots, a.ncols)
    return BitMatrix.from_columns(vecs, a.ncols)


def left_null_basis(a: BitMatrix) -> BitMatrix:
    """Basis of ``{x : x a = 0}``, one basis vector per row.

    Row reduction of ``[a | I]``: rows whose ``a`` part vanishes carry the
    combination that annihilates ``a``.
    """
    m, c = a.nrows, a.ncols
    aug = [r | (1 << (c + i)) for i, r in enumerate(a.rows)]
    rows, pivots = _rref(aug, c)
    out = tuple(row >> c for row in rows[len(pivots):])
    return BitMatrix(out, m)


@dataclass(frozen=True)
class SolutionSet:
    """All solutions of ``a x = s``: ``particular + span(columns of null_basis)``."""

    particular: np.ndarray
    null_basis: BitMatrix

    @property
    def unique(self) -> bool:
        return self.null_basis.ncols == 0

    def members(self) -> set[tuple[int, ...]]:
        """Enumerate every solution; only sensible for small null spaces."""
        base = pack_bits(self.particular)
        vecs = list(self.null_basis.transpose().rows)
        n = len(self.particular)
        out = set()
        for mask in range(1 << len(vecs)):
            v = base
            for i, nv in enumerate(vecs):
                if (mask >> i) & 1:
                    v ^= nv
            out.add(tuple(int(b) for b in unpack_bits(v, n)))
        return out


def solve_packed(rows: Sequence[int], ncols: int, rhs: int) -> tuple[int, list[int]]:
    """Packed-int core of :func:`solve`.

    Returns the lexicographically smallest particular solution (free
    variables zero) and the null-space vectors.  Raises :class:`Inconsistent`.
    """
    aug = [r | (((rhs >> i) & 1) << ncols) for i, r in enumerate(rows)]
    red, pivots = _rref(aug, ncols)
    coeff_mask = (1 << ncols) - 1
    for row in red[len(pivots):]:
        if row >> ncols:
            raise Inconsistent("system has no solution")
    x = 0
    for row, p in zip(red, pivots):
        if row >> ncols:
            x |= 1 << p
    nulls = _null_vectors([r & coeff_mask for r in red[: len(pivots)]], pivots, ncols)
    return x, nulls


def solve(a: BitMatrix, s) -> SolutionSet:
    """Solve ``a x = s`` over GF(2).

    Raises
    ------
    Inconsistent
        If no ``x`` satisfies the system.
    """
    s = np.asarray(s, dtype=np.uint8)
    if s.shape != (a.nrows,):
        raise ValueError(f"right-hand side has length {s.size}, expected {a.nrows}")
    x, nulls = solve_packed(a.rows, a.ncols, pack_bits(s))
    return SolutionSet(unpack_bits(x, a.ncols), BitMatrix.from_columns(nulls, a.ncols))


def block_lower_toeplitz(blocks: Sequence[BitMatrix], t: int) -> BitMatrix:
    """Assemble the ``t``-step block lower triangular Toeplitz matrix from ``blocks[0..t-1]``."""
    if not 1 <= t <= len(blocks):
        raise ValueError(f"t={t} outside 1..{len(blocks)}")
    r, c = blocks[0].shape
    rows = []
    for i in range(t):
        for row_in_block in range(r):
            v = 0
            for j in range(i + 1):
                v |= blocks[i - j].rows[row_in_block] << (c * j)
            rows.append(v)
    return BitMatrix(tuple(rows), c * t)

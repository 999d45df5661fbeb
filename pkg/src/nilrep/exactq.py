"""Exact rational scalars and dense matrices.

Scalars are :class:`fractions.Fraction`, which keeps every value in lowest
terms with a positive denominator.  Matrices are immutable and stored
row-major.  Rank and determinant use fraction-free (Bareiss) elimination on
integer rows obtained by clearing denominators.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)

# Largest prime below 2**31; products of two residues fit in int64.
MODULUS = 2_147_483_647


class ShapeError(ValueError):
    """Raised when matrix shapes do not conform."""


def to_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, float):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def rational_to_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class RatMatrix:
    """Immutable dense matrix over the rationals."""

    __slots__ = ("rows", "cols", "entries", "_hash", "_sparse")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        if rows <= 0 or cols <= 0:
            raise ShapeError(f"matrix dimensions must be positive, got {rows}x{cols}")
        data = tuple(to_rational(x) for x in entries)
        if len(data) != rows * cols:
            raise ShapeError(f"expected {rows * cols} entries, got {len(data)}")
        self.rows = rows
        self.cols = cols
        self.entries = data
        self._hash = None
        self._sparse = None

    @classmethod
    def _trusted(cls, rows: int, cols: int, entries: tuple) -> "RatMatrix":
        m = object.__new__(cls)
        m.rows = rows
        m.cols = cols
        m.entries = entries
        m._hash = None
        m._sparse = None
        return m

    @classmethod
    def _from_sparse(cls, rows: int, cols: int, nz: dict) -> "RatMatrix":
        data = [_ZERO] * (rows * cols)
        for idx, x in nz.items():
            data[idx] = x
        m = cls._trusted(rows, cols, tuple(data))
        m._sparse = {idx: x for idx, x in nz.items() if x}
        return m

    def nonzeros(self) -> dict:
        """Flat row-major index -> value for every nonzero entry (cached)."""
        if self._sparse is None:
            self._sparse = {idx: x for idx, x in enumerate(self.entries) if x}
        return self._sparse

    def _row_lists(self) -> list:
        rows: list = [None] * self.rows
        c = self.cols
        for idx, x in self.nonzeros().items():
            i, j = divmod(idx, c)
            if rows[i] is None:
                rows[i] = []
            rows[i].append((j, x))
        return rows

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RatMatrix":
        rows = [list(r) for r in rows]
        if not rows or not rows[0]:
            raise ShapeError("empty matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ShapeError("ragged rows")
        return cls(len(rows), width, (x for r in rows for x in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        if rows <= 0 or cols <= 0:
            raise ShapeError(f"matrix dimensions must be positive, got {rows}x{cols}")
        return cls._trusted(rows, cols, (_ZERO,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        m = cls.zeros(n, n)
        data = list(m.entries)
        for i in range(n):
            data[i * n + i] = _ONE
        return cls._trusted(n, n, tuple(data))

    @classmethod
    def unit(cls, rows: int, cols: int, i: int, j: int) -> "RatMatrix":
        """Elementary matrix with a single 1 at (i, j), zero-based."""
        data = [_ZERO] * (rows * cols)
        data[i * cols + j] = _ONE
        return cls._trusted(rows, cols, tuple(data))

    # -- basic protocol ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx) -> Fraction:
        i, j = idx
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple:
        return self.entries[j::self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self.entries))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(rational_to_str(x) for x in self.row(i)) for i in range(self.rows))
        return f"RatMatrix({self.rows}x{self.cols}: [{body}])"

    def is_zero(self) -> bool:
        return not any(self.entries)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        _same_shape(self, other)
        return RatMatrix._trusted(self.rows, self.cols, tuple(x + y for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        _same_shape(self, other)
        return RatMatrix._trusted(self.rows, self.cols, tuple(x - y for x, y in zip(self.entries, other.entries)))

    def __neg__(self) -> "RatMatrix":
        return RatMatrix._trusted(self.rows, self.cols, tuple(-x for x in self.entries))

    def scale(self, c) -> "RatMatrix":
        c = to_rational(c)
        return RatMatrix._trusted(self.rows, self.cols, tuple(c * x for x in self.entries))

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        return mat_mul(self, other)

    def transpose(self) -> "RatMatrix":
        return RatMatrix._trusted(
            self.cols, self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    @property
    def T(self) -> "RatMatrix":
        return self.transpose()

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "RatMatrix":
        """Rows r0:r1 and columns c0:c1 (half-open)."""
        return RatMatrix._trusted(
            r1 - r0, c1 - c0,
            tuple(self.entries[i * self.cols + j] for i in range(r0, r1) for j in range(c0, c1)),
        )

    def pad_rows(self, extra: int) -> "RatMatrix":
        """Append ``extra`` zero rows at the bottom."""
        return RatMatrix._trusted(self.rows + extra, self.cols, self.entries + (_ZERO,) * (extra * self.cols))

    def power(self, e: int) -> "RatMatrix":
        if self.rows != self.cols:
            raise ShapeError("power of a non-square matrix")
        out = RatMatrix.identity(self.rows)
        for _ in range(e):
            out = out @ self
        return out

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "entries": [rational_to_str(x) for x in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "RatMatrix":
        entries = obj["entries"]
        for x in entries:
            if not isinstance(x, str):
                raise ValueError(f"matrix entries must be rational strings, got {x!r}")
        return cls(int(obj["rows"]), int(obj["cols"]), (Fraction(x) for x in entries))


def _same_shape(a: RatMatrix, b: RatMatrix) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")


def _accumulate_product(a: RatMatrix, b: RatMatrix, acc: dict, sign: int) -> None:
    p = b.cols
    b_rows = b._row_lists()
    cols_a = a.cols
    for idx, x in a.nonzeros().items():
        i, k = divmod(idx, cols_a)
        nz = b_rows[k]
        if nz is None:
            continue
        base = i * p
        if sign < 0:
            x = -x
        for j, y in nz:
            key = base + j
            acc[key] = acc.get(key, _ZERO) + x * y


def mat_mul(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    # Zero-skipping: block-triangular representation matrices are mostly zero.
    acc: dict = {}
    _accumulate_product(a, b, acc, 1)
    return RatMatrix._from_sparse(a.rows, b.cols, acc)


def commutator(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    if a.rows != a.cols or a.shape != b.shape:
        raise ShapeError(f"commutator needs equal square shapes, got {a.shape} and {b.shape}")
    acc: dict = {}
    _accumulate_product(a, b, acc, 1)
    _accumulate_product(b, a, acc, -1)
    return RatMatrix._from_sparse(a.rows, a.cols, acc)


def vectorize(a: RatMatrix) -> list[Fraction]:
    return list(a.entries)


# -- integer kernels -------------------------------------------------------

def _integer_row(row: Sequence[Fraction]) -> tuple[list[int], int]:
    """Scale a rational row to integers; returns (row, multiplier)."""
    lcm = 1
    for x in row:
        d = x.denominator
        if d != 1:
            lcm = lcm * d // math.gcd(lcm, d)
    return [int(x * lcm) for x in row], lcm


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], int]:
    out, mult = [], 1
    for r in rows:
        ir, m = _integer_row(r)
        out.append(ir)
        mult *= m
    return out, mult


def bareiss_rank(m: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination (mutates ``m``)."""
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        pivot = None
        for i in range(rank, nrows):
            if m[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != rank:
            m[rank], m[pivot] = m[pivot], m[rank]
        prow = m[rank]
        p = prow[col]
        for i in range(rank + 1, nrows):
            ri = m[i]
            f = ri[col]
            if f:
                for j in range(col + 1, ncols):
                    ri[j] = (p * ri[j] - f * prow[j]) // prev
            else:
                for j in range(col + 1, ncols):
                    ri[j] = (p * ri[j]) // prev
            ri[col] = 0
        prev = p
        rank += 1
    return rank


def bareiss_det(m: list[list[int]]) -> int:
    """Determinant of a square integer matrix (mutates ``m``)."""
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = m[k][k]
        rk = m[k]
        for i in range(k + 1, n):
            ri = m[i]
            f = ri[k]
            for j in range(k + 1, n):
                ri[j] = (pk * ri[j] - f * rk[j]) // prev
        prev = pk
    return sign * m[n - 1][n - 1]


def modular_rank(rows: Sequence[Sequence[int]], modulus: int = MODULUS) -> int:
    """Rank of an integer matrix reduced modulo a prime.

    A lower bound for the rank over the rationals: a minor that is nonzero
    modulo the prime is nonzero over the integers.
    """
    if not rows:
        return 0
    a = np.array([[x % modulus for x in r] for r in rows], dtype=np.int64)
    nrows, ncols = a.shape
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        nz = np.nonzero(a[rank:, col])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        inv = pow(int(a[rank, col]), modulus - 2, modulus)
        a[rank] = (a[rank] * inv) % modulus
        below = a[rank + 1:, col].copy()
        if below.any():
            a[rank + 1:] = (a[rank + 1:] - np.outer(below, a[rank]) % modulus) % modulus
        rank += 1
    return rank


def rank_of_rows(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    ints, _ = _integer_rows(rows)
    return bareiss_rank(ints)


def rank(a: RatMatrix) -> int:
    return rank_of_rows([a.row(i) for i in range(a.rows)])


def det(a: RatMatrix) -> Fraction:
    if a.rows != a.cols:
        raise ShapeError(f"determinant of a non-square {a.shape} matrix")
    ints, mult = _integer_rows([a.row(i) for i in range(a.rows)])
    return Fraction(bareiss_det(ints), mult)


def rows_independent(rows: Sequence[Sequence[Fraction]]) -> bool:
    """True iff the given rational vectors are linearly independent.

    Full rank modulo a prime certifies independence exactly; otherwise the
    answer comes from exact fraction-free elimination.
    """
    if not rows:
        return True
    if len(rows) > len(rows[0]):
        return False
    ints, _ = _integer_rows(rows)
    # All-zero columns do not affect rank.
    live = [j for j in range(len(ints[0])) if any(r[j] for r in ints)]
    if len(live) < len(ints):
        return False
    if len(live) < len(ints[0]):
        ints = [[r[j] for j in live] for r in ints]
    if modular_rank(ints) == len(rows):
        return True
    return bareiss_rank(ints) == len(rows)


def is_independent(family: Sequence[RatMatrix]) -> bool:
    family = list(family)
    if not family:
        return True
    shape = family[0].shape
    for m in family:
        if m.shape != shape:
            raise ShapeError(f"family mixes shapes {shape} and {m.shape}")
    return rows_independent([m.entries for m in family])


def stack_vectorized(family: Sequence[RatMatrix]) -> RatMatrix:
    """The (count) x (rows*cols) matrix whose rows are the vectorizations."""
    family = list(family)
    width = family[0].rows * family[0].cols
    return RatMatrix(len(family), width, (x for m in family for x in m.entries))


def block_matrix(blocks: dict[tuple[int, int], RatMatrix], row_sizes: Sequence[int], col_sizes: Sequence[int]) -> RatMatrix:
    """Assemble a matrix from blocks keyed by (block_row, block_col)."""
    roff = [0]
    for s in row_sizes:
        roff.append(roff[-1] + s)
    coff = [0]
    for s in col_sizes:
        coff.append(coff[-1] + s)
    nrows, ncols = roff[-1], coff[-1]
    data = [_ZERO] * (nrows * ncols)
    for (bi, bj), blk in blocks.items():
        if blk.shape != (row_sizes[bi], col_sizes[bj]):
            raise ShapeError(f"block ({bi},{bj}) has shape {blk.shape}, expected {(row_sizes[bi], col_sizes[bj])}")
        for i in range(blk.rows):
            base = (roff[bi] + i) * ncols + coff[bj]
            data[base:base + blk.cols] = blk.row(i)
    return RatMatrix._trusted(nrows, ncols, tuple(data))


def kernel_vector(rows: Sequence[Sequence[Fraction]]) -> list[Fraction] | None:
    """Nonzero coefficients c with sum(c[i] * rows[i]) == 0, or None if independent."""
    n = len(rows)
    if n == 0:
        return None
    width = len(rows[0])
    # Solve M^T c = 0 by reduced row echelon form of the width x n system.
    m = [[to_rational(rows[i][j]) for i in range(n)] for j in range(width)]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, width) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][col]
        m[r] = [x / p for x in m[r]]
        for i in range(width):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == width:
            break
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    f = free[0]
    c = [_ZERO] * n
    c[f] = _ONE
    for row_idx, pc in enumerate(pivots):
        c[pc] = -m[row_idx][f]
    return c


def modular_full_column_rank_batch(mats: np.ndarray, modulus: int = MODULUS) -> np.ndarray:
    """For a stack of integer matrices (batch, rows, cols), test full column rank mod a prime.

    Division-free elimination: every update multiplies by a pivot that is a
    unit modulo the prime, which preserves rank.  ``True`` certifies full
    column rank over the rationals; ``False`` may be a modular accident and
    needs an exact recheck.
    """
    m = np.array(mats, dtype=np.int64) % modulus
    batch, nrows, ncols = m.shape
    ok = np.ones(batch, dtype=bool)
    if ncols > nrows:
        return np.zeros(batch, dtype=bool)
    idx = np.arange(batch)
    for c in range(ncols):
        nz = m[:, c:, c] != 0
        has = nz.any(axis=1)
        ok &= has
        piv = c + np.argmax(nz, axis=1)
        swap = piv != c
        if swap.any():
            s = idx[swap]
            top = m[s, c].copy()
            m[s, c] = m[s, piv[swap]]
            m[s, piv[swap]] = top
        if c + 1 < nrows:
            pc = m[:, c, c][:, None, None]
            f = m[:, c + 1:, c][:, :, None]
            m[:, c + 1:, :] = (pc * m[:, c + 1:, :] % modulus - f * m[:, c, None, :] % modulus) % modulus
    return ok

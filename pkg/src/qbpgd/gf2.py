"""Bit-packed linear algebra over GF(2).

Vectors and matrices store their bits little-endian inside ``uint64`` words,
one packed row per matrix row. Padding bits past the logical length are kept
at zero so word-wise comparisons and popcounts are exact.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

WORD_BITS = 64


def _n_words(length: int) -> int:
    return (length + WORD_BITS - 1) // WORD_BITS


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., length) 0/1 array into (..., n_words) uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    length = bits.shape[-1]
    nw = _n_words(length)
    padded = np.zeros(bits.shape[:-1] + (nw * WORD_BITS,), dtype=np.uint8)
    padded[..., :length] = bits & 1
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(bits.shape[:-1] + (nw,))


def _unpack(words: np.ndarray, length: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    as_bytes = words.view(np.uint8).reshape(words.shape[:-1] + (words.shape[-1] * 8,))
    bits = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return bits[..., :length]


def _parity(words: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(words).sum(axis=-1) & 1).astype(np.uint8)


class BitVector:
    """Immutable GF(2) vector of fixed length."""

    __slots__ = ("_length", "_words")

    def __init__(self, length: int, words: np.ndarray):
        words = np.array(words, dtype=np.uint64).reshape(-1)
        if length < 0 or words.shape[0] != _n_words(length):
            raise ValueError("word count does not match length")
        rem = length % WORD_BITS
        if rem and words.size and int(words[-1]) >> rem:
            raise ValueError("padding bits must be zero")
        words.setflags(write=False)
        self._length = length
        self._words = words

    @classmethod
    def from_bits(cls, bits: Iterable[int] | np.ndarray) -> BitVector:
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if arr.ndim != 1:
            raise ValueError("expected a one-dimensional bit array")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        return cls(arr.size, _pack(arr.astype(np.uint8)))

    @classmethod
    def coerce(cls, v) -> BitVector:
        return v if isinstance(v, BitVector) else cls.from_bits(np.asarray(v))

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length, np.zeros(_n_words(length), dtype=np.uint64))

    @classmethod
    def unit(cls, length: int, index: int) -> BitVector:
        bits = np.zeros(length, dtype=np.uint8)
        bits[index] = 1
        return cls.from_bits(bits)

    @classmethod
    def from_support(cls, length: int, support: Iterable[int]) -> BitVector:
        bits = np.zeros(length, dtype=np.uint8)
        bits[list(support)] = 1
        return cls.from_bits(bits)

    @property
    def words(self) -> np.ndarray:
        return self._words

    def __len__(self) -> int:
        return self._length

    def to_array(self) -> np.ndarray:
        return _unpack(self._words, self._length).copy()

    def __array__(self, dtype=None, copy=None):
        arr = self.to_array()
        return arr if dtype is None else arr.astype(dtype)

    def __getitem__(self, i: int) -> int:
        if not -self._length <= i < self._length:
            raise IndexError(i)
        i %= self._length
        return int(self._words[i // WORD_BITS] >> np.uint64(i % WORD_BITS)) & 1

    def __iter__(self):
        return iter(self.to_array().tolist())

    def weight(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def support(self) -> list[int]:
        return np.flatnonzero(self.to_array()).tolist()

    def any(self) -> bool:
        return bool(self._words.any())

    def dot(self, other: BitVector) -> int:
        _check_len(self, other)
        return int(_parity(self._words & other._words))

    def __xor__(self, other: BitVector) -> BitVector:
        _check_len(self, other)
        return BitVector(self._length, self._words ^ other._words)

    __add__ = __xor__

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._length == other._length and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._length, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector({''.join(map(str, self.to_array()))})"


def _check_len(a: BitVector, b: BitVector) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")


class BitMatrix:
    """Immutable GF(2) matrix stored as packed rows."""

    __slots__ = ("_rows", "_cols", "_words")

    def __init__(self, rows: int, cols: int, words: np.ndarray):
        words = np.array(words, dtype=np.uint64).reshape(rows, _n_words(cols))
        rem = cols % WORD_BITS
        if rem and words.size and (words[:, -1] >> np.uint64(rem)).any():
            raise ValueError("padding bits must be zero")
        words.setflags(write=False)
        self._rows = rows
        self._cols = cols
        self._words = words

    @classmethod
    def from_dense(cls, dense) -> BitMatrix:
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise ValueError("expected a two-dimensional array")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        return cls(arr.shape[0], arr.shape[1], _pack(arr.astype(np.uint8)))

    @classmethod
    def coerce(cls, m) -> BitMatrix:
        return m if isinstance(m, BitMatrix) else cls.from_dense(m)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, np.zeros((rows, _n_words(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_rows(cls, rows: Iterable[BitVector], cols: int) -> BitMatrix:
        rows = list(rows)
        if any(len(r) != cols for r in rows):
            raise ValueError("row length mismatch")
        words = np.stack([r.words for r in rows]) if rows else np.zeros((0, _n_words(cols)))
        return cls(len(rows), cols, words)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return self._rows, self._cols

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_dense(self) -> np.ndarray:
        return _unpack(self._words, self._cols).copy()

    def __array__(self, dtype=None, copy=None):
        arr = self.to_dense()
        return arr if dtype is None else arr.astype(dtype)

    def row(self, i: int) -> BitVector:
        return BitVector(self._cols, self._words[i])

    def __iter__(self):
        return (self.row(i) for i in range(self._rows))

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self._words).sum(axis=1).astype(np.int64)

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense().T)

    @property
    def T(self) -> BitMatrix:
        return self.transpose()

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if other.cols != self._cols:
            raise ValueError("column count mismatch")
        return BitMatrix(self._rows + other.rows, self._cols, np.vstack([self._words, other.words]))

    def append_row(self, v: BitVector) -> BitMatrix:
        if len(v) != self._cols:
            raise ValueError("column count mismatch")
        return BitMatrix(self._rows + 1, self._cols, np.vstack([self._words, v.words[None, :]]))

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        """GF(2) product ``self @ other``."""
        if self._cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        rhs = other.transpose().words
        out = np.zeros((self._rows, other.cols), dtype=np.uint8)
        for i in range(self._rows):
            out[i] = _parity(self._words[i][None, :] & rhs)
        return BitMatrix.from_dense(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._words, other.words))

    def __hash__(self) -> int:
        return hash((self.shape, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self._rows}x{self._cols})"


def mat_vec_mul(M: BitMatrix, v: BitVector) -> BitVector:
    """Return ``M v^T`` over GF(2)."""
    if len(v) != M.cols:
        raise ValueError(f"vector length {len(v)} does not match {M.cols} columns")
    return BitVector.from_bits(_parity(M.words & v.words[None, :]))


def _row_reduce(words: np.ndarray, cols: int, pivot_cols: int | None = None):
    """Reduced row echelon form of packed rows; operates on a copy.

    Only the first ``pivot_cols`` columns are eligible as pivots, which lets
    callers carry an augmented column along. Returns (reduced rows, pivots);
    the first ``len(pivots)`` rows are the nonzero pivot rows.
    """
    A = np.array(words, dtype=np.uint64, copy=True)
    nrows = A.shape[0]
    limit = cols if pivot_cols is None else pivot_cols
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == nrows:
            break
        w, b = divmod(c, WORD_BITS)
        col = (A[r:, w] >> np.uint64(b)) & np.uint64(1)
        hits = np.flatnonzero(col)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        mask = ((A[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
        mask[r] = False
        if mask.any():
            A[mask] ^= A[r]
        pivots.append(c)
        r += 1
    return A, pivots


def rref(M: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns."""
    A, pivots = _row_reduce(M.words, M.cols)
    return BitMatrix(len(pivots), M.cols, A[: len(pivots)]), pivots


def rank(M: BitMatrix) -> int:
    return len(_row_reduce(M.words, M.cols)[1])


class RowSpaceReducer:
    """Reduces vectors modulo the row space of a fixed matrix.

    The reduced form is canonical: two vectors reduce to the same value
    exactly when they differ by an element of the row space.
    """

    def __init__(self, M: BitMatrix):
        self.cols = M.cols
        basis, self.pivots = rref(M)
        self._basis = basis.words
        self._pivot_pos = [divmod(c, WORD_BITS) for c in self.pivots]

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce_words(self, words: np.ndarray) -> np.ndarray:
        """Reduce a stack of packed vectors, shape (k, n_words)."""
        out = np.array(words, dtype=np.uint64, copy=True).reshape(-1, _n_words(self.cols))
        for i, (w, b) in enumerate(self._pivot_pos):
            hit = ((out[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
            if hit.any():
                out[hit] ^= self._basis[i]
        return out

    def reduce(self, v: BitVector) -> BitVector:
        if len(v) != self.cols:
            raise ValueError(f"vector length {len(v)} does not match {self.cols} columns")
        return BitVector(self.cols, self.reduce_words(v.words[None, :])[0])

    def contains(self, v: BitVector) -> bool:
        return not self.reduce(v).any()


def in_row_space(M: BitMatrix, v: BitVector) -> bool:
    """True iff ``v`` is a GF(2) combination of the rows of ``M``."""
    if len(v) != M.cols:
        raise ValueError(f"vector length {len(v)} does not match {M.cols} columns")
    return RowSpaceReducer(M).contains(v)


def nullspace_basis(M: BitMatrix) -> BitMatrix:
    """Basis of ``{v : M v^T = 0}`` as the rows of a matrix."""
    n = M.cols
    R, pivots = rref(M)
    free = [c for c in range(n) if c not in set(pivots)]
    dense_r = R.to_dense()
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, p in enumerate(pivots):
            basis[k, p] = dense_r[i, f]
    return BitMatrix.from_dense(basis)


def solve(M: BitMatrix, s: BitVector) -> BitVector | None:
    """A particular solution ``x`` of ``M x^T = s``, or None if inconsistent."""
    if len(s) != M.rows:
        raise ValueError(f"syndrome length {len(s)} does not match {M.rows} rows")
    aug = np.hstack([M.to_dense(), s.to_array()[:, None]])
    A, pivots = _row_reduce(_pack(aug), M.cols + 1, pivot_cols=M.cols)
    dense = _unpack(A, M.cols + 1)
    if dense[len(pivots):, M.cols].any():
        return None
    x = np.zeros(M.cols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = dense[i, M.cols]
    return BitVector.from_bits(x)


def kron(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    return BitMatrix.from_dense(np.kron(A.to_dense(), B.to_dense()) & 1)


def hstack(*blocks: BitMatrix) -> BitMatrix:
    return BitMatrix.from_dense(np.hstack([b.to_dense() for b in blocks]))

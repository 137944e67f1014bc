"""CSS stabilizer codes: construction, validation, syndromes and outcome classes.

A code is the pair ``(H1, G2)``: rows of ``H1`` are Z-type checks (they see
X errors), rows of ``G2`` are X-type stabilizers (they see Z errors).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .gf2 import BitMatrix, BitVector, RowSpaceReducer, hstack, kron, mat_vec_mul, rank


class CodeFormatError(ValueError):
    """Malformed code or alist file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CssValidationError(ValueError):
    """An X-type generator anticommutes with a Z-type check."""

    def __init__(self, g2_row: int, h1_row: int):
        self.g2_row = g2_row
        self.h1_row = h1_row
        super().__init__(
            f"G2 row {g2_row} and H1 row {h1_row} anticommute (G2 H1^T != 0)"
        )


class SyndromeMismatchError(ValueError):
    """An estimate was classified against a truth with a different syndrome."""


class DecodeOutcome(enum.Enum):
    FAILURE_NONCONVERGENCE = "failure-nonconvergence"
    SUCCESS_EXACT = "success-exact"
    SUCCESS_DEGENERATE = "success-degenerate"
    FAILURE_LOGICAL = "failure-logical"

    @property
    def is_success(self) -> bool:
        return self in (DecodeOutcome.SUCCESS_EXACT, DecodeOutcome.SUCCESS_DEGENERATE)


@dataclass(frozen=True)
class PauliVector:
    """Symplectic representation ``D(x, z)`` of an n-qubit Pauli (phase dropped)."""

    x: BitVector
    z: BitVector

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError("x and z parts must have equal length")

    def __len__(self) -> int:
        return len(self.x)

    def __mul__(self, other: PauliVector) -> PauliVector:
        return PauliVector(self.x ^ other.x, self.z ^ other.z)

    @classmethod
    def identity(cls, n: int) -> PauliVector:
        return cls(BitVector.zeros(n), BitVector.zeros(n))

    @classmethod
    def from_symbols(cls, q) -> PauliVector:
        """Build from a quaternary vector with 0=I, 1=X, 2=Y, 3=Z."""
        q = np.asarray(q, dtype=np.uint8)
        return cls(
            BitVector.from_bits(((q == 1) | (q == 2)).astype(np.uint8)),
            BitVector.from_bits(((q == 2) | (q == 3)).astype(np.uint8)),
        )

    def to_symbols(self) -> np.ndarray:
        x = self.x.to_array()
        z = self.z.to_array()
        # (x, z) -> I=0, X=1, Y=2, Z=3
        return np.array([0, 3, 1, 2], dtype=np.uint8)[2 * x + z]

    def weight(self) -> int:
        return int(np.count_nonzero(self.to_symbols()))


def symplectic_inner(p: PauliVector, q: PauliVector) -> int:
    """0 if the two Paulis commute, 1 if they anticommute."""
    if len(p) != len(q):
        raise ValueError(f"length mismatch: {len(p)} vs {len(q)}")
    return p.z.dot(q.x) ^ p.x.dot(q.z)


@dataclass(frozen=True, eq=False)
class CssCode:
    H1: BitMatrix
    G2: BitMatrix
    name: str = "code"

    @property
    def n(self) -> int:
        return self.H1.cols

    @cached_property
    def k1(self) -> int:
        return self.n - rank(self.H1)

    @cached_property
    def k2(self) -> int:
        return rank(self.G2)

    @property
    def k(self) -> int:
        return self.k1 - self.k2

    @property
    def m(self) -> int:
        """Number of independent checks, ``n - k1 + k2``."""
        return self.n - self.k1 + self.k2

    @cached_property
    def h1_dense(self) -> np.ndarray:
        return self.H1.to_dense()

    @cached_property
    def g2_dense(self) -> np.ndarray:
        return self.G2.to_dense()

    @cached_property
    def x_stabilizers(self) -> RowSpaceReducer:
        return RowSpaceReducer(self.G2)

    @cached_property
    def z_stabilizers(self) -> RowSpaceReducer:
        return RowSpaceReducer(self.H1)

    def __repr__(self) -> str:
        return f"CssCode(name={self.name!r}, n={self.n}, H1={self.H1.rows} rows, G2={self.G2.rows} rows)"


def validate_css(H1, G2, name: str = "code") -> CssCode:
    """Check ``G2 H1^T = 0`` and return the code."""
    H1 = BitMatrix.coerce(H1)
    G2 = BitMatrix.coerce(G2)
    if H1.cols != G2.cols:
        raise ValueError(f"H1 has {H1.cols} columns but G2 has {G2.cols}")
    if G2.rows and H1.rows:
        for i in range(G2.rows):
            bad = np.flatnonzero(np.bitwise_count(G2.words[i][None, :] & H1.words).sum(axis=1) & 1)
            if bad.size:
                raise CssValidationError(i, int(bad[0]))
    return CssCode(H1, G2, name)


def syndrome_x(code: CssCode, x) -> BitVector:
    return mat_vec_mul(code.H1, BitVector.coerce(x))


def syndrome_full(code: CssCode, e: PauliVector) -> BitVector:
    """Full syndrome ``(s_x, s_z)``: H1 rows first, then G2 rows."""
    if len(e) != code.n:
        raise ValueError(f"error length {len(e)} does not match n={code.n}")
    sx = mat_vec_mul(code.H1, e.x).to_array()
    sz = mat_vec_mul(code.G2, e.z).to_array()
    return BitVector.from_bits(np.concatenate([sx, sz]))


def classify_x_outcome(code: CssCode, truth, estimate) -> DecodeOutcome:
    """Classify a bit-flip decode by the residual ``truth + estimate``."""
    if estimate is None:
        return DecodeOutcome.FAILURE_NONCONVERGENCE
    truth = BitVector.coerce(truth)
    estimate = BitVector.coerce(estimate)
    if syndrome_x(code, truth) != syndrome_x(code, estimate):
        raise SyndromeMismatchError("estimate does not reproduce the syndrome of the truth")
    residual = truth ^ estimate
    if not residual.any():
        return DecodeOutcome.SUCCESS_EXACT
    if code.x_stabilizers.contains(residual):
        return DecodeOutcome.SUCCESS_DEGENERATE
    return DecodeOutcome.FAILURE_LOGICAL


def classify_quaternary_outcome(code: CssCode, truth: PauliVector, estimate: PauliVector | None) -> DecodeOutcome:
    if estimate is None:
        return DecodeOutcome.FAILURE_NONCONVERGENCE
    if syndrome_full(code, truth) != syndrome_full(code, estimate):
        raise SyndromeMismatchError("estimate does not reproduce the syndrome of the truth")
    r = truth * estimate
    if not r.x.any() and not r.z.any():
        return DecodeOutcome.SUCCESS_EXACT
    if code.x_stabilizers.contains(r.x) and code.z_stabilizers.contains(r.z):
        return DecodeOutcome.SUCCESS_DEGENERATE
    return DecodeOutcome.FAILURE_LOGICAL


STEANE_H1 = np.array(
    [
        [1, 1, 1, 0, 1, 0, 0],
        [0, 1, 1, 1, 0, 1, 0],
        [0, 0, 1, 0, 1, 1, 1],
    ],
    dtype=np.uint8,
)


def steane_code() -> CssCode:
    """The [[7,1,3]] Steane code with the self-dual choice ``G2 = H1``."""
    return validate_css(STEANE_H1, STEANE_H1, name="steane")


def hypergraph_product(Ha, Hb, name: str = "hgp") -> CssCode:
    """Hypergraph product of two classical parity-check matrices."""
    Ha = BitMatrix.coerce(Ha)
    Hb = BitMatrix.coerce(Hb)
    ma, na = Ha.shape
    mb, nb = Hb.shape
    H1 = hstack(kron(Ha, BitMatrix.identity(nb)), kron(BitMatrix.identity(ma), Hb.T))
    G2 = hstack(kron(BitMatrix.identity(na), Hb), kron(Ha.T, BitMatrix.identity(mb)))
    return validate_css(H1, G2, name=name)


def random_regular_ldpc(n: int, dv: int, dc: int, rng: np.random.Generator, max_tries: int = 1000) -> BitMatrix:
    """Random (dv, dc)-regular parity-check matrix without repeated edges.

    Socket-matching construction; resamples until no variable meets the same
    check twice.
    """
    if (n * dv) % dc:
        raise ValueError("n * dv must be divisible by dc")
    m = n * dv // dc
    var_sockets = np.repeat(np.arange(n), dv)
    for _ in range(max_tries):
        chk_sockets = rng.permutation(np.repeat(np.arange(m), dc))
        H = np.zeros((m, n), dtype=np.uint8)
        np.add.at(H, (chk_sockets, var_sockets), 1)
        if H.max() == 1:
            return BitMatrix.from_dense(H)
    raise RuntimeError("could not build a simple regular graph")


# ---------------------------------------------------------------------------
# file formats


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _support_row(line: str, lineno: int, n: int) -> np.ndarray:
    try:
        idx = [int(tok) for tok in line.split()]
    except ValueError:
        raise CodeFormatError(f"non-integer entry in {line!r}", lineno) from None
    if any(i < 1 or i > n for i in idx):
        raise CodeFormatError(f"column index out of range 1..{n}", lineno)
    if idx != sorted(set(idx)):
        raise CodeFormatError("support must be strictly ascending", lineno)
    row = np.zeros(n, dtype=np.uint8)
    row[np.asarray(idx, dtype=np.int64) - 1] = 1
    return row


def parse_code_text(text: str) -> CssCode:
    lines = list(_content_lines(text))
    if not lines:
        raise CodeFormatError("empty code file")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 5 or parts[0] != "css":
        raise CodeFormatError("header must be 'css <name> <n> <rows_H1> <rows_G2>'", lineno)
    try:
        n, r1, r2 = (int(t) for t in parts[2:])
    except ValueError:
        raise CodeFormatError("header sizes must be integers", lineno) from None
    if n < 1 or r1 < 0 or r2 < 0:
        raise CodeFormatError("header sizes out of range", lineno)
    body = lines[1:]
    if len(body) != r1 + r2:
        where = body[-1][0] if body else lineno
        raise CodeFormatError(f"expected {r1 + r2} rows, found {len(body)}", where)
    rows = [_support_row(line, ln, n) for ln, line in body]
    H1 = np.array(rows[:r1], dtype=np.uint8).reshape(r1, n)
    G2 = np.array(rows[r1:], dtype=np.uint8).reshape(r2, n)
    return validate_css(H1, G2, name=parts[1])


def parse_code_file(path) -> CssCode:
    return parse_code_text(Path(path).read_text())


def format_code(code: CssCode) -> str:
    """Canonical text serialization of a code."""
    out = [f"css {code.name} {code.n} {code.H1.rows} {code.G2.rows}"]
    for M in (code.H1, code.G2):
        for row in M:
            support = row.support()
            if not support:
                raise ValueError("zero rows cannot be serialized")
            out.append(" ".join(str(i + 1) for i in support))
    return "\n".join(out) + "\n"


def write_code_file(code: CssCode, path) -> None:
    Path(path).write_text(format_code(code))


def parse_alist_text(text: str) -> BitMatrix:
    """Parse a parity-check matrix in alist layout (zero padding tolerated)."""
    try:
        tokens = [int(t) for _, line in _content_lines(text) for t in line.split()]
    except ValueError as exc:
        raise CodeFormatError(f"non-integer token: {exc}") from None
    pos = 0

    def take(k: int) -> list[int]:
        nonlocal pos
        if pos + k > len(tokens):
            raise CodeFormatError("alist file ended early")
        chunk = tokens[pos : pos + k]
        pos += k
        return chunk

    n, m = take(2)
    max_col, max_row = take(2)
    col_deg = take(n)
    row_deg = take(m)
    H = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        entries = take(max_col)
        for i in entries[: col_deg[j]]:
            if not 1 <= i <= m:
                raise CodeFormatError(f"row index {i} out of range in column {j + 1}")
            H[i - 1, j] = 1
    from_rows = np.zeros_like(H)
    for i in range(m):
        entries = take(max_row)
        for j in entries[: row_deg[i]]:
            if not 1 <= j <= n:
                raise CodeFormatError(f"column index {j} out of range in row {i + 1}")
            from_rows[i, j - 1] = 1
    if not np.array_equal(H, from_rows):
        raise CodeFormatError("column and row lists disagree")
    return BitMatrix.from_dense(H)


def parse_alist(path) -> BitMatrix:
    return parse_alist_text(Path(path).read_text())


def format_alist(H) -> str:
    H = BitMatrix.coerce(H).to_dense()
    m, n = H.shape
    cols = [np.flatnonzero(H[:, j]) + 1 for j in range(n)]
    rows = [np.flatnonzero(H[i]) + 1 for i in range(m)]
    max_col = max((len(c) for c in cols), default=0)
    max_row = max((len(r) for r in rows), default=0)

    def padded(idx, width):
        return " ".join(str(v) for v in list(idx) + [0] * (width - len(idx)))

    out = [f"{n} {m}", f"{max_col} {max_row}"]
    out.append(" ".join(str(len(c)) for c in cols))
    out.append(" ".join(str(len(r)) for r in rows))
    out += [padded(c, max_col) for c in cols]
    out += [padded(r, max_row) for r in rows]
    return "\n".join(out) + "\n"


def write_alist(H, path) -> None:
    Path(path).write_text(format_alist(H))

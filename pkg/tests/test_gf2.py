import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbpgd.gf2 import (
    BitMatrix,
    BitVector,
    RowSpaceReducer,
    hstack,
    in_row_space,
    kron,
    mat_vec_mul,
    nullspace_basis,
    rank,
    rref,
    solve,
)


def naive_rank(rows: list[list[int]]) -> int:
    """Textbook elimination on Python lists of 0/1."""
    rows = [r[:] for r in rows]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                rows[i] = [a ^ b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def span(rows: np.ndarray) -> set[tuple[int, ...]]:
    out = set()
    for coeffs in itertools.product((0, 1), repeat=rows.shape[0]):
        v = np.zeros(rows.shape[1], dtype=np.uint8)
        for c, r in zip(coeffs, rows):
            if c:
                v ^= r
        out.add(tuple(v))
    return out


matrices = st.integers(1, 7).flatmap(
    lambda m: st.integers(1, 70).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def test_pack_roundtrip_across_word_boundary():
    rng = np.random.default_rng(0)
    for n in (1, 63, 64, 65, 130):
        bits = rng.integers(0, 2, n).astype(np.uint8)
        v = BitVector.from_bits(bits)
        assert np.array_equal(v.to_array(), bits)
        assert v.weight() == bits.sum()
        assert v.support() == list(np.flatnonzero(bits))


def test_vector_ops():
    a = BitVector.from_bits([1, 0, 1, 1])
    b = BitVector.from_bits([0, 1, 1, 0])
    assert (a ^ b).to_array().tolist() == [1, 1, 0, 1]
    assert a.dot(b) == 1
    assert BitVector.unit(4, 2)[2] == 1
    assert BitVector.from_support(5, [0, 4]).to_array().tolist() == [1, 0, 0, 0, 1]
    assert not BitVector.zeros(3).any()
    with pytest.raises(ValueError):
        a ^ BitVector.zeros(5)


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_rank_matches_naive(rows):
    assert rank(BitMatrix.from_dense(rows)) == naive_rank(rows)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rref_is_reduced_and_spans_same_space(rows):
    M = BitMatrix.from_dense(rows)
    R, pivots = rref(M)
    D = R.to_dense()
    assert len(pivots) == rank(M)
    for i, c in enumerate(pivots):
        assert D[i, c] == 1
        assert D[:, c].sum() == 1
    assert not D[len(pivots):].any()
    if M.cols <= 16 and M.rows <= 7:
        assert span(np.asarray(rows, dtype=np.uint8)) == span(D[: len(pivots)])


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_nullspace(rows):
    M = BitMatrix.from_dense(rows)
    N = nullspace_basis(M)
    assert N.rows == M.cols - rank(M)
    assert rank(N) == N.rows
    assert not (M.to_dense().astype(int) @ N.to_dense().T.astype(int) % 2).any()


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(0, 2**32 - 1))
def test_solve(rows, seed):
    M = BitMatrix.from_dense(rows)
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, M.cols).astype(np.uint8)
    s = mat_vec_mul(M, BitVector.from_bits(x))
    y = solve(M, s)
    assert y is not None and mat_vec_mul(M, y) == s


def test_solve_inconsistent():
    M = BitMatrix.from_dense([[1, 1], [1, 1]])
    assert solve(M, BitVector.from_bits([1, 0])) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_row_space_membership_matches_enumeration(m, n, seed):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, 2, (m, n)).astype(np.uint8)
    M = BitMatrix.from_dense(rows)
    red = RowSpaceReducer(M)
    members = span(rows)
    for bits in itertools.product((0, 1), repeat=n):
        v = BitVector.from_bits(bits)
        assert red.contains(v) == (bits in members)
        assert in_row_space(M, v) == (bits in members)


def test_reduction_is_canonical():
    rng = np.random.default_rng(3)
    M = BitMatrix.from_dense(rng.integers(0, 2, (4, 12)))
    red = RowSpaceReducer(M)
    v = BitVector.from_bits(rng.integers(0, 2, 12))
    for r in M:
        assert red.reduce(v ^ r) == red.reduce(v)


def test_mat_vec_and_products_match_numpy():
    rng = np.random.default_rng(1)
    A = rng.integers(0, 2, (5, 70)).astype(np.uint8)
    B = rng.integers(0, 2, (70, 9)).astype(np.uint8)
    x = rng.integers(0, 2, 70).astype(np.uint8)
    Am, Bm = BitMatrix.from_dense(A), BitMatrix.from_dense(B)
    assert np.array_equal(mat_vec_mul(Am, BitVector.from_bits(x)).to_array(), A.astype(int) @ x % 2)
    assert np.array_equal((Am @ Bm).to_dense(), A.astype(int) @ B % 2)
    assert np.array_equal(Am.T.to_dense(), A.T)
    C = rng.integers(0, 2, (2, 3)).astype(np.uint8)
    assert np.array_equal(kron(BitMatrix.from_dense(C), Am).to_dense(), np.kron(C, A))
    assert np.array_equal(hstack(Am, Am).to_dense(), np.hstack([A, A]))
    with pytest.raises(ValueError):
        mat_vec_mul(Am, BitVector.zeros(3))


def test_identity_and_equality():
    eye = BitMatrix.identity(5)
    assert rank(eye) == 5
    assert eye == BitMatrix.from_dense(np.eye(5, dtype=np.uint8))
    assert hash(eye) == hash(BitMatrix.from_dense(np.eye(5, dtype=np.uint8)))
    assert eye.row_weights().tolist() == [1] * 5

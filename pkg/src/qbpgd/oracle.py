"""Exhaustive decoders and exact probabilities for small codes.

These are the references the message-passing decoders are tested against:
exact bitwise posteriors, coset tables, the DQML decoder, the sampling
decoder (by table and by the chain rule), and the closed-form error rates
of the DQML and sampling decoders.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .codes import CssCode
from .gf2 import BitMatrix, BitVector, RowSpaceReducer, nullspace_basis, solve

MAX_FREE_BITS = 24
MAX_TABLE_N = 20
MAX_RATE_N = 16
MAX_QUATERNARY_N = 7
TIE_RTOL = 1e-12


class InconsistentSyndromeError(ValueError):
    """The syndrome is not in the column space of H1."""


def _log_weights(X: np.ndarray, p_x: float) -> np.ndarray:
    if not 0 < p_x < 1:
        raise ValueError(f"probability must lie in (0, 1), got {p_x}")
    w = X.sum(axis=1, dtype=np.int64)
    n = X.shape[1]
    return w * math.log(p_x) + (n - w) * math.log1p(-p_x)


def solutions(H1, s) -> np.ndarray:
    """All ``x`` with ``H1 x = s`` as rows of a uint8 array."""
    H1 = BitMatrix.coerce(H1)
    x0 = solve(H1, BitVector.coerce(s))
    if x0 is None:
        raise InconsistentSyndromeError("syndrome has no solution")
    N = nullspace_basis(H1).to_dense().astype(np.uint8)
    d = N.shape[0]
    if d > MAX_FREE_BITS:
        raise ValueError(f"{d} free bits is beyond exhaustive enumeration")
    coeffs = ((np.arange(2**d)[:, None] >> np.arange(d)) & 1).astype(np.uint8)
    return ((coeffs @ N) & 1).astype(np.uint8) ^ x0.to_array()


def exact_marginals(H1, s, p_x: float) -> np.ndarray:
    """Bitwise posterior LLRs ``log P(x_i=0|s) / P(x_i=1|s)``.

    Infinite entries mean the bit is fixed by the syndrome.
    """
    X = solutions(H1, s)
    lw = _log_weights(X, p_x)
    with np.errstate(divide="ignore"):
        l0 = logsumexp(np.where(X == 0, lw[:, None], -np.inf), axis=0)
        l1 = logsumexp(np.where(X == 1, lw[:, None], -np.inf), axis=0)
    return l0 - l1


def _coset_map(code: CssCode) -> np.ndarray:
    """Matrix ``P`` with ``x P`` the canonical reduction of ``x`` mod rowspace(G2)."""
    red = RowSpaceReducer(code.G2)
    eye = np.eye(code.n, dtype=np.uint8)
    return np.array([red.reduce(BitVector.from_bits(r)).to_array() for r in eye], dtype=np.int64)


def _pack_rows(X: np.ndarray) -> np.ndarray:
    # one integer key per row; n stays well below 63 for exhaustive work
    return X.astype(np.int64) @ (np.int64(1) << np.arange(X.shape[1], dtype=np.int64))


def _lex_first(X: np.ndarray) -> int:
    """Index of the lexicographically smallest row (bit 1 first)."""
    return int(np.lexsort(X.T[::-1])[0])


@dataclass
class Coset:
    representative: np.ndarray
    mass: float  # posterior probability given the syndrome
    log_mass: float  # unnormalized log probability


@dataclass
class CosetTable:
    syndrome: np.ndarray
    log_prob: float  # log Pr(s)
    cosets: list[Coset]

    @classmethod
    def build(cls, code: CssCode, s, p_x: float) -> CosetTable:
        if code.n > MAX_TABLE_N:
            raise ValueError(f"n={code.n} is beyond exhaustive tables")
        X = solutions(code.H1, s)
        lw = _log_weights(X, p_x)
        keys = _pack_rows((X.astype(np.int64) @ _coset_map(code)) & 1)
        log_prob = float(logsumexp(lw))
        cosets = []
        for key in np.unique(keys):
            idx = np.flatnonzero(keys == key)
            top = lw[idx].max()
            best = idx[lw[idx] >= top - 1e-12]
            rep = X[best[_lex_first(X[best])]].copy()
            lm = float(logsumexp(lw[idx]))
            cosets.append(Coset(rep, math.exp(lm - log_prob), lm))
        cosets.sort(key=lambda c: tuple(c.representative))
        return cls(np.asarray(BitVector.coerce(s).to_array()), log_prob, cosets)

    def most_probable(self) -> Coset:
        """Coset of largest mass; near-ties go to the smaller representative."""
        top = max(c.mass for c in self.cosets)
        # cosets are sorted by representative, so the first near-max wins
        for c in self.cosets:
            if c.mass >= top * (1 - TIE_RTOL):
                return c
        raise AssertionError("unreachable")


def dqml_decode(code: CssCode, s, p_x: float) -> BitVector:
    """Degenerate quantum maximum likelihood: a representative of the heaviest coset."""
    return BitVector.from_bits(CosetTable.build(code, s, p_x).most_probable().representative)


@dataclass(frozen=True)
class ErrorRates:
    p_dqml: float
    p_s: float

    @property
    def lower_margin(self) -> float:
        return self.p_s - self.p_dqml

    @property
    def upper_margin(self) -> float:
        return 2 * self.p_dqml - self.p_s

    def theorem_holds(self, tol: float = 1e-12) -> bool:
        return self.lower_margin >= -tol and self.upper_margin >= -tol


def sampling_error_rates(code: CssCode, p_x: float) -> ErrorRates:
    """Exact block error rates of the DQML and sampling decoders.

    ``P_DQML = 1 - sum_s max_c Pr(c, s)`` and
    ``P_S = 1 - sum_s sum_c Pr(c, s)^2 / Pr(s)``, by enumerating all ``2^n``
    errors. Both are summed as error mass rather than one minus the success
    mass, which keeps them exact when they vanish.
    """
    n = code.n
    if n > MAX_RATE_N:
        raise ValueError(f"n={n} is beyond exhaustive enumeration")
    X = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    prob = np.exp(_log_weights(X, p_x))
    synd = _pack_rows((X.astype(np.int64) @ code.h1_dense.T.astype(np.int64)) & 1)
    coset = _pack_rows((X.astype(np.int64) @ _coset_map(code)) & 1)
    # joint (syndrome, coset) groups
    _, grp = np.unique(np.stack([synd, coset], axis=1), axis=0, return_inverse=True)
    grp = grp.reshape(-1)
    mass = np.bincount(grp, weights=prob)
    grp_synd = np.zeros(mass.size, dtype=np.int64)
    grp_synd[grp] = synd
    _, sidx = np.unique(grp_synd, return_inverse=True)
    sidx = sidx.reshape(-1)
    p_s_tot = np.bincount(sidx, weights=mass)
    best = np.zeros(p_s_tot.size)
    np.maximum.at(best, sidx, mass)
    # sum the error mass directly so a single coset per syndrome gives exactly 0
    p_dqml = math.fsum(p_s_tot - best)
    p_s = math.fsum(mass * (p_s_tot[sidx] - mass) / p_s_tot[sidx])
    return ErrorRates(p_dqml, p_s)


def _trellis(H: np.ndarray, p_x: float) -> tuple[np.ndarray, np.ndarray]:
    """Backward sums ``beta[i, sigma]`` over bits ``i..n-1`` producing ``sigma``."""
    m, n = H.shape
    if m > 22:
        raise ValueError(f"{m} checks is beyond the syndrome trellis")
    cols = _pack_rows(H.T.astype(np.uint8))
    beta = np.zeros((n + 1, 2**m))
    beta[n, 0] = 1.0
    states = np.arange(2**m)
    for i in range(n - 1, -1, -1):
        beta[i] = (1 - p_x) * beta[i + 1] + p_x * beta[i + 1][states ^ cols[i]]
    return beta, cols


def sampling_decode(code: CssCode, s, p_x: float, rng: np.random.Generator, size: int | None = None,
                    method: str = "table"):
    """Draw from ``Pr(x | H1 x = s)``.

    ``method="table"`` samples the enumerated solution set directly;
    ``method="chain"`` samples bit by bit from ``Pr(x_i | x_<i, s)`` using a
    backward pass over the syndrome trellis. Returns a BitVector, or a
    ``(size, n)`` array when ``size`` is given.
    """
    if code.n > MAX_TABLE_N:
        raise ValueError(f"n={code.n} is beyond exhaustive sampling")
    count = 1 if size is None else size
    s_arr = np.asarray(BitVector.coerce(s).to_array(), dtype=np.uint8)
    if method == "table":
        X = solutions(code.H1, s_arr)
        lw = _log_weights(X, p_x)
        w = np.exp(lw - lw.max())
        draws = X[rng.choice(len(X), size=count, p=w / w.sum())]
    elif method == "chain":
        H = code.h1_dense
        beta, cols = _trellis(H, p_x)
        target = int(_pack_rows(s_arr[None, :])[0])
        if beta[0, target] <= 0:
            raise InconsistentSyndromeError("syndrome has no solution")
        rem = np.full(count, target, dtype=np.int64)
        draws = np.zeros((count, code.n), dtype=np.uint8)
        for i in range(code.n):
            p1 = p_x * beta[i + 1][rem ^ cols[i]] / beta[i][rem]
            bit = rng.random(count) < p1
            draws[:, i] = bit
            rem = np.where(bit, rem ^ cols[i], rem)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    if size is None:
        return BitVector.from_bits(draws[0])
    return draws


def solution_probabilities(code: CssCode, s, p_x: float) -> tuple[np.ndarray, np.ndarray]:
    """The enumerated solutions and their conditional probabilities."""
    X = solutions(code.H1, s)
    lw = _log_weights(X, p_x)
    return X, np.exp(lw - logsumexp(lw))


_ANTI_X = np.array([0, 1, 1, 0], dtype=np.uint8)
_ANTI_Z = np.array([0, 0, 1, 1], dtype=np.uint8)


def quaternary_marginals(H1, G2, s, p: float) -> np.ndarray:
    """Exact ``Pr(Q_i = q | s)`` under depolarizing noise, shape ``(n, 4)``."""
    H1 = BitMatrix.coerce(H1).to_dense().astype(np.int64)
    G2 = BitMatrix.coerce(G2).to_dense().astype(np.int64)
    n = H1.shape[1]
    if n > MAX_QUATERNARY_N:
        raise ValueError(f"n={n} is beyond quaternary enumeration")
    Q = np.array(list(itertools.product(range(4), repeat=n)), dtype=np.int64).reshape(-1, n)
    synd = np.concatenate([_ANTI_X[Q] @ H1.T & 1, _ANTI_Z[Q] @ G2.T & 1], axis=1)
    keep = np.all(synd == np.asarray(s, dtype=np.int64), axis=1)
    if not keep.any():
        raise InconsistentSyndromeError("syndrome has no solution")
    Q = Q[keep]
    w = np.count_nonzero(Q, axis=1)
    prob = np.exp(w * math.log(p / 3) + (n - w) * math.log1p(-p))
    out = np.zeros((n, 4))
    for q in range(4):
        out[:, q] = ((Q == q) * prob[:, None]).sum(axis=0)
    return out / prob.sum()


@dataclass(frozen=True)
class GoldenRecord:
    code: str
    p_x: float
    p_dqml: float
    p_s: float


def write_golden(path, records: list[GoldenRecord]) -> None:
    lines = ["# code p_x P_DQML P_S"]
    lines += [f"{r.code} {r.p_x!r} {r.p_dqml!r} {r.p_s!r}" for r in records]
    Path(path).write_text("\n".join(lines) + "\n")


def read_golden(path) -> list[GoldenRecord]:
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        code, p, a, b = line.split()
        out.append(GoldenRecord(code, float(p), float(a), float(b)))
    return out

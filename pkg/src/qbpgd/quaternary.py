"""Quaternary BP (Q-BP) and Q-BPGD for depolarizing noise.

Symbols are 0=I, 1=X, 2=Y, 3=Z. Checks are the rows of ``H1`` (Z-type, they
see the x-part of an error) followed by the rows of ``G2`` (X-type, they see
the z-part). Edge messages are scalar LLRs of "commutes with the check's
Pauli" versus "anticommutes"; beliefs at the qubits stay four-valued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bp import _check_node, _syndrome_ok
from .codes import CssCode
from .decimation import GdResult
from .gf2 import BitMatrix

# ANTI[t, q] is 1 when symbol q anticommutes with a type-t check (0: Z, 1: X)
ANTI = np.array([[0, 1, 1, 0], [0, 0, 1, 1]], dtype=np.uint8)
_FLOOR = 1e-300


class QuatGraph:
    """Tanner graph over both check families, edges numbered check-major."""

    def __init__(self, H1, G2):
        H1 = BitMatrix.coerce(H1).to_dense()
        G2 = BitMatrix.coerce(G2).to_dense()
        if H1.shape[1] != G2.shape[1]:
            raise ValueError(f"H1 has {H1.shape[1]} columns but G2 has {G2.shape[1]}")
        self.n = H1.shape[1]
        self.r1, self.r2 = H1.shape[0], G2.shape[0]
        self.m = self.r1 + self.r2
        H = np.vstack([H1, G2]).reshape(self.m, self.n)
        chk, var = np.nonzero(H)
        self.edge_chk = chk.astype(np.int64)
        self.edge_var = var.astype(np.int64)
        self.edge_type = (chk >= self.r1).astype(np.int64)
        self.n_edges = chk.size
        self.chk_ptr = np.zeros(self.m + 1, dtype=np.int64)
        np.cumsum(np.bincount(chk, minlength=self.m), out=self.chk_ptr[1:])
        self.var_edges = np.lexsort((chk, var)).astype(np.int64)
        self.var_ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(var, minlength=self.n), out=self.var_ptr[1:])
        self.H1, self.G2 = H1, G2

    @classmethod
    def from_code(cls, code: CssCode) -> "QuatGraph":
        return cls(code.h1_dense, code.g2_dense)

    def syndrome(self, q) -> np.ndarray:
        """``(H1 x, G2 z)`` of a symbol vector."""
        q = np.asarray(q, dtype=np.int64)
        x = ANTI[0][q].astype(np.int64)
        z = ANTI[1][q].astype(np.int64)
        return np.concatenate([self.H1 @ x & 1, self.G2 @ z & 1]).astype(np.uint8)


@dataclass
class QBpResult:
    converged: bool
    hard: np.ndarray
    beliefs: np.ndarray
    iterations_used: int


def depolarizing_prior(p: float) -> np.ndarray:
    if not 0 < p < 0.75:
        raise ValueError(f"depolarizing probability must lie in (0, 3/4), got {p}")
    return np.array([1 - p, p / 3, p / 3, p / 3])


@njit(cache=True, error_model="numpy")
def _factors(delta):
    # likelihoods of commuting and anticommuting given an incoming LLR
    a = math.exp(-abs(delta))
    big = 1.0 / (1.0 + a)
    small = a / (1.0 + a)
    if delta >= 0:
        return big, small
    return small, big


@njit(cache=True, error_model="numpy")
def _normalize(b):
    tot = b[0] + b[1] + b[2] + b[3]
    for q in range(4):
        b[q] = max(b[q] / tot, _FLOOR)


@njit(cache=True, error_model="numpy")
def _belief(i, var_ptr, var_edges, edge_type, anti, prior, c2v, b):
    for q in range(4):
        b[q] = prior[i, q]
    for k in range(var_ptr[i], var_ptr[i + 1]):
        e = var_edges[k]
        fc, fa = _factors(c2v[e])
        for q in range(4):
            b[q] *= fa if anti[edge_type[e], q] else fc
        _normalize(b)


@njit(cache=True, error_model="numpy")
def _qiterate(chk_ptr, edge_var, edge_type, var_ptr, var_edges, anti, syndrome, prior,
              c2v, v2c, beliefs, hard, T, K, early_stop):
    m = chk_ptr.shape[0] - 1
    n = var_ptr.shape[0] - 1
    maxdeg = 1
    for j in range(m):
        maxdeg = max(maxdeg, chk_ptr[j + 1] - chk_ptr[j])
    work = np.empty(maxdeg)
    b = np.empty(4)
    par = np.empty(n, dtype=np.uint8)
    ok = False
    for t in range(T):
        for i in range(n):
            _belief(i, var_ptr, var_edges, edge_type, anti, prior, c2v, b)
            for k in range(var_ptr[i], var_ptr[i + 1]):
                e = var_edges[k]
                fc, fa = _factors(c2v[e])
                com = 0.0
                ant = 0.0
                for q in range(4):
                    if anti[edge_type[e], q]:
                        ant += b[q] / fa
                    else:
                        com += b[q] / fc
                v2c[e] = min(max(math.log(com / ant), -K), K)
        for j in range(m):
            sign = -1.0 if syndrome[j] else 1.0
            _check_node(v2c, c2v, chk_ptr[j], chk_ptr[j + 1], sign, 0, 1.0, K, work)
        for i in range(n):
            _belief(i, var_ptr, var_edges, edge_type, anti, prior, c2v, b)
            best = 0
            for q in range(4):
                beliefs[i, q] = b[q]
                if b[q] > b[best]:
                    best = q
            hard[i] = best
        ok = _qsyndrome_ok(chk_ptr, edge_var, edge_type, anti, syndrome, hard, par)
        if ok and early_stop:
            return True, t + 1
    return ok, T


@njit(cache=True, error_model="numpy")
def _qsyndrome_ok(chk_ptr, edge_var, edge_type, anti, syndrome, hard, par):
    for j in range(chk_ptr.shape[0] - 1):
        bit = 0
        for e in range(chk_ptr[j], chk_ptr[j + 1]):
            bit ^= anti[edge_type[e], hard[edge_var[e]]]
        if bit != syndrome[j]:
            return False
    return True


class QBpState:
    """Persistent Q-BP messages and priors for one decode."""

    def __init__(self, graph: QuatGraph, syndrome, priors, K: float = 25.0):
        syndrome = np.asarray(syndrome, dtype=np.uint8).reshape(-1)
        priors = np.array(priors, dtype=np.float64)
        if syndrome.size != graph.m:
            raise ValueError(f"syndrome length {syndrome.size} does not match {graph.m} checks")
        if priors.shape != (graph.n, 4):
            raise ValueError(f"priors must have shape ({graph.n}, 4)")
        self.graph = graph
        self.K = float(K)
        self.syndrome = syndrome
        self.prior = priors
        self.c2v = np.zeros(graph.n_edges)
        self.v2c = np.zeros(graph.n_edges)
        self.beliefs = priors / priors.sum(axis=1, keepdims=True)
        self.hard = np.argmax(self.beliefs, axis=1).astype(np.uint8)
        self.iterations = 0

    def matches(self) -> bool:
        return bool(np.array_equal(self.graph.syndrome(self.hard), self.syndrome))

    def run(self, T: int, early_stop: bool = True) -> QBpResult:
        if self.iterations == 0 and early_stop and self.matches():
            return QBpResult(True, self.hard.copy(), self.beliefs.copy(), 0)
        g = self.graph
        ok, used = _qiterate(
            g.chk_ptr, g.edge_var, g.edge_type, g.var_ptr, g.var_edges, ANTI, self.syndrome,
            self.prior, self.c2v, self.v2c, self.beliefs, self.hard, T, self.K, early_stop,
        )
        self.iterations += used
        return QBpResult(bool(ok), self.hard.copy(), self.beliefs.copy(), int(used))


def qbp_run(graph: QuatGraph, s, p: float, T: int, K: float = 25.0, early_stop: bool = True) -> QBpResult:
    """Run Q-BP from fresh messages with the depolarizing prior."""
    if T < 1:
        raise ValueError("T must be at least 1")
    priors = np.tile(depolarizing_prior(p), (graph.n, 1))
    return QBpState(graph, s, priors, K).run(T, early_stop)


@dataclass(frozen=True)
class QGdConfig:
    T: int = 10
    R: int | None = None
    eps: float = 1e-10
    K: float = 25.0
    check_each_iteration: bool = False

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.R is not None and self.R < 1:
            raise ValueError("R must be at least 1")
        if not 0 < self.eps < 0.25:
            raise ValueError("eps must lie in (0, 1/4)")

    def rounds(self, n: int) -> int:
        R = n if self.R is None else self.R
        if R > n:
            raise ValueError(f"R={R} exceeds the block length {n}")
        return R


def qbpgd_decode(graph: QuatGraph, s, p: float, cfg: QGdConfig) -> GdResult:
    """Q-BPGD: pin the most confident qubit to its argmax symbol each round.

    The trace holds ``(qubit, symbol)`` pairs.
    """
    n = graph.n
    R = cfg.rounds(n)
    state = QBpState(graph, s, np.tile(depolarizing_prior(p), (n, 1)), cfg.K)
    if state.matches():
        return GdResult(True, state.hard.copy(), 1, [], 0)
    free = np.ones(n, dtype=bool)
    trace: list[tuple[int, int]] = []
    for r in range(1, R + 1):
        res = state.run(cfg.T, early_stop=cfg.check_each_iteration)
        if res.converged:
            return GdResult(True, res.hard, r, trace, state.iterations)
        gamma = np.where(free, res.beliefs.max(axis=1), -1.0)
        best = int(np.argmax(gamma))
        sym = int(res.hard[best])
        pinned = np.full(4, cfg.eps)
        pinned[sym] = 1 - cfg.eps
        state.prior[best] = pinned
        free[best] = False
        trace.append((best, sym))
    return GdResult(False, None, R, trace, state.iterations)

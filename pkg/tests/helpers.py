"""Independent reference implementations and graph generators for tests."""

from __future__ import annotations

import math
from collections import deque

import numpy as np


def random_tree_checks(n: int, rng: np.random.Generator, max_check_deg: int = 4) -> np.ndarray:
    """Parity-check matrix whose Tanner graph is a tree spanning all ``n`` variables.

    Every check touches at least two variables.
    """
    rows = []
    placed = [0]
    nxt = 1
    while nxt < n:
        anchor = int(rng.choice(placed))
        k = int(rng.integers(1, max_check_deg))
        new = list(range(nxt, min(n, nxt + k)))
        nxt += len(new)
        row = np.zeros(n, dtype=np.uint8)
        row[[anchor] + new] = 1
        rows.append(row)
        placed.extend(new)
    return np.array(rows, dtype=np.uint8).reshape(-1, n)


def tanner_diameter(H: np.ndarray) -> int:
    """Diameter (in edges) of the Tanner graph of ``H``."""
    m, n = H.shape
    adj: list[list[int]] = [[] for _ in range(n + m)]
    for j, i in zip(*np.nonzero(H)):
        adj[i].append(n + j)
        adj[n + j].append(i)
    best = 0
    for src in range(n + m):
        dist = {src: 0}
        q = deque([src])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        best = max(best, max(dist.values()))
    return best


def reference_bp(
    H: np.ndarray,
    s: np.ndarray,
    prior: np.ndarray,
    T: int,
    K: float = 25.0,
    min_sum_alpha: float | None = None,
) -> np.ndarray:
    """Plain-Python flooding BP; returns the biases after ``T`` iterations.

    Sum-product by default, normalized min-sum when ``min_sum_alpha`` is given.
    """
    m, n = H.shape
    edges = [(j, i) for j in range(m) for i in range(n) if H[j, i]]
    c2v = {e: 0.0 for e in edges}
    v2c = {}
    for _ in range(T):
        for j, i in edges:
            tot = prior[i] + sum(c2v[(jj, i)] for jj in range(m) if H[jj, i] and jj != j)
            v2c[(j, i)] = min(max(tot, -K), K)
        for j, i in edges:
            others = [v2c[(j, ii)] for ii in range(n) if H[j, ii] and ii != i]
            if min_sum_alpha is not None:
                sign = math.prod(1 if v >= 0 else -1 for v in others)
                out = min_sum_alpha * sign * min((abs(v) for v in others), default=K)
            else:
                prod = math.prod(math.tanh(v / 2) for v in others)
                prod = min(max(prod, -1 + 1e-15), 1 - 1e-15)
                out = 2 * math.atanh(prod)
            c2v[(j, i)] = min(max((-1) ** int(s[j]) * out, -K), K)
    return np.array([prior[i] + sum(c2v[(j, i)] for j in range(m) if H[j, i]) for i in range(n)])


def brute_marginals(H: np.ndarray, s: np.ndarray, p: float) -> np.ndarray:
    """Bitwise LLRs by enumerating all ``2^n`` strings."""
    m, n = H.shape
    X = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(np.int64)
    ok = np.all((X @ H.T.astype(np.int64)) % 2 == np.asarray(s), axis=1)
    X = X[ok]
    w = X.sum(axis=1)
    prob = p**w * (1 - p) ** (n - w)
    p1 = (X * prob[:, None]).sum(axis=0)
    p0 = ((1 - X) * prob[:, None]).sum(axis=0)
    with np.errstate(divide="ignore"):
        return np.log(p0) - np.log(p1)


def reference_bpgd(
    H: np.ndarray,
    s: np.ndarray,
    p: float,
    T: int,
    R: int,
    llr_max: float = 25.0,
    K: float = 25.0,
    tie_gap: float = 1e-9,
):
    """Vectorized LLR-domain BPGD with warm start and end-of-round checks.

    Returns ``(converged, estimate, trace, first_tie)`` where ``first_tie`` is
    the index of the first decimation decided by a reliability gap below
    ``tie_gap`` (``None`` when every choice was clear).
    """
    m, n = H.shape
    chk, var = np.nonzero(H)
    s = np.asarray(s)
    prior = np.full(n, math.log((1 - p) / p))
    c2v = np.zeros(chk.size)
    free = np.ones(n, dtype=bool)
    trace: list[tuple[int, int]] = []
    first_tie = None
    bias = prior.copy()
    if not ((H.astype(int) @ (bias <= 0)) % 2 != s).any():
        return True, (bias <= 0).astype(np.uint8), trace, first_tie
    for _ in range(R):
        for _ in range(T):
            bias = prior + np.bincount(var, c2v, minlength=n)
            v2c = np.clip(bias[var] - c2v, -K, K)
            t = np.tanh(v2c / 2)
            for j in range(m):
                idx = np.flatnonzero(chk == j)
                for e in idx:
                    prod = np.prod(t[idx[idx != e]])
                    prod = min(max(prod, -1 + 1e-15), 1 - 1e-15)
                    c2v[e] = np.clip((-1) ** int(s[j]) * 2 * math.atanh(prod), -K, K)
            bias = prior + np.bincount(var, c2v, minlength=n)
        hard = (bias <= 0).astype(np.uint8)
        if not ((H.astype(int) @ hard) % 2 != s).any():
            return True, hard, trace, first_tie
        rel = np.where(free, np.abs(bias), -1.0)
        best = int(np.argmax(rel))
        runner = np.partition(rel, -2)[-2] if n > 1 else -1.0
        if rel[best] - runner < tie_gap and first_tie is None:
            first_tie = len(trace)
        bit = 0 if bias[best] > 0 else 1
        prior[best] = llr_max if bit == 0 else -llr_max
        free[best] = False
        trace.append((best, bit))
    return False, None, trace, first_tie

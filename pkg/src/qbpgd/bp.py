"""Flooding-schedule belief propagation for bit-flip syndrome decoding.

Messages are LLRs ``log P(0)/P(1)``. Check nodes carry the syndrome sign,
so the graph only needs the Tanner graph of ``H1`` plus per-variable priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .gf2 import BitMatrix

SUM_PRODUCT = "sum-product"
MIN_SUM = "min-sum"
_VARIANTS = {SUM_PRODUCT: 0, MIN_SUM: 1}


@dataclass(frozen=True)
class BpConfig:
    variant: str = SUM_PRODUCT
    K: float = 25.0
    T: int = 100
    alpha: float = 0.625

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown BP variant {self.variant!r}")
        if not self.K > 0:
            raise ValueError("K must be positive")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.variant == MIN_SUM and not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")


class TannerGraph:
    """Immutable adjacency of a parity-check matrix.

    Edges are numbered check-major: the edges of check ``j`` are
    ``chk_ptr[j]:chk_ptr[j+1]`` with variables in ascending order.
    ``var_edges[var_ptr[i]:var_ptr[i+1]]`` lists the edges of variable ``i``
    in ascending check order.
    """

    def __init__(self, H):
        H = BitMatrix.coerce(H).to_dense()
        self.m, self.n = H.shape
        chk, var = np.nonzero(H)
        self.edge_chk = chk.astype(np.int64)
        self.edge_var = var.astype(np.int64)
        self.n_edges = chk.size
        self.chk_ptr = np.zeros(self.m + 1, dtype=np.int64)
        np.cumsum(np.bincount(chk, minlength=self.m), out=self.chk_ptr[1:])
        order = np.lexsort((chk, var))
        self.var_edges = order.astype(np.int64)
        self.var_ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(var, minlength=self.n), out=self.var_ptr[1:])
        self.H = H
        for arr in (self.edge_chk, self.edge_var, self.chk_ptr, self.var_edges, self.var_ptr, self.H):
            arr.setflags(write=False)

    def check_neighbors(self, j: int) -> np.ndarray:
        return self.edge_var[self.chk_ptr[j] : self.chk_ptr[j + 1]]

    def variable_neighbors(self, i: int) -> np.ndarray:
        return self.edge_chk[self.var_edges[self.var_ptr[i] : self.var_ptr[i + 1]]]

    def syndrome(self, x: np.ndarray) -> np.ndarray:
        return (self.H @ np.asarray(x, dtype=np.int64) & 1).astype(np.uint8)


@dataclass
class BpRunResult:
    converged: bool
    hard: np.ndarray
    biases: np.ndarray
    iterations_used: int


def channel_llr(p_x: float) -> float:
    if not 0 < p_x < 1:
        raise ValueError(f"probability must lie in (0, 1), got {p_x}")
    return math.log((1 - p_x) / p_x)


_ATANH_CLAMP = 1.0 - 1e-15
_BIG = 1e300
# (1 + e^25)^24 stays below the double range
_MAX_FRAC_DEG = 24


@njit(cache=True, error_model="numpy")
def _check_node(v2c, c2v, lo, hi, sign, variant, alpha, K, work):
    """Update the outgoing LLR messages of one check from edges lo..hi.

    Sum-product uses ``2 atanh(prod tanh(m/2))`` with prefix/suffix products,
    so the exclusion of the target edge needs no division.
    """
    d = hi - lo
    if variant == 0:
        acc = 1.0
        for k in range(d):
            m = v2c[lo + k]
            a = math.exp(-abs(m))
            t = (1.0 - a) / (1.0 + a)
            if m < 0:
                t = -t
            work[k] = acc
            acc *= t
            c2v[lo + k] = t
        acc = 1.0
        for k in range(d - 1, -1, -1):
            t = c2v[lo + k]
            prod = min(max(work[k] * acc, -_ATANH_CLAMP), _ATANH_CLAMP)
            acc *= t
            out = sign * math.log((1.0 + prod) / (1.0 - prod))
            c2v[lo + k] = min(max(out, -K), K)
    else:
        best = np.inf
        neg = 0
        for k in range(d):
            work[k] = best
            m = v2c[lo + k]
            a = abs(m)
            if a < best:
                best = a
            if m < 0:
                neg += 1
        best = np.inf
        for k in range(d - 1, -1, -1):
            m = v2c[lo + k]
            a = abs(m)
            mag = work[k] if work[k] < best else best
            if a < best:
                best = a
            s = sign
            if (neg - (1 if m < 0 else 0)) & 1:
                s = -s
            c2v[lo + k] = s * min(alpha * mag, K)


@njit(cache=True, error_model="numpy")
def _syndrome_ok(chk_ptr, edge_var, syndrome, hard):
    for j in range(chk_ptr.shape[0] - 1):
        par = 0
        for e in range(chk_ptr[j], chk_ptr[j + 1]):
            par ^= hard[edge_var[e]]
        if par != syndrome[j]:
            return False
    return True


@njit(cache=True, error_model="numpy")
def _ratio_variables(var_ptr, var_edges, edge_chk, prior, pr, c2v, frac, bias, hard, lo_r, hi_r, K,
                     outgoing, var_dirty, chk_dirty):
    """Bias ratios and hard decisions of the dirty variables, plus their
    outgoing messages when asked. A changed message marks its check dirty."""
    n = var_ptr.shape[0] - 1
    for i in range(n):
        if not var_dirty[i]:
            continue
        var_dirty[i] = False
        R = pr[i]
        for k in range(var_ptr[i], var_ptr[i + 1]):
            R *= c2v[var_edges[k]]
        bias[i] = R
        hard[i] = 0 if R > 1.0 else 1
        if not outgoing:
            continue
        if R < _BIG and R > 1.0 / _BIG:
            inv = 1.0 / R
            for k in range(var_ptr[i], var_ptr[i + 1]):
                e = var_edges[k]
                q = min(max(c2v[e] * inv, lo_r), hi_r)
                if q != frac[e]:
                    frac[e] = q
                    chk_dirty[edge_chk[e]] = True
        else:
            total = prior[i]
            for k in range(var_ptr[i], var_ptr[i + 1]):
                total += math.log(c2v[var_edges[k]])
            for k in range(var_ptr[i], var_ptr[i + 1]):
                e = var_edges[k]
                q = math.exp(min(max(math.log(c2v[e]) - total, -K), K))
                if q != frac[e]:
                    frac[e] = q
                    chk_dirty[edge_chk[e]] = True


@njit(cache=True, error_model="numpy")
def _iterate_ratio(chk_ptr, edge_var, edge_chk, var_ptr, var_edges, syndrome, prior, c2v, frac,
                   bias, hard, T, K, early_stop):
    """Sum-product in the likelihood-ratio domain.

    ``c2v`` holds ``exp(llr)`` of the check messages. The variable message on
    edge ``e`` is kept as ``tanh(llr/2) = (1 - q) / (1 + q)`` with
    ``q = exp(-llr)`` stored in ``frac[e]``, so an iteration costs one
    division per edge and no transcendental calls. Clipping to ``+-K`` becomes
    clipping to ``[e^-K, e^K]``. A variable whose ratio product leaves the
    double range is redone in the log domain.

    A node is recomputed only when one of its inputs changed bit for bit, so
    the result is the same as a full flooding pass. Late decimation rounds
    leave most messages saturated and fixed, which makes this the main saving.
    """
    m = chk_ptr.shape[0] - 1
    n = var_ptr.shape[0] - 1
    hi_r = math.exp(K)
    lo_r = math.exp(-K)
    maxdeg = 1
    for j in range(m):
        maxdeg = max(maxdeg, chk_ptr[j + 1] - chk_ptr[j])
    work_n = np.empty(maxdeg)
    work_d = np.empty(maxdeg)
    pr = np.empty(n)
    for i in range(n):
        pr[i] = math.exp(min(max(prior[i], -700.0), 700.0))
    var_dirty = np.ones(n, dtype=np.bool_)
    chk_dirty = np.ones(m, dtype=np.bool_)
    ok = False
    if T > 0:
        _ratio_variables(var_ptr, var_edges, edge_chk, prior, pr, c2v, frac, bias, hard, lo_r, hi_r, K,
                         True, var_dirty, chk_dirty)
    for t in range(T):
        for j in range(m):
            if not chk_dirty[j]:
                continue
            chk_dirty[j] = False
            lo = chk_ptr[j]
            hi = chk_ptr[j + 1]
            if hi - lo <= _MAX_FRAC_DEG:
                # exclusive products of the tanh numerators and denominators
                num = 1.0
                den = 1.0
                for e in range(lo, hi):
                    work_n[e - lo] = num
                    work_d[e - lo] = den
                    num *= 1.0 - frac[e]
                    den *= 1.0 + frac[e]
                snum = 1.0
                sden = 1.0
                for e in range(hi - 1, lo - 1, -1):
                    q = frac[e]
                    pn = work_n[e - lo] * snum
                    pd = work_d[e - lo] * sden
                    snum *= 1.0 - q
                    sden *= 1.0 + q
                    a = pd + pn
                    b = pd - pn
                    if syndrome[j]:
                        a, b = b, a
                    if a >= hi_r * b:
                        out = hi_r
                    elif a <= lo_r * b:
                        out = lo_r
                    else:
                        out = a / b
                    if out != c2v[e]:
                        c2v[e] = out
                        var_dirty[edge_var[e]] = True
            else:
                # wide check: plain tanh products so nothing overflows
                acc = 1.0
                for e in range(lo, hi):
                    work_n[e - lo] = acc
                    acc *= (1.0 - frac[e]) / (1.0 + frac[e])
                acc = 1.0
                for e in range(hi - 1, lo - 1, -1):
                    prod = min(max(work_n[e - lo] * acc, -_ATANH_CLAMP), _ATANH_CLAMP)
                    acc *= (1.0 - frac[e]) / (1.0 + frac[e])
                    if syndrome[j]:
                        prod = -prod
                    out = min(max((1.0 + prod) / (1.0 - prod), lo_r), hi_r)
                    if out != c2v[e]:
                        c2v[e] = out
                        var_dirty[edge_var[e]] = True
        last = t == T - 1
        _ratio_variables(var_ptr, var_edges, edge_chk, prior, pr, c2v, frac, bias, hard, lo_r, hi_r, K,
                         not last, var_dirty, chk_dirty)
        if early_stop or last:
            ok = _syndrome_ok(chk_ptr, edge_var, syndrome, hard)
            if ok and early_stop:
                T = t + 1
                break
    # convert the stored ratios to LLRs only once per call
    for i in range(n):
        R = bias[i]
        if R < _BIG and R > 1.0 / _BIG:
            bias[i] = math.log(R)
        else:
            total = prior[i]
            for k in range(var_ptr[i], var_ptr[i + 1]):
                total += math.log(c2v[var_edges[k]])
            bias[i] = total
    return ok, T


@njit(cache=True, error_model="numpy")
def _llr_variables(var_ptr, var_edges, edge_chk, prior, c2v, v2c, bias, hard, K, outgoing,
                   var_dirty, chk_dirty):
    """Biases and hard decisions of the dirty variables, plus their extrinsic
    saturated messages when asked. A changed message marks its check dirty."""
    n = var_ptr.shape[0] - 1
    for i in range(n):
        if not var_dirty[i]:
            continue
        var_dirty[i] = False
        total = prior[i]
        for k in range(var_ptr[i], var_ptr[i + 1]):
            total += c2v[var_edges[k]]
        bias[i] = total
        hard[i] = 0 if total > 0 else 1
        if outgoing:
            for k in range(var_ptr[i], var_ptr[i + 1]):
                e = var_edges[k]
                msg = min(max(total - c2v[e], -K), K)
                if msg != v2c[e]:
                    v2c[e] = msg
                    chk_dirty[edge_chk[e]] = True


@njit(cache=True, error_model="numpy")
def _iterate_llr(chk_ptr, edge_var, edge_chk, var_ptr, var_edges, syndrome, prior, c2v, v2c,
                 bias, hard, T, K, variant, alpha, early_stop):
    """LLR-domain flooding BP with the same changed-input skipping as the ratio kernel."""
    m = chk_ptr.shape[0] - 1
    n = var_ptr.shape[0] - 1
    maxdeg = 1
    for j in range(m):
        maxdeg = max(maxdeg, chk_ptr[j + 1] - chk_ptr[j])
    work = np.empty(maxdeg)
    fresh = np.empty(c2v.shape[0])
    var_dirty = np.ones(n, dtype=np.bool_)
    chk_dirty = np.ones(m, dtype=np.bool_)
    ok = False
    if T > 0:
        _llr_variables(var_ptr, var_edges, edge_chk, prior, c2v, v2c, bias, hard, K, True,
                       var_dirty, chk_dirty)
    for t in range(T):
        for j in range(m):
            if not chk_dirty[j]:
                continue
            chk_dirty[j] = False
            sign = -1.0 if syndrome[j] else 1.0
            _check_node(v2c, fresh, chk_ptr[j], chk_ptr[j + 1], sign, variant, alpha, K, work)
            for e in range(chk_ptr[j], chk_ptr[j + 1]):
                if fresh[e] != c2v[e]:
                    c2v[e] = fresh[e]
                    var_dirty[edge_var[e]] = True
        last = t == T - 1
        _llr_variables(var_ptr, var_edges, edge_chk, prior, c2v, v2c, bias, hard, K, not last,
                       var_dirty, chk_dirty)
        if early_stop or last:
            ok = _syndrome_ok(chk_ptr, edge_var, syndrome, hard)
            if ok and early_stop:
                return True, t + 1
    return ok, T


class BpState:
    """Mutable BP state for one decode: priors and check-to-variable messages.

    The state persists across calls to :meth:`run`, so decimation can change
    priors between rounds and resume from the current messages.
    """

    def __init__(self, graph: TannerGraph, syndrome, priors, cfg: BpConfig):
        syndrome = np.asarray(syndrome, dtype=np.uint8).reshape(-1)
        priors = np.asarray(priors, dtype=np.float64).reshape(-1)
        if syndrome.size != graph.m:
            raise ValueError(f"syndrome length {syndrome.size} does not match {graph.m} checks")
        if priors.size != graph.n:
            raise ValueError(f"prior length {priors.size} does not match {graph.n} variables")
        self.graph = graph
        self.cfg = cfg
        self.syndrome = syndrome
        self.prior = priors.copy()
        self._ratio = cfg.variant == SUM_PRODUCT
        # check messages: likelihood ratios for sum-product, LLRs otherwise
        self._c2v = np.ones(graph.n_edges) if self._ratio else np.zeros(graph.n_edges)
        self._v2c = np.zeros(graph.n_edges)
        self.bias = self.prior.copy()
        self.hard = (self.bias <= 0).astype(np.uint8)
        self.iterations = 0

    @property
    def check_messages(self) -> np.ndarray:
        """Current check-to-variable LLRs in edge order."""
        return np.log(self._c2v) if self._ratio else self._c2v.copy()

    @property
    def variable_messages(self) -> np.ndarray:
        """Latest variable-to-check LLRs in edge order (zero before any iteration)."""
        if self._ratio:
            return -np.log(np.where(self._v2c > 0, self._v2c, 1.0))
        return self._v2c.copy()

    def kernel_args(self) -> tuple:
        g = self.graph
        return (g.chk_ptr, g.edge_var, g.edge_chk, g.var_ptr, g.var_edges, self.syndrome, self.prior,
                self._c2v, self._v2c, self.bias, self.hard)

    def matches(self) -> bool:
        return bool(np.array_equal(self.graph.syndrome(self.hard), self.syndrome))

    def run(self, T: int | None = None, early_stop: bool = True) -> BpRunResult:
        T = self.cfg.T if T is None else T
        if self.iterations == 0 and early_stop and self.matches():
            return BpRunResult(True, self.hard.copy(), self.bias.copy(), 0)
        g = self.graph
        if self._ratio:
            converged, used = _iterate_ratio(
                g.chk_ptr, g.edge_var, g.edge_chk, g.var_ptr, g.var_edges, self.syndrome, self.prior,
                self._c2v, self._v2c, self.bias, self.hard, T, float(self.cfg.K), early_stop,
            )
        else:
            converged, used = _iterate_llr(
                g.chk_ptr, g.edge_var, g.edge_chk, g.var_ptr, g.var_edges, self.syndrome, self.prior,
                self._c2v, self._v2c, self.bias, self.hard, T, float(self.cfg.K),
                _VARIANTS[self.cfg.variant], float(self.cfg.alpha), early_stop,
            )
        self.iterations += used
        return BpRunResult(bool(converged), self.hard.copy(), self.bias.copy(), int(used))


def bp_run(graph: TannerGraph, s_x, priors, cfg: BpConfig, early_stop: bool = True) -> BpRunResult:
    """Run up to ``cfg.T`` flooding iterations from fresh messages.

    With ``early_stop`` the run ends at the first iteration whose hard
    decision reproduces ``s_x`` (including a check on the priors alone
    before any iteration).
    """
    return BpState(graph, s_x, priors, cfg).run(cfg.T, early_stop=early_stop)


def check_update(incoming, syndrome_bit: int, variant: str = SUM_PRODUCT, alpha: float = 0.625, K: float = 25.0) -> float:
    """Outgoing check-to-variable message given the other incoming messages."""
    incoming = np.asarray(list(incoming) + [1.0], dtype=np.float64)
    out = np.zeros_like(incoming)
    work = np.empty(incoming.size)
    sign = -1.0 if syndrome_bit else 1.0
    _check_node(incoming, out, 0, incoming.size, sign, _VARIANTS[variant], alpha, K, work)
    # the appended unit entry is the target edge; its outgoing slot holds the answer
    return float(out[-1])


def variable_update(prior: float, incoming, K: float = 25.0) -> float:
    total = prior + float(np.sum(np.asarray(list(incoming), dtype=np.float64)))
    return float(min(max(total, -K), K))
